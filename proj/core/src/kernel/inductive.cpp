#include "dgl/kernel/inductive.hpp"

#include <algorithm>

#include "dgl/error.hpp"
#include "dgl/kernel/type_checker.hpp"

namespace dgl {

namespace {

std::vector<Level> param_levels(const std::vector<Name>& uparams) {
  std::vector<Level> out;
  for (auto& u : uparams) out.push_back(Level::param(u));
  return out;
}

Declaration inductive_decl(const InductiveSpec& spec, unsigned num_indices, bool recursive) {
  Declaration d;
  d.kind = DeclKind::Inductive;
  d.name = spec.name;
  d.induct = spec.name;
  d.uparams = spec.uparams;
  d.type = spec.type;
  d.num_params = spec.num_params;
  d.num_indices = num_indices;
  d.is_recursive = recursive;
  for (auto& c : spec.ctors) d.ctors.push_back(c.name);
  return d;
}

// Opens the leading pis of `t` (reducing to expose them) as fvars of the
// given style; `max` bounds the count.
Term open_pis(TypeChecker& tc, Term t, std::vector<Term>& fvars, size_t max,
              std::optional<BinderStyle> style = std::nullopt) {
  size_t n = 0;
  while (n < max) {
    if (!t.is_pi()) {
      Term w = tc.whnf(t);
      if (!w.is_pi()) break;
      t = w;
    }
    fvars.push_back(tc.lctx().add(t.binder_name(), t.binder_type(), style.value_or(t.binder_style())));
    t = instantiate(t.binder_body(), fvars.back());
    ++n;
  }
  return t;
}

class Validator {
 public:
  Validator(TypeChecker& tc, const InductiveSpec& spec, std::vector<Term> params, unsigned num_indices)
      : tc_(tc), spec_(spec), params_(std::move(params)), num_indices_(num_indices) {}

  // Checks `t` is `I params indices` with `I` absent from the indices.
  bool is_valid_ind_app(const Term& t, std::vector<Term>* indices = nullptr) const {
    std::vector<Term> args;
    const Term& fn = get_app_fn_args(t, args);
    if (!fn.is_const() || fn.const_name() != spec_.name) return false;
    if (fn.const_levels() != param_levels(spec_.uparams)) return false;
    if (args.size() != params_.size() + num_indices_) return false;
    for (size_t i = 0; i < params_.size(); ++i)
      if (args[i] != params_[i]) return false;
    for (size_t i = params_.size(); i < args.size(); ++i)
      if (occurs_const(args[i], spec_.name)) return false;
    if (indices) indices->assign(args.begin() + params_.size(), args.end());
    return true;
  }

  // Returns true iff the field is a recursive argument.
  bool check_positivity(const Term& dom, const Name& ctor, size_t field) {
    if (!occurs_const(dom, spec_.name)) return false;
    Term t = tc_.whnf(dom);
    while (t.is_pi()) {
      if (occurs_const(t.binder_type(), spec_.name))
        throw Error(code::kPositivity, "non-positive occurrence of '" + spec_.name.str() + "' in argument #" +
                                           std::to_string(field + 1) + " of constructor '" + ctor.str() +
                                           "': " + tc_.render(dom));
      Term fv = tc_.lctx().add(t.binder_name(), t.binder_type(), t.binder_style());
      t = tc_.whnf(instantiate(t.binder_body(), fv));
    }
    if (!is_valid_ind_app(t))
      throw Error(code::kPositivity, "invalid occurrence of '" + spec_.name.str() + "' in argument #" +
                                         std::to_string(field + 1) + " of constructor '" + ctor.str() +
                                         "': " + tc_.render(dom));
    return true;
  }

 private:
  TypeChecker& tc_;
  const InductiveSpec& spec_;
  std::vector<Term> params_;
  unsigned num_indices_;
};

void check_level_params(const InductiveSpec& spec) {
  for (size_t i = 0; i < spec.uparams.size(); ++i)
    for (size_t j = 0; j < i; ++j)
      if (spec.uparams[i] == spec.uparams[j])
        throw Error(code::kUniverse, "duplicate universe parameter '" + spec.uparams[i].str() + "'");
  auto check = [&](const Term& t) {
    std::vector<Name> used;
    collect_level_params(t, used);
    for (auto& u : used)
      if (std::find(spec.uparams.begin(), spec.uparams.end(), u) == spec.uparams.end())
        throw Error(code::kUniverse, "undeclared universe parameter '" + u.str() + "' in '" + spec.name.str() + "'");
  };
  check(spec.type);
  for (auto& c : spec.ctors) check(c.type);
}

}  // namespace

CheckedInductive validate_inductive(const Environment& env, const InductiveSpec& spec) {
  check_level_params(spec);
  if (spec.type.has_mvar()) throw Error(code::kMetavarInKernel, "inductive type contains metavariables");
  for (size_t i = 0; i < spec.ctors.size(); ++i) {
    if (spec.ctors[i].type.has_mvar())
      throw Error(code::kMetavarInKernel, "constructor type contains metavariables");
    if (spec.ctors[i].name == spec.name || env.contains(spec.ctors[i].name))
      throw Error(code::kDuplicate, "duplicate declaration '" + spec.ctors[i].name.str() + "'");
    for (size_t j = 0; j < i; ++j)
      if (spec.ctors[i].name == spec.ctors[j].name)
        throw Error(code::kDuplicate, "duplicate constructor '" + spec.ctors[i].name.str() + "'");
  }

  CheckedInductive out;
  out.spec = spec;
  {
    TypeChecker tc0(env);
    tc0.ensure_sort(tc0.infer(spec.type));
  }

  // Check constructors against an environment already containing the family.
  std::vector<Term> tele;
  {
    TypeChecker tc0(env);
    Term rest = open_pis(tc0, spec.type, tele, SIZE_MAX);
    Term s = tc0.whnf(rest);
    if (!s.is_sort())
      throw Error(code::kInductive, "the type of '" + spec.name.str() + "' must end in a sort");
    if (tele.size() < spec.num_params)
      throw Error(code::kInductive, "'" + spec.name.str() + "' has fewer binders than parameters");
    out.num_indices = static_cast<unsigned>(tele.size() - spec.num_params);
    out.result_level = s.level();
  }
  Environment env1 = env_add(env, inductive_decl(spec, out.num_indices, false));
  TypeChecker tc(env1);
  std::vector<Term> params;
  open_pis(tc, spec.type, params, spec.num_params);
  Validator v(tc, spec, params, out.num_indices);
  const Level& l = out.result_level;
  const bool prop_result = level_eq(l, Level::zero());

  bool single_ctor_ok = true;
  for (auto& c : spec.ctors) {
    tc.ensure_sort(tc.infer(c.type));
    Term cur = c.type;
    for (unsigned i = 0; i < spec.num_params; ++i) {
      if (!cur.is_pi()) cur = tc.whnf(cur);
      if (!cur.is_pi() || !tc.is_def_eq(cur.binder_type(), tc.lctx().get(params[i].fvar_id()).type))
        throw Error(code::kInductive, "constructor '" + c.name.str() + "' must take the parameters of '" +
                                          spec.name.str() + "' first");
      cur = instantiate(cur.binder_body(), params[i]);
    }
    std::vector<Term> fields;
    std::vector<Name> names;
    while (true) {
      if (!cur.is_pi()) {
        Term w = tc.whnf(cur);
        if (!w.is_pi()) break;
        cur = w;
      }
      const Term& dom = cur.binder_type();
      if (v.check_positivity(dom, c.name, fields.size())) out.is_recursive = true;
      Level fl = tc.sort_level(dom);
      if (!prop_result && !level_leq(fl, l))
        throw Error(code::kUniverse, "argument #" + std::to_string(fields.size() + 1) + " of constructor '" +
                                         c.name.str() + "' lives in universe " + to_string(simplify(fl)) +
                                         ", which is too large for '" + spec.name.str() + "' in " +
                                         to_string(simplify(l)));
      fields.push_back(tc.lctx().add(cur.binder_name(), dom, cur.binder_style()));
      names.push_back(cur.binder_name());
      cur = instantiate(cur.binder_body(), fields.back());
    }
    std::vector<Term> indices;
    if (!v.is_valid_ind_app(cur, &indices))
      throw Error(code::kInductive, "constructor '" + c.name.str() + "' must return '" + spec.name.str() +
                                        "' applied to its parameters, got " + tc.render(cur));
    for (auto& f : fields) {
      bool is_index = std::any_of(indices.begin(), indices.end(), [&](const Term& i) { return i == f; });
      if (!is_index && !tc.is_prop(tc.lctx().get(f.fvar_id()).type)) single_ctor_ok = false;
    }
    out.field_names.push_back(std::move(names));
  }

  if (is_never_zero(l))
    out.elim.large = true;
  else if (spec.ctors.size() > 1)
    out.elim.large = false;
  else
    out.elim.large = spec.ctors.empty() || single_ctor_ok;
  out.elim.subsingleton = out.elim.large && !is_never_zero(l);
  return out;
}

Declaration generate_recursor(const Environment& env, const CheckedInductive& ind) {
  const InductiveSpec& spec = ind.spec;
  TypeChecker tc(env);
  auto& lctx = tc.lctx();
  const unsigned np = spec.num_params;

  Name elim_name("u");
  for (unsigned k = 1; std::find(spec.uparams.begin(), spec.uparams.end(), elim_name) != spec.uparams.end(); ++k)
    elim_name = Name("u_" + std::to_string(k));
  std::vector<Name> rec_uparams = spec.uparams;
  Level elim_level = Level::zero();
  if (ind.elim.large) {
    rec_uparams.insert(rec_uparams.begin(), elim_name);
    elim_level = Level::param(elim_name);
  }
  Term I = Term::constant(spec.name, param_levels(spec.uparams));

  std::vector<Term> ps;
  Term after_params = open_pis(tc, spec.type, ps, np, BinderStyle::Implicit);
  auto open_indices = [&](BinderStyle style) {
    std::vector<Term> is;
    open_pis(tc, after_params, is, ind.num_indices, style);
    return is;
  };

  // motive : Pi indices (t : I ps indices), Sort elim
  std::vector<Term> motive_tele = open_indices(BinderStyle::Explicit);
  {
    std::vector<Term> args = ps;
    args.insert(args.end(), motive_tele.begin(), motive_tele.end());
    motive_tele.push_back(lctx.add("t", mk_app(I, args)));
  }
  Term motive = lctx.add("motive", lctx.mk_pi(motive_tele, Term::sort(elim_level)));

  struct RecField {
    size_t field;
    std::vector<Term> ys;
    std::vector<Term> indices;
  };
  struct CtorInfo {
    std::vector<Term> fields;
    std::vector<RecField> rec_fields;
    std::vector<Term> ihs;
  };
  std::vector<CtorInfo> infos;
  std::vector<Term> minors;

  for (auto& c : spec.ctors) {
    CtorInfo info;
    Term cur = c.type;
    for (unsigned i = 0; i < np; ++i) {
      if (!cur.is_pi()) cur = tc.whnf(cur);
      cur = instantiate(cur.binder_body(), ps[i]);
    }
    cur = open_pis(tc, cur, info.fields, SIZE_MAX, BinderStyle::Explicit);
    std::vector<Term> res_args = get_app_args(cur);
    std::vector<Term> res_indices(res_args.begin() + np, res_args.end());

    for (size_t f = 0; f < info.fields.size(); ++f) {
      const Term& fty = lctx.get(info.fields[f].fvar_id()).type;
      if (!occurs_const(fty, spec.name)) continue;
      RecField rf;
      rf.field = f;
      Term r = open_pis(tc, fty, rf.ys, SIZE_MAX);
      r = tc.whnf(r);
      std::vector<Term> rargs = get_app_args(r);
      rf.indices.assign(rargs.begin() + np, rargs.end());
      std::vector<Term> cargs = rf.indices;
      cargs.push_back(mk_app(info.fields[f], rf.ys));
      Term ih_type = lctx.mk_pi(rf.ys, mk_app(motive, cargs));
      info.ihs.push_back(lctx.add("ih", ih_type));
      info.rec_fields.push_back(std::move(rf));
    }
    std::vector<Term> ctor_args = ps;
    ctor_args.insert(ctor_args.end(), info.fields.begin(), info.fields.end());
    std::vector<Term> margs = res_indices;
    margs.push_back(mk_app(Term::constant(c.name, param_levels(spec.uparams)), ctor_args));
    std::vector<Term> minor_tele = info.fields;
    minor_tele.insert(minor_tele.end(), info.ihs.begin(), info.ihs.end());
    Term minor_type = lctx.mk_pi(minor_tele, mk_app(motive, margs));
    minors.push_back(lctx.add(Name(c.name.last()), minor_type));
    infos.push_back(std::move(info));
  }

  std::vector<Term> is = open_indices(BinderStyle::Implicit);
  std::vector<Term> major_args = ps;
  major_args.insert(major_args.end(), is.begin(), is.end());
  Term major = lctx.add("t", mk_app(I, major_args));

  std::vector<Term> head = ps;
  head.push_back(motive);
  head.insert(head.end(), minors.begin(), minors.end());
  std::vector<Term> rec_tele = head;
  rec_tele.insert(rec_tele.end(), is.begin(), is.end());
  rec_tele.push_back(major);
  std::vector<Term> goal_args = is;
  goal_args.push_back(major);

  Declaration rec;
  rec.kind = DeclKind::Recursor;
  rec.name = spec.name.append(std::string("rec"));
  rec.uparams = rec_uparams;
  rec.type = lctx.mk_pi(rec_tele, mk_app(motive, goal_args));
  rec.induct = spec.name;
  rec.num_params = np;
  rec.num_indices = ind.num_indices;
  rec.num_minors = static_cast<unsigned>(spec.ctors.size());
  rec.large_elim = ind.elim.large;

  Term rec_const = Term::constant(rec.name, param_levels(rec_uparams));
  for (size_t k = 0; k < spec.ctors.size(); ++k) {
    const CtorInfo& info = infos[k];
    std::vector<Term> minor_args = info.fields;
    for (auto& rf : info.rec_fields) {
      std::vector<Term> call = head;
      call.insert(call.end(), rf.indices.begin(), rf.indices.end());
      call.push_back(mk_app(info.fields[rf.field], rf.ys));
      minor_args.push_back(lctx.mk_lambda(rf.ys, mk_app(rec_const, call)));
    }
    std::vector<Term> lam_tele = head;
    lam_tele.insert(lam_tele.end(), info.fields.begin(), info.fields.end());
    RecRule rule;
    rule.ctor = spec.ctors[k].name;
    rule.num_fields = static_cast<unsigned>(info.fields.size());
    rule.rhs = lctx.mk_lambda(lam_tele, mk_app(minors[k], minor_args));
    rec.rules.push_back(std::move(rule));
  }
  return rec;
}

Environment add_inductive(const Environment& env, const InductiveSpec& spec) {
  CheckedInductive ci = validate_inductive(env, spec);
  Environment out = env_add(env, inductive_decl(spec, ci.num_indices, ci.is_recursive));
  for (size_t k = 0; k < spec.ctors.size(); ++k) {
    Declaration c;
    c.kind = DeclKind::Constructor;
    c.name = spec.ctors[k].name;
    c.uparams = spec.uparams;
    c.type = spec.ctors[k].type;
    c.induct = spec.name;
    c.num_params = spec.num_params;
    c.num_indices = ci.num_indices;
    c.ctor_index = static_cast<unsigned>(k);
    c.field_names = ci.field_names[k];
    c.num_fields = static_cast<unsigned>(c.field_names.size());
    out = env_add(out, std::move(c));
  }
  Declaration rec = generate_recursor(out, ci);
  {
    TypeChecker tc(out);
    tc.ensure_sort(tc.infer(rec.type));
  }
  return env_add(out, std::move(rec));
}

}  // namespace dgl
