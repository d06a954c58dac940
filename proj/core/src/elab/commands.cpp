#include <algorithm>

#include "dgl/elab/elaborator.hpp"
#include "dgl/kernel/inductive.hpp"

namespace dgl {

namespace {

using CmdK = SurfaceCommand::Kind;

std::vector<Level> param_levels(const std::vector<Name>& us) {
  std::vector<Level> out;
  for (auto& u : us) out.push_back(Level::param(u));
  return out;
}

// Universe and namespace setup for a declaration header.
void setup(Elaborator& e, const SurfaceCommand& c) {
  if (c.uparams) {
    std::vector<Name> us(c.uparams->begin(), c.uparams->end());
    e.set_level_params(std::move(us), false);
  } else {
    e.set_level_params({}, true);
  }
  e.set_decl_namespace(Name(c.name).prefix());
}

// Keeps only the universe parameters that occur, in declaration order.
std::vector<Name> used_params(const std::vector<Name>& declared, std::initializer_list<Term> terms, bool explicit_list) {
  if (explicit_list) return declared;
  std::vector<Name> used;
  for (auto& t : terms)
    if (t) collect_level_params(t, used);
  std::vector<Name> out;
  for (auto& u : declared)
    if (std::find(used.begin(), used.end(), u) != used.end()) out.push_back(u);
  return out;
}

Name class_of_conclusion(TypeChecker& tc, Term ty) {
  std::vector<Term> fvars;
  while (true) {
    if (!ty.is_pi()) {
      Term w = tc.whnf(ty);
      if (!w.is_pi()) break;
      ty = w;
    }
    fvars.push_back(tc.lctx().add(ty.binder_name(), ty.binder_type(), ty.binder_style()));
    ty = instantiate(ty.binder_body(), fvars.back());
  }
  const Term& h = get_app_fn(ty);
  return h.is_const() ? h.const_name() : Name();
}

void add_checked(ElabState& st, Declaration d, const ElabOptions& opts, std::vector<Name>& added) {
  Name n = d.name;
  st.env = env_add(st.env, check_decl(st.env, std::move(d), opts.flags));
  added.push_back(n);
}

std::vector<Name> elab_def(ElabState& st, const SurfaceCommand& c, const ElabScope& scope, const ElabOptions& opts) {
  Elaborator e(st.env, st.instances, scope, opts);
  setup(e, c);
  SourcePos pos = c.span.begin;
  std::vector<Term> params = e.elab_binders(c.binders);
  std::optional<Term> type;
  if (c.type) type = e.elab_type(*c.type);
  Term value;
  if (c.kind != CmdK::Axiom) {
    value = e.elab(*c.value, type);
    if (!type) type = e.infer(value);
  }
  e.synthesize_pending(true);
  Term full_type = e.finalize(e.close(true, params, *type), pos);
  Term full_value;
  if (value) full_value = e.finalize(e.close(false, params, value), pos);

  std::vector<Name> us = used_params(e.level_params(), {full_type, full_value}, c.uparams.has_value());
  Name name(c.name);
  Declaration d = c.kind == CmdK::Axiom ? Declaration::axiom(name, us, full_type)
                                        : Declaration::definition(name, us, full_type, full_value);
  std::vector<Name> added;
  if (c.kind == CmdK::Instance) {
    TypeChecker tc(st.env);
    Name cls = class_of_conclusion(tc, full_type);
    if (cls.is_anonymous() || !st.instances.is_class(cls))
      throw Error(code::kInstance, "instance '" + c.name + "' does not conclude in a class", pos);
    add_checked(st, std::move(d), opts, added);
    st.instances.add_instance(cls, name);
    return added;
  }
  add_checked(st, std::move(d), opts, added);
  return added;
}

std::vector<Name> elab_inductive(ElabState& st, const SurfaceCommand& c, const ElabScope& scope,
                                 const ElabOptions& opts) {
  Elaborator e(st.env, st.instances, scope, opts);
  setup(e, c);
  SourcePos pos = c.span.begin;
  Name name(c.name);
  std::vector<Term> params = e.elab_binders(c.binders);
  Term type = c.type ? e.elab_type(*c.type) : Term::sort(Level::of_nat(1));
  e.synthesize_pending(true);
  Term ind_type = e.finalize(e.close(true, params, type), pos);
  // The family itself, as a local, while the constructors elaborate.
  Term self = e.push_local(name, ind_type);

  struct RawCtor {
    Name name;
    Term type;
    SourcePos pos;
  };
  std::vector<RawCtor> raw;
  for (auto& sc : c.ctors) {
    SourcePos cpos = sc.span.begin;
    try {
      std::vector<Term> fields = e.elab_binders(sc.binders);
      Term result = sc.type ? e.elab_type(*sc.type) : mk_app(self, params);
      e.synthesize_pending(true);
      Term t = e.close(true, fields, result);
      e.pop_locals(fields.size());
      t = e.finalize(e.close(true, params, t), cpos);
      raw.push_back({name.append(sc.name), t, cpos});
    } catch (Error& err) {
      err.set_pos_if_missing(cpos);
      throw;
    }
  }
  std::vector<Term> all{ind_type};
  for (auto& r : raw) all.push_back(r.type);
  std::vector<Name> used;
  for (auto& t : all) collect_level_params(t, used);
  std::vector<Name> us;
  if (c.uparams) {
    us = e.level_params();
  } else {
    for (auto& u : e.level_params())
      if (std::find(used.begin(), used.end(), u) != used.end()) us.push_back(u);
  }

  Term self_const = Term::constant(name, param_levels(us));
  InductiveSpec spec;
  spec.name = name;
  spec.uparams = us;
  spec.num_params = static_cast<unsigned>(params.size());
  spec.type = ind_type;
  for (auto& r : raw) {
    Term t = replace(r.type, [&](const Term& s, uint32_t) -> std::optional<Term> {
      if (s.is_fvar() && s.fvar_id() == self.fvar_id()) return self_const;
      if (!s.has_fvar()) return s;
      return std::nullopt;
    });
    if (t.has_fvar()) throw Error(code::kInductive, "constructor '" + r.name.str() + "' mentions a local", r.pos);
    spec.ctors.push_back({r.name, t});
  }
  st.env = add_inductive(st.env, spec);
  std::vector<Name> added{name};
  for (auto& ctor : spec.ctors) added.push_back(ctor.name);
  added.push_back(name.append(std::string("rec")));
  return added;
}

// Structure parameters are implicit in constructors and projections, except
// that instance parameters stay instance-implicit.
BinderStyle param_style(BinderStyle s) {
  return s == BinderStyle::InstImplicit ? s : BinderStyle::Implicit;
}

// Projections `S.f := fun params self => S.rec params motive (fun fields => f) self`.
void add_projections(ElabState& st, const Name& sname, bool is_class, const ElabOptions& opts,
                     std::vector<Name>& added) {
  const Declaration& ind = st.env.get(sname);
  const Declaration& ctor = st.env.get(ind.ctors[0]);
  const Declaration& rec = st.env.get(sname.append(std::string("rec")));
  TypeChecker tc(st.env, opts.flags);
  auto& lctx = tc.lctx();
  std::vector<Level> ulv = param_levels(ind.uparams);

  std::vector<Term> ps;
  Term ity = ind.type;
  for (unsigned i = 0; i < ind.num_params; ++i) {
    ps.push_back(lctx.add(ity.binder_name(), ity.binder_type(), param_style(ity.binder_style())));
    ity = instantiate(ity.binder_body(), ps.back());
  }
  Term s_app = mk_app(Term::constant(sname, ulv), ps);
  Term self = lctx.add("self", s_app, is_class ? BinderStyle::InstImplicit : BinderStyle::Explicit);

  // Field types with earlier fields replaced by `proj` applied to `x`.
  auto field_type = [&](unsigned i, const Term& x) {
    Term ct = instantiate_levels(ctor.type, ctor.uparams, ulv);
    for (unsigned k = 0; k < ind.num_params; ++k) ct = instantiate(ct.binder_body(), ps[k]);
    for (unsigned j = 0; j < i; ++j) {
      std::vector<Term> args(ps);
      args.push_back(x);
      Term pj = mk_app(Term::constant(sname.append(ctor.field_names[j]), ulv), args);
      ct = instantiate(ct.binder_body(), pj);
    }
    return ct.binder_type();
  };

  for (unsigned i = 0; i < ctor.num_fields; ++i) {
    Name pname = sname.append(ctor.field_names[i]);
    Term t_var = lctx.add("x", s_app);
    Term motive_body = field_type(i, t_var);
    Level lvl = tc.sort_level(motive_body);
    if (!rec.large_elim && !level_eq(lvl, Level::zero()))
      throw Error(code::kStructure, "field '" + ctor.field_names[i].str() + "' of Prop-valued '" + sname.str() +
                                        "' is not a proof and cannot be projected");
    std::vector<Level> rlv = ulv;
    if (rec.large_elim) rlv.insert(rlv.begin(), lvl);
    Term motive = lctx.mk_lambda(std::span<const Term>(&t_var, 1), motive_body);

    // minor premise: fun fields => field_i
    Term ct = instantiate_levels(ctor.type, ctor.uparams, ulv);
    for (unsigned k = 0; k < ind.num_params; ++k) ct = instantiate(ct.binder_body(), ps[k]);
    std::vector<Term> fs;
    for (unsigned j = 0; j < ctor.num_fields; ++j) {
      fs.push_back(lctx.add(ct.binder_name(), ct.binder_type(), BinderStyle::Explicit));
      ct = instantiate(ct.binder_body(), fs.back());
    }
    Term minor = lctx.mk_lambda(fs, fs[i]);

    std::vector<Term> rargs(ps);
    rargs.push_back(motive);
    rargs.push_back(minor);
    rargs.push_back(self);
    Term body = mk_app(Term::constant(rec.name, rlv), rargs);
    std::vector<Term> tele(ps);
    tele.push_back(self);
    Term value = lctx.mk_lambda(tele, body);
    Term type = lctx.mk_pi(tele, field_type(i, self));
    add_checked(st, Declaration::definition(pname, ind.uparams, type, value), opts, added);
  }
}

// `S.g := fun params self => P.g pargs (S.to_P params self)` for each field
// `g` reachable on the parent.
void add_forwarding(ElabState& st, const Name& sname, const Name& pname, bool is_class, const ElabOptions& opts,
                    std::vector<Name>& added, std::vector<std::string>& reachable) {
  const Declaration& ind = st.env.get(sname);
  const Declaration& ctor = st.env.get(ind.ctors[0]);
  TypeChecker tc(st.env, opts.flags);
  auto& lctx = tc.lctx();
  std::vector<Level> ulv = param_levels(ind.uparams);
  std::vector<Term> ps;
  Term ity = ind.type;
  for (unsigned i = 0; i < ind.num_params; ++i) {
    ps.push_back(lctx.add(ity.binder_name(), ity.binder_type(), param_style(ity.binder_style())));
    ity = instantiate(ity.binder_body(), ps.back());
  }
  Term s_app = mk_app(Term::constant(sname, ulv), ps);
  Term self = lctx.add("self", s_app, is_class ? BinderStyle::InstImplicit : BinderStyle::Explicit);
  std::vector<Term> pargs(ps);
  pargs.push_back(self);
  Term to_parent = mk_app(Term::constant(sname.append(ctor.field_names[0]), ulv), pargs);
  Term parent_type = tc.whnf(tc.infer(to_parent));
  std::vector<Term> pa;
  const Term& phead = get_app_fn_args(parent_type, pa);

  auto it = st.structure_fields.find(pname);
  if (it == st.structure_fields.end()) return;
  std::vector<Term> tele(ps);
  tele.push_back(self);
  for (const std::string& g : it->second) {
    Name target = sname.append(g);
    if (st.env.contains(target)) continue;
    std::vector<Term> args(pa);
    args.push_back(to_parent);
    Term body = mk_app(Term::constant(pname.append(g), phead.const_levels()), args);
    Term type = tc.infer(body);
    add_checked(st, Declaration::definition(target, ind.uparams, lctx.mk_pi(tele, type), lctx.mk_lambda(tele, body)),
                opts, added);
    reachable.push_back(g);
  }
}

}  // namespace

std::vector<Declaration> elaborate_structure(ElabState& st, const SurfaceCommand& c, const ElabScope& scope,
                                             ElabOptions opts) {
  const bool is_class = c.kind == CmdK::Class;
  Elaborator e(st.env, st.instances, scope, opts);
  setup(e, c);
  SourcePos pos = c.span.begin;
  Name sname(c.name);
  std::vector<Term> params = e.elab_binders(c.binders);

  // Field locals in order; `fields` holds the constructor binders, `aliases`
  // the parent fields reachable by name, substituted away before closing.
  std::vector<Term> fields;
  std::vector<Term> aliases;
  std::vector<std::string> field_names;
  Name parent;
  if (c.extends) {
    Term pty = e.elab_type(*c.extends);
    e.synthesize_pending(true);
    pty = e.finalize(pty, c.extends->span.begin);
    Term w = e.tc().whnf(pty);
    std::vector<Term> pa;
    const Term& ph = get_app_fn_args(w, pa);
    if (!ph.is_const() || !st.structure_fields.count(ph.const_name()))
      throw Error(code::kStructure, "'" + e.tc().render(pty) + "' is not a structure", c.extends->span.begin);
    parent = ph.const_name();
    std::string fname = "to_" + parent.last();
    Term to_p = e.push_local(Name(fname), pty);
    fields.push_back(to_p);
    field_names.push_back(fname);
    for (const std::string& g : st.structure_fields.at(parent)) {
      std::vector<Term> args(pa);
      args.push_back(to_p);
      Term v = mk_app(Term::constant(parent.append(g), ph.const_levels()), args);
      aliases.push_back(e.push_local(Name(g), e.infer(v), BinderStyle::Explicit, v));
    }
  }
  auto zeta_aliases = [&](const Term& t) {
    if (aliases.empty()) return t;
    return replace(t, [&](const Term& s, uint32_t) -> std::optional<Term> {
      if (!s.has_fvar()) return s;
      if (s.is_fvar())
        for (auto& a : aliases)
          if (a.fvar_id() == s.fvar_id()) return *e.tc().lctx().get(a.fvar_id()).value;
      return std::nullopt;
    });
  };

  std::vector<Level> field_levels;
  for (auto& sf : c.fields) {
    if (std::find(field_names.begin(), field_names.end(), sf.name) != field_names.end())
      throw Error(code::kStructure, "duplicate field '" + sf.name + "'", sf.span.begin);
    try {
      std::vector<Term> bs = e.elab_binders(sf.binders);
      Term ft = e.elab_type(*sf.type);
      e.synthesize_pending(true);
      ft = e.close(true, bs, ft);
      e.pop_locals(bs.size());
      ft = zeta_aliases(e.finalize(ft, sf.span.begin));
      fields.push_back(e.push_local(Name(sf.name), ft));
      field_names.push_back(sf.name);
    } catch (Error& err) {
      err.set_pos_if_missing(sf.span.begin);
      throw;
    }
  }
  for (auto& f : fields) field_levels.push_back(e.tc().sort_level(e.tc().lctx().get(f.fvar_id()).type));

  Term result;
  if (c.type) {
    result = e.finalize(e.elab_type(*c.type), c.type->span.begin);
    if (!e.tc().whnf(result).is_sort())
      throw Error(code::kStructure, "structure type must be a sort", c.type->span.begin);
  } else {
    Level l = Level::of_nat(1);
    for (auto& fl : field_levels) l = Level::max(l, fl);
    result = Term::sort(simplify(l));
  }
  Term ind_type = e.finalize(e.close(true, params, result), pos);

  // Constructor: `{params} (fields) -> S params`. `S` stays a local until the
  // universe parameters are known.
  Term self = e.push_local(sname, ind_type);
  Term ctor_t = e.close(true, fields, mk_app(self, params));
  ctor_t = e.finalize(e.close(true, params, ctor_t, BinderStyle::Implicit), pos);
  std::vector<Name> used;
  collect_level_params(ind_type, used);
  collect_level_params(ctor_t, used);
  std::vector<Name> us;
  if (c.uparams) {
    us = e.level_params();
  } else {
    for (auto& u : e.level_params())
      if (std::find(used.begin(), used.end(), u) != used.end()) us.push_back(u);
  }
  Term self_const = Term::constant(sname, param_levels(us));
  ctor_t = replace(ctor_t, [&](const Term& s, uint32_t) -> std::optional<Term> {
    if (s.is_fvar() && s.fvar_id() == self.fvar_id()) return self_const;
    if (!s.has_fvar()) return s;
    return std::nullopt;
  });

  InductiveSpec spec;
  spec.name = sname;
  spec.uparams = us;
  spec.num_params = static_cast<unsigned>(params.size());
  spec.type = ind_type;
  spec.ctors.push_back({sname.append(c.ctor_name), ctor_t});
  ElabState next = st;
  next.env = add_inductive(next.env, spec);
  if (is_class) next.instances.add_class(sname);

  std::vector<Name> added{sname, spec.ctors[0].name, sname.append(std::string("rec"))};
  add_projections(next, sname, is_class, opts, added);
  std::vector<std::string> reachable = field_names;
  next.structure_fields[sname] = reachable;
  if (!parent.is_anonymous()) {
    add_forwarding(next, sname, parent, is_class, opts, added, reachable);
    next.structure_fields[sname] = reachable;
    if (is_class && next.instances.is_class(parent))
      next.instances.add_instance(parent, sname.append(field_names[0]));
  }
  st = std::move(next);
  std::vector<Declaration> out;
  for (auto& n : added) out.push_back(st.env.get(n));
  return out;
}

std::vector<Name> elaborate_command(ElabState& st, const SurfaceCommand& c, const ElabScope& scope, ElabOptions opts) {
  switch (c.kind) {
    case CmdK::Def:
    case CmdK::Axiom:
    case CmdK::Instance:
      return elab_def(st, c, scope, opts);
    case CmdK::Inductive:
      return elab_inductive(st, c, scope, opts);
    case CmdK::Structure:
    case CmdK::Class: {
      std::vector<Name> out;
      for (auto& d : elaborate_structure(st, c, scope, opts)) out.push_back(d.name);
      return out;
    }
    default:
      throw Error(code::kParse, "'" + to_string(c.kind) + "' is not a declaration", c.span.begin);
  }
}

}  // namespace dgl
