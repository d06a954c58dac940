#include "dgl/kernel/type_checker.hpp"

#include <algorithm>

#include "dgl/error.hpp"
#include "dgl/syntax/render.hpp"

namespace dgl {

namespace {

struct DepthGuard {
  explicit DepthGuard(unsigned& d) : d_(d) { ++d_; }
  ~DepthGuard() { --d_; }
  unsigned& d_;
};

std::string quote(const std::string& s) { return "`" + s + "`"; }

}  // namespace

TypeChecker::TypeChecker(Environment env, ConversionFlags flags, const MetaHooks* hooks)
    : env_(std::move(env)), flags_(flags), hooks_(hooks) {}

std::string TypeChecker::render(const Term& t) const {
  RenderOptions opts;
  opts.env = &env_;
  opts.fvars = &lctx_;
  return dgl::render(instantiate_mvars(t), {}, opts);
}

// --- metavariable instantiation ----------------------------------------------

Level TypeChecker::instantiate_level_mvars(const Level& l) const {
  if (!hooks_ || !l.has_mvar()) return l;
  return replace_level(l, [&](const Level& x) -> std::optional<Level> {
    if (x.kind() != LevelKind::MVar) return std::nullopt;
    if (auto a = hooks_->level_assignment(x.mvar_id())) return instantiate_level_mvars(*a);
    return x;
  });
}

Term TypeChecker::instantiate_mvars(const Term& t) const {
  if (!hooks_ || !t.has_mvar()) return t;
  return replace(t, [&](const Term& s, uint32_t) -> std::optional<Term> {
    if (!s.has_mvar()) return s;
    switch (s.kind()) {
      case TermKind::MVar:
        if (auto a = hooks_->assignment(s.mvar_id())) return instantiate_mvars(*a);
        return s;
      case TermKind::Sort:
        return Term::sort(instantiate_level_mvars(s.level()));
      case TermKind::Const: {
        std::vector<Level> ls;
        for (auto& l : s.const_levels()) ls.push_back(instantiate_level_mvars(l));
        return Term::constant(s.const_name(), std::move(ls));
      }
      default:
        return std::nullopt;
    }
  });
}

// --- reduction ---------------------------------------------------------------

Term TypeChecker::whnf_core(const Term& t) {
  switch (t.kind()) {
    case TermKind::BVar:
    case TermKind::Sort:
    case TermKind::Const:
    case TermKind::Lam:
    case TermKind::Pi:
      return t;
    case TermKind::FVar: {
      auto* d = lctx_.find(t.fvar_id());
      if (d && d->value) return whnf_core(*d->value);
      return t;
    }
    case TermKind::MVar:
      if (hooks_)
        if (auto a = hooks_->assignment(t.mvar_id())) return whnf_core(*a);
      return t;
    default:
      break;
  }
  const bool cacheable = !t.has_mvar();
  if (cacheable) {
    auto it = whnf_core_cache_.find(t);
    if (it != whnf_core_cache_.end()) return it->second;
  }
  Term r = whnf_core_impl(t);
  if (cacheable) whnf_core_cache_.emplace(t, r);
  return r;
}

Term TypeChecker::whnf_core_impl(const Term& t) {
  if (t.is_let()) return whnf_core(instantiate(t.let_body(), t.let_value()));
  std::vector<Term> args;
  Term f0 = get_app_fn_args(t, args);
  Term f = whnf_core(f0);
  if (f.is_lam()) {
    size_t i = 0;
    Term body = f;
    while (body.is_lam() && i < args.size()) {
      body = body.binder_body();
      ++i;
    }
    Term r = instantiate_rev(body, std::span<const Term>(args.data(), i));
    r = mk_app(r, std::span<const Term>(args.data() + i, args.size() - i));
    return whnf_core(r);
  }
  if (f.ptr() != f0.ptr()) return whnf_core(mk_app(f, args));
  if (f.is_const())
    if (auto r = iota_step(t)) return whnf_core(*r);
  return t;
}

std::optional<Term> TypeChecker::iota_step(const Term& t) {
  std::vector<Term> args;
  const Term& fn = get_app_fn_args(t, args);
  if (!fn.is_const()) return std::nullopt;
  const Declaration* rec = env_.find(fn.const_name());
  if (!rec || !rec->is_recursor()) return std::nullopt;
  const unsigned major_idx = rec->major_index();
  if (args.size() <= major_idx) return std::nullopt;
  if (fn.const_levels().size() != rec->uparams.size()) return std::nullopt;
  Term major = whnf(args[major_idx]);
  std::vector<Term> margs;
  const Term& mfn = get_app_fn_args(major, margs);
  if (!mfn.is_const()) return std::nullopt;
  const Declaration* ctor = env_.find(mfn.const_name());
  if (!ctor || !ctor->is_constructor() || ctor->induct != rec->induct) return std::nullopt;
  const RecRule* rule = rec->rule_for(ctor->name);
  if (!rule || margs.size() != rec->num_params + rule->num_fields) return std::nullopt;
  Term rhs = instantiate_levels(rule->rhs, rec->uparams, fn.const_levels());
  std::vector<Term> rargs(args.begin(), args.begin() + rec->num_params + 1 + rec->num_minors);
  rargs.insert(rargs.end(), margs.begin() + rec->num_params, margs.end());
  rargs.insert(rargs.end(), args.begin() + major_idx + 1, args.end());
  return mk_app(rhs, rargs);
}

const Declaration* TypeChecker::unfoldable_head(const Term& t) const {
  const Term& fn = get_app_fn(t);
  if (!fn.is_const()) return nullptr;
  const Declaration* d = env_.find(fn.const_name());
  if (!d || !d->is_definition() || d->uparams.size() != fn.const_levels().size()) return nullptr;
  return d;
}

std::optional<Term> TypeChecker::unfold_definition(const Term& t) {
  const Declaration* d = unfoldable_head(t);
  if (!d) return std::nullopt;
  std::vector<Term> args;
  const Term& fn = get_app_fn_args(t, args);
  Term v = instantiate_levels(d->value, d->uparams, fn.const_levels());
  return mk_app(v, args);
}

Term TypeChecker::whnf(const Term& t, const UnfoldPolicy& policy) {
  const bool cacheable = policy.kind() == UnfoldPolicy::Kind::All && !t.has_mvar();
  if (cacheable) {
    auto it = whnf_cache_.find(t);
    if (it != whnf_cache_.end()) return it->second;
  }
  Term cur = t;
  while (true) {
    cur = whnf_core(cur);
    const Declaration* d = unfoldable_head(cur);
    if (!d || !policy.allows(d->name)) break;
    cur = *unfold_definition(cur);
  }
  if (cacheable) whnf_cache_.emplace(t, cur);
  return cur;
}

// --- inference ---------------------------------------------------------------

Term TypeChecker::ensure_sort(const Term& type) {
  if (type.is_sort()) return type;
  Term w = whnf(type);
  if (w.is_sort()) return w;
  throw Error(code::kTypeExpected, "type expected, but " + quote(render(type)) + " is not a sort");
}

Term TypeChecker::ensure_pi(const Term& type) {
  if (type.is_pi()) return type;
  Term w = whnf(type);
  if (w.is_pi()) return w;
  throw Error(code::kNotFunction, "function expected, but the type " + quote(render(type)) +
                                      " is not a pi type");
}

Level TypeChecker::sort_level(const Term& type) {
  return ensure_sort(infer(type, true)).level();
}

bool TypeChecker::is_prop(const Term& type) {
  Term s = whnf(infer(type, true));
  return s.is_sort() && def_eq_level(s.level(), Level::zero());
}

bool TypeChecker::is_proof(const Term& t) { return is_prop(infer(t, true)); }

Term TypeChecker::infer(const Term& t, bool infer_only) {
  const bool cacheable = !t.has_mvar();
  auto& cache = infer_cache_[infer_only ? 1 : 0];
  if (cacheable) {
    auto it = cache.find(t);
    if (it != cache.end()) return it->second;
  }
  Term r = infer_core(t, infer_only);
  if (cacheable) cache.emplace(t, r);
  return r;
}

Term TypeChecker::infer_core(const Term& t, bool infer_only) {
  switch (t.kind()) {
    case TermKind::BVar:
      throw Error(code::kUnboundVar, "unbound variable #" + std::to_string(t.bvar_index()));
    case TermKind::FVar: {
      auto* d = lctx_.find(t.fvar_id());
      if (!d) throw Error(code::kUnboundVar, "unknown free variable");
      return d->type;
    }
    case TermKind::MVar:
      if (hooks_)
        if (auto ty = hooks_->mvar_type(t.mvar_id())) return *ty;
      throw Error(code::kMetavarInKernel, "metavariable reached the kernel");
    case TermKind::Sort:
      if (!hooks_ && t.level().has_mvar())
        throw Error(code::kMetavarInKernel, "universe metavariable reached the kernel");
      return Term::sort(Level::succ(t.level()));
    case TermKind::Const:
      return infer_const(t, infer_only);
    case TermKind::App:
      return infer_app(t, infer_only);
    case TermKind::Lam:
    case TermKind::Pi:
      return infer_binding(t, infer_only);
    case TermKind::Let:
      return infer_let(t, infer_only);
  }
  return t;
}

Term TypeChecker::infer_const(const Term& t, bool) {
  const Declaration& d = env_.get(t.const_name());
  if (d.uparams.size() != t.const_levels().size())
    throw Error(code::kLevelArity, "constant '" + d.name.str() + "' expects " +
                                       std::to_string(d.uparams.size()) + " universe argument(s), got " +
                                       std::to_string(t.const_levels().size()));
  if (!hooks_)
    for (auto& l : t.const_levels())
      if (l.has_mvar()) throw Error(code::kMetavarInKernel, "universe metavariable reached the kernel");
  return instantiate_levels(d.type, d.uparams, t.const_levels());
}

Term TypeChecker::infer_app(const Term& t, bool infer_only) {
  std::vector<Term> args;
  Term fn = get_app_fn_args(t, args);
  Term ft = infer(fn, infer_only);
  size_t j = 0;
  size_t i = 0;
  while (i < args.size()) {
    if (ft.is_pi()) {
      if (!infer_only) {
        Term dom = instantiate_rev(ft.binder_type(), std::span<const Term>(args.data() + j, i - j));
        Term at = infer(args[i], false);
        if (!is_def_eq(at, dom)) {
          Term partial = mk_app(fn, std::span<const Term>(args.data(), i));
          throw Error(code::kTypeMismatch,
                      "application type mismatch: argument " + quote(render(args[i])) + " has type " +
                          quote(render(at)) + " but " + quote(render(partial)) + " expects an argument of type " +
                          quote(render(dom)),
                      {}, {render(at), render(dom)});
        }
      }
      ft = ft.binder_body();
      ++i;
    } else {
      ft = instantiate_rev(ft, std::span<const Term>(args.data() + j, i - j));
      j = i;
      Term w = whnf(ft);
      if (!w.is_pi()) {
        Term partial = mk_app(fn, std::span<const Term>(args.data(), i));
        throw Error(code::kNotFunction, "function expected: " + quote(render(partial)) + " has type " +
                                            quote(render(ft)) + ", which is not a pi type");
      }
      ft = w;
    }
  }
  return instantiate_rev(ft, std::span<const Term>(args.data() + j, args.size() - j));
}

Term TypeChecker::infer_binding(const Term& t, bool infer_only) {
  std::vector<Term> fvars;
  std::vector<Term> doms;
  Term cur = t;
  if (t.is_pi()) {
    std::vector<Level> levels;
    while (cur.is_pi()) {
      Term dom = instantiate_rev(cur.binder_type(), fvars);
      levels.push_back(ensure_sort(infer(dom, infer_only)).level());
      fvars.push_back(lctx_.add(cur.binder_name(), dom, cur.binder_style()));
      cur = cur.binder_body();
    }
    Term body = instantiate_rev(cur, fvars);
    Level r = ensure_sort(infer(body, infer_only)).level();
    for (size_t k = levels.size(); k-- > 0;) r = Level::imax(levels[k], r);
    return Term::sort(simplify(r));
  }
  while (cur.is_lam()) {
    Term dom = instantiate_rev(cur.binder_type(), fvars);
    if (!infer_only) ensure_sort(infer(dom, false));
    doms.push_back(dom);
    fvars.push_back(lctx_.add(cur.binder_name(), dom, cur.binder_style()));
    cur = cur.binder_body();
  }
  Term body_type = infer(instantiate_rev(cur, fvars), infer_only);
  Term r = abstract(body_type, fvars);
  std::vector<std::pair<Name, BinderStyle>> meta;
  for (Term c = t; c.is_lam(); c = c.binder_body()) meta.emplace_back(c.binder_name(), c.binder_style());
  for (size_t k = fvars.size(); k-- > 0;) {
    Term dom = abstract(doms[k], std::span<const Term>(fvars.data(), k));
    r = Term::pi(meta[k].first, meta[k].second, dom, r);
  }
  return r;
}

Term TypeChecker::infer_let(const Term& t, bool infer_only) {
  if (!infer_only) {
    ensure_sort(infer(t.let_type(), false));
    check(t.let_value(), t.let_type());
  }
  Term fv = lctx_.add(t.binder_name(), t.let_type(), BinderStyle::Explicit, t.let_value());
  Term bt = infer(instantiate(t.let_body(), fv), infer_only);
  return instantiate(abstract(bt, std::span<const Term>(&fv, 1)), t.let_value());
}

void TypeChecker::check(const Term& t, const Term& expected) {
  Term ty = infer(t, false);
  if (!is_def_eq(ty, expected))
    throw Error(code::kTypeMismatch,
                "type mismatch: " + quote(render(t)) + " has type " + quote(render(ty)) +
                    " but is expected to have type " + quote(render(expected)),
                {}, {render(ty), render(expected)});
}

// --- definitional equality ---------------------------------------------------

bool TypeChecker::def_eq_level(const Level& a, const Level& b) const {
  return level_eq(instantiate_level_mvars(a), instantiate_level_mvars(b));
}

bool TypeChecker::def_eq_levels(const std::vector<Level>& a, const std::vector<Level>& b) const {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!def_eq_level(a[i], b[i])) return false;
  return true;
}

bool TypeChecker::is_def_eq(const Term& t, const Term& s) {
  const bool top = def_eq_depth_ == 0;
  if (top && trace_) trace("[defeq] " + render(t) + " =?= " + render(s));
  bool r;
  {
    DepthGuard g(def_eq_depth_);
    r = def_eq_core(t, s);
  }
  if (top && trace_) trace(std::string("[defeq] result ") + (r ? "true" : "false"));
  return r;
}

std::optional<bool> TypeChecker::quick_def_eq(const Term& t, const Term& s) {
  if (t.ptr() == s.ptr()) return true;
  if (t.hash() == s.hash() && t == s) return true;
  if (t.kind() == s.kind()) {
    switch (t.kind()) {
      case TermKind::Sort:
        return def_eq_level(t.level(), s.level());
      case TermKind::Lam:
      case TermKind::Pi:
        return def_eq_binding(t, s);
      default:
        break;
    }
  }
  return std::nullopt;
}

bool TypeChecker::def_eq_binding(const Term& t, const Term& s) {
  std::vector<Term> fvars;
  Term a = t;
  Term b = s;
  while (a.kind() == t.kind() && b.kind() == t.kind()) {
    Term da = instantiate_rev(a.binder_type(), fvars);
    if (a.binder_type() != b.binder_type()) {
      Term db = instantiate_rev(b.binder_type(), fvars);
      if (!def_eq_core(da, db)) return false;
    }
    fvars.push_back(lctx_.add(a.binder_name(), da, a.binder_style()));
    a = a.binder_body();
    b = b.binder_body();
  }
  return def_eq_core(instantiate_rev(a, fvars), instantiate_rev(b, fvars));
}

bool TypeChecker::def_eq_args(const Term& t, const Term& s) {
  Term a = t;
  Term b = s;
  while (a.is_app() && b.is_app()) {
    if (!def_eq_core(a.app_arg(), b.app_arg())) return false;
    a = a.app_fn();
    b = b.app_fn();
  }
  return !a.is_app() && !b.is_app();
}

bool TypeChecker::proof_irrel_eq(const Term& t, const Term& s, bool& decided) {
  decided = false;
  if (!flags_.proof_irrelevance) return false;
  if (t.is_sort() || t.is_pi() || s.is_sort() || s.is_pi()) return false;
  try {
    Term tt = infer(t, true);
    if (!is_prop(tt)) return false;
    Term st = infer(s, true);
    decided = true;
    return def_eq_core(tt, st);
  } catch (const Error&) {
    decided = false;
    return false;
  }
}

std::optional<bool> TypeChecker::lazy_delta(Term& t, Term& s) {
  while (true) {
    const Declaration* dt = unfoldable_head(t);
    const Declaration* ds = unfoldable_head(s);
    if (!dt && !ds) return std::nullopt;
    bool unfold_t = false;
    bool unfold_s = false;
    if (dt && !ds) {
      unfold_t = true;
    } else if (!dt && ds) {
      unfold_s = true;
    } else if (dt->height > ds->height) {
      unfold_t = true;
    } else if (ds->height > dt->height) {
      unfold_s = true;
    } else {
      if (dt == ds && t.is_app() == s.is_app() &&
          get_app_num_args(t) == get_app_num_args(s) &&
          def_eq_levels(get_app_fn(t).const_levels(), get_app_fn(s).const_levels()) && def_eq_args(t, s))
        return true;
      unfold_t = unfold_s = true;
    }
    if (unfold_t) {
      trace("[defeq] unfold " + dt->name.str() + " (height " + std::to_string(dt->height) + ")");
      t = whnf_core(*unfold_definition(t));
    }
    if (unfold_s) {
      trace("[defeq] unfold " + ds->name.str() + " (height " + std::to_string(ds->height) + ")");
      s = whnf_core(*unfold_definition(s));
    }
    if (auto q = quick_def_eq(t, s)) return q;
  }
}

bool TypeChecker::try_function_eta(const Term& t, const Term& s) {
  if (!flags_.function_eta || !t.is_lam() || s.is_lam()) return false;
  Term st;
  try {
    st = whnf(infer(s, true));
  } catch (const Error&) {
    return false;
  }
  if (!st.is_pi()) return false;
  Term expanded = Term::lam(st.binder_name(), st.binder_style(), st.binder_type(),
                            Term::app(s, Term::bvar(0)));
  return def_eq_core(t, expanded);
}

bool TypeChecker::try_structure_eta(const Term& t, const Term& s) {
  std::vector<Term> args;
  const Term& fn = get_app_fn_args(s, args);
  if (!fn.is_const()) return false;
  const Declaration* ctor = env_.find(fn.const_name());
  if (!ctor || !ctor->is_constructor()) return false;
  const Declaration* ind = env_.find(ctor->induct);
  if (!ind || ind->ctors.size() != 1 || ind->num_indices != 0 || ind->is_recursive) return false;
  if (args.size() != ctor->num_params + ctor->num_fields) return false;
  try {
    if (!def_eq_core(infer(t, true), infer(s, true))) return false;
  } catch (const Error&) {
    return false;
  }
  for (unsigned i = 0; i < ctor->num_fields; ++i) {
    Name proj = ind->name.append(ctor->field_names[i]);
    const Declaration* pd = env_.find(proj);
    if (!pd || !pd->is_definition() || pd->uparams.size() != fn.const_levels().size()) return false;
    std::vector<Term> pargs(args.begin(), args.begin() + ctor->num_params);
    pargs.push_back(t);
    if (!def_eq_core(mk_app(Term::constant(proj, fn.const_levels()), pargs), args[ctor->num_params + i]))
      return false;
  }
  return true;
}

bool TypeChecker::def_eq_core(const Term& t, const Term& s) {
  if (auto q = quick_def_eq(t, s)) return *q;
  const bool cacheable = !t.has_mvar() && !s.has_mvar();
  if (cacheable) {
    if (eq_cache_.count({t.ptr(), s.ptr()}) || eq_cache_.count({s.ptr(), t.ptr()})) return true;
  }
  auto done = [&](bool r) {
    if (r && cacheable) eq_cache_.emplace(std::make_pair(t.ptr(), s.ptr()), std::make_pair(t, s));
    return r;
  };

  Term tn = whnf_core(t);
  Term sn = whnf_core(s);
  if (tn.ptr() != t.ptr() || sn.ptr() != s.ptr())
    if (auto q = quick_def_eq(tn, sn)) return done(*q);

  bool decided = false;
  bool pi = proof_irrel_eq(tn, sn, decided);
  if (decided) return done(pi);

  if (auto r = lazy_delta(tn, sn)) return done(*r);

  if (tn.is_const() && sn.is_const() && tn.const_name() == sn.const_name() &&
      def_eq_levels(tn.const_levels(), sn.const_levels()))
    return done(true);
  if (tn.is_fvar() && sn.is_fvar() && tn.fvar_id() == sn.fvar_id()) return done(true);
  if (tn.is_mvar() && sn.is_mvar() && tn.mvar_id() == sn.mvar_id()) return done(true);

  if (tn.is_app() && sn.is_app() && get_app_num_args(tn) == get_app_num_args(sn) &&
      def_eq_core(get_app_fn(tn), get_app_fn(sn)) && def_eq_args(tn, sn))
    return done(true);

  if (try_function_eta(tn, sn) || try_function_eta(sn, tn)) return done(true);
  if (flags_.structure_eta && (try_structure_eta(tn, sn) || try_structure_eta(sn, tn)))
    return done(true);
  return false;
}

// --- context-based API ------------------------------------------------------

Term whnf(const Environment& env, const LocalContext& ctx, const Term& t, const UnfoldPolicy& policy) {
  TypeChecker tc(env);
  auto fv = tc.lctx().open(ctx);
  return abstract(tc.whnf(instantiate_rev(t, fv), policy), fv);
}

bool def_eq(const Environment& env, const LocalContext& ctx, const Term& t, const Term& u,
            ConversionFlags flags) {
  TypeChecker tc(env, flags);
  auto fv = tc.lctx().open(ctx);
  return tc.is_def_eq(instantiate_rev(t, fv), instantiate_rev(u, fv));
}

Term infer(const Environment& env, const LocalContext& ctx, const Term& t) {
  TypeChecker tc(env);
  auto fv = tc.lctx().open(ctx);
  return abstract(tc.infer(instantiate_rev(t, fv)), fv);
}

void check(const Environment& env, const LocalContext& ctx, const Term& t, const Term& expected) {
  TypeChecker tc(env);
  auto fv = tc.lctx().open(ctx);
  tc.check(instantiate_rev(t, fv), instantiate_rev(expected, fv));
}

Declaration check_decl(const Environment& env, Declaration d, ConversionFlags flags) {
  if ((d.type && d.type.has_mvar()) || (d.value && d.value.has_mvar()))
    throw Error(code::kMetavarInKernel, "declaration '" + d.name.str() + "' contains metavariables");
  for (size_t i = 0; i < d.uparams.size(); ++i)
    for (size_t j = 0; j < i; ++j)
      if (d.uparams[i] == d.uparams[j])
        throw Error(code::kUniverse, "duplicate universe parameter '" + d.uparams[i].str() + "'");
  std::vector<Name> used;
  collect_level_params(d.type, used);
  if (d.value) collect_level_params(d.value, used);
  for (auto& u : used)
    if (std::find(d.uparams.begin(), d.uparams.end(), u) == d.uparams.end())
      throw Error(code::kUniverse, "undeclared universe parameter '" + u.str() + "' in '" + d.name.str() + "'");

  TypeChecker tc(env, flags);
  tc.ensure_sort(tc.infer(d.type));
  if (d.is_definition()) {
    Term vt = tc.infer(d.value);
    if (!tc.is_def_eq(vt, d.type))
      throw Error(code::kTypeMismatch,
                  "type mismatch in '" + d.name.str() + "': value has type " + quote(tc.render(vt)) +
                      " but is declared with type " + quote(tc.render(d.type)),
                  {}, {tc.render(vt), tc.render(d.type)});
  }
  return d;
}

}  // namespace dgl
