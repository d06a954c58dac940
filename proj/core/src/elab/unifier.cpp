#include "dgl/elab/unifier.hpp"

#include <unordered_set>

namespace dgl {

namespace {

constexpr unsigned kMaxDepth = 512;

struct DepthGuard {
  unsigned& d;
  explicit DepthGuard(unsigned& x) : d(x) { ++d; }
  ~DepthGuard() { --d; }
};

bool level_occurs(const Level& l, uint64_t id) {
  bool found = false;
  replace_level(l, [&](const Level& x) -> std::optional<Level> {
    if (x.kind() == LevelKind::MVar && x.mvar_id() == id) found = true;
    if (!x.has_mvar()) return x;
    return std::nullopt;
  });
  return found;
}

}  // namespace

bool Unifier::unify(const Term& a, const Term& b) {
  auto cp = mctx_.save();
  bool ok = false;
  try {
    ok = core(a, b);
  } catch (const Error&) {
    ok = false;
  }
  if (!ok) mctx_.restore(cp);
  return ok;
}

bool Unifier::unify_level(const Level& a, const Level& b) {
  auto cp = mctx_.save();
  bool ok = level_core(a, b);
  if (!ok) mctx_.restore(cp);
  return ok;
}

bool Unifier::level_core(const Level& a0, const Level& b0) {
  Level a = simplify(tc_.instantiate_level_mvars(a0));
  Level b = simplify(tc_.instantiate_level_mvars(b0));
  if (level_eq(a, b)) return true;
  if (a.kind() == LevelKind::MVar) {
    if (level_occurs(b, a.mvar_id())) return false;
    mctx_.assign_level(a.mvar_id(), b);
    return true;
  }
  if (b.kind() == LevelKind::MVar) return level_core(b, a);
  if (a.kind() == b.kind()) {
    switch (a.kind()) {
      case LevelKind::Succ:
        return level_core(a.succ_of(), b.succ_of());
      case LevelKind::Max:
      case LevelKind::IMax: {
        auto cp = mctx_.save();
        if (level_core(a.lhs(), b.lhs()) && level_core(a.rhs(), b.rhs())) return true;
        mctx_.restore(cp);
        break;
      }
      default:
        break;
    }
  }
  // `imax l ?m = 0` forces `?m = 0`.
  if (a.kind() == LevelKind::IMax && b.is_zero()) return level_core(a.rhs(), b);
  if (b.kind() == LevelKind::IMax && a.is_zero()) return level_core(b.rhs(), a);
  if (!a.has_mvar() && !b.has_mvar()) return false;
  mctx_.postpone(a, b);
  return true;
}

bool Unifier::assign(uint64_t m, const Term& v0) {
  Term v = tc_.instantiate_mvars(v0);
  if (v.is_mvar() && v.mvar_id() == m) return true;
  bool ok = true;
  std::unordered_set<const void*> seen;
  for_each(v, [&](const Term& s) {
    if (!ok) return false;
    if (!s.has_fvar() && !s.has_mvar()) return false;
    if (!seen.insert(s.ptr()).second) return false;
    if (s.is_mvar() && s.mvar_id() == m) ok = false;
    if (s.is_fvar() && !(mctx_.in_scope(m, s.fvar_id()) && is_open_(s.fvar_id()))) ok = false;
    return true;
  });
  if (!ok) return false;
  Term vt;
  try {
    vt = tc_.infer(v, true);
  } catch (const Error&) {
    return false;
  }
  mctx_.assign(m, v);
  return core(mctx_.decl(m).type, vt);
}

bool Unifier::same_head_args(const Term& a, const Term& b) {
  std::vector<Term> as, bs;
  const Term& fa = get_app_fn_args(a, as);
  const Term& fb = get_app_fn_args(b, bs);
  if (as.size() != bs.size()) return false;
  if (fa.kind() != fb.kind()) return false;
  if (fa.is_const()) {
    if (fa.const_name() != fb.const_name() || fa.const_levels().size() != fb.const_levels().size())
      return false;
    for (size_t i = 0; i < fa.const_levels().size(); ++i)
      if (!level_core(fa.const_levels()[i], fb.const_levels()[i])) return false;
  } else if (fa.is_fvar()) {
    if (fa.fvar_id() != fb.fvar_id()) return false;
  } else if (fa.is_mvar()) {
    if (fa.mvar_id() != fb.mvar_id()) return false;
  } else {
    return false;
  }
  for (size_t i = 0; i < as.size(); ++i)
    if (!core(as[i], bs[i])) return false;
  return true;
}

bool Unifier::binders(const Term& a, const Term& b) {
  std::vector<Term> fvars;
  Term x = a;
  Term y = b;
  while (x.kind() == a.kind() && y.kind() == a.kind()) {
    Term dx = instantiate_rev(x.binder_type(), fvars);
    Term dy = instantiate_rev(y.binder_type(), fvars);
    if (!core(dx, dy)) return false;
    fvars.push_back(tc_.lctx().add(x.binder_name(), dx, x.binder_style()));
    x = x.binder_body();
    y = y.binder_body();
  }
  return core(instantiate_rev(x, fvars), instantiate_rev(y, fvars));
}

std::optional<bool> Unifier::lazy_delta(const Term& a, const Term& b) {
  auto height = [&](const Term& t) -> std::optional<unsigned> {
    const Term& f = get_app_fn(t);
    if (!f.is_const()) return std::nullopt;
    const Declaration* d = tc_.env().find(f.const_name());
    if (!d || !d->is_definition()) return std::nullopt;
    return d->height;
  };
  auto ha = height(a);
  auto hb = height(b);
  if (!ha && !hb) return std::nullopt;
  Term x = a;
  Term y = b;
  if (ha && (!hb || *ha >= *hb))
    if (auto u = tc_.unfold_definition(a)) x = *u;
  if (hb && (!ha || *hb >= *ha))
    if (auto u = tc_.unfold_definition(b)) y = *u;
  if (x.ptr() == a.ptr() && y.ptr() == b.ptr()) return std::nullopt;
  return core(x, y);
}

bool Unifier::eta(const Term& lam, const Term& other) {
  if (!tc_.flags().function_eta) return false;
  Term ty;
  try {
    ty = tc_.whnf(tc_.infer(other, true));
  } catch (const Error&) {
    return false;
  }
  if (!ty.is_pi()) return false;
  Term expanded = Term::lam(ty.binder_name(), ty.binder_style(), ty.binder_type(),
                            Term::app(other, Term::bvar(0)));
  return core(lam, expanded);
}

bool Unifier::core(const Term& a0, const Term& b0) {
  if (a0.ptr() == b0.ptr()) return true;
  if (depth_ > kMaxDepth) return false;
  DepthGuard g(depth_);
  Term a = tc_.instantiate_mvars(a0);
  Term b = tc_.instantiate_mvars(b0);
  if (!a.has_mvar() && !b.has_mvar()) return tc_.is_def_eq(a, b);
  if (a == b) return true;
  a = tc_.whnf_core(a);
  b = tc_.whnf_core(b);
  if (a.is_mvar()) return assign(a.mvar_id(), b);
  if (b.is_mvar()) return assign(b.mvar_id(), a);
  if (!a.has_mvar() && !b.has_mvar()) return tc_.is_def_eq(a, b);

  if (a.kind() == b.kind()) {
    switch (a.kind()) {
      case TermKind::Sort:
        return level_core(a.level(), b.level());
      case TermKind::Lam:
      case TermKind::Pi:
        return binders(a, b);
      default:
        break;
    }
  }
  if ((a.is_app() || a.is_const()) && (b.is_app() || b.is_const())) {
    auto cp = mctx_.save();
    if (same_head_args(a, b)) return true;
    mctx_.restore(cp);
  }
  if (auto r = lazy_delta(a, b)) return *r;

  if (a.is_lam() && !b.is_lam()) return eta(a, b);
  if (b.is_lam() && !a.is_lam()) return eta(b, a);

  Term wa = tc_.whnf(a);
  Term wb = tc_.whnf(b);
  if (wa.ptr() != a.ptr() || wb.ptr() != b.ptr()) return core(wa, wb);

  // Proof irrelevance: any two proofs of the same proposition unify.
  if (tc_.flags().proof_irrelevance && !a.is_sort() && !a.is_pi()) {
    try {
      Term ta = tc_.infer(a, true);
      if (tc_.is_prop(ta)) return core(ta, tc_.infer(b, true));
    } catch (const Error&) {
    }
  }
  return false;
}

bool unify(MetaContext& mctx, const Environment& env, const LocalContext& ctx, const Term& t,
           const Term& u, ConversionFlags flags) {
  TypeChecker tc(env, flags, &mctx);
  auto fv = tc.lctx().open(ctx);
  std::unordered_set<uint64_t> open;
  for (auto& f : fv) open.insert(f.fvar_id());
  Unifier un(tc, mctx, [&](uint64_t id) { return open.count(id) > 0; });
  return un.unify(instantiate_rev(t, fv), instantiate_rev(u, fv));
}

}  // namespace dgl
