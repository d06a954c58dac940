#pragma once

#include <functional>

#include "dgl/elab/meta_context.hpp"

namespace dgl {

// First-order unification modulo reduction. A metavariable is only ever
// assigned as a whole; `?m x =?= t` never solves `?m`. Assignments pass an
// occurs check and a scope check: every free variable in the value must be
// in the metavariable's scope and still open.
class Unifier {
 public:
  Unifier(TypeChecker& tc, MetaContext& mctx, std::function<bool(uint64_t)> is_open)
      : tc_(tc), mctx_(mctx), is_open_(std::move(is_open)) {}

  // On failure the metavariable context is left exactly as before.
  bool unify(const Term& a, const Term& b);
  bool unify_level(const Level& a, const Level& b);

 private:
  bool core(const Term& a, const Term& b);
  bool level_core(const Level& a, const Level& b);
  bool assign(uint64_t m, const Term& v);
  bool same_head_args(const Term& a, const Term& b);
  bool binders(const Term& a, const Term& b);
  std::optional<bool> lazy_delta(const Term& a, const Term& b);
  bool eta(const Term& lam, const Term& other);

  TypeChecker& tc_;
  MetaContext& mctx_;
  std::function<bool(uint64_t)> is_open_;
  unsigned depth_ = 0;
};

// Unifies `t` and `u`, both well-scoped in `ctx`. Metavariables come from
// `mctx` and must not depend on `ctx`.
bool unify(MetaContext& mctx, const Environment& env, const LocalContext& ctx, const Term& t,
           const Term& u, ConversionFlags flags = {});

}  // namespace dgl
