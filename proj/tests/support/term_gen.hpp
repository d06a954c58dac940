#pragma once

#include <random>
#include <vector>

#include "dgl/kernel/term.hpp"

namespace dgl::test {

// Random closed, well-typed terms of type Nat or Bool over the prelude's
// Nat and Bool operations. Well-typed by construction; depth bounds keep
// the oracle's unshared normalization small.
class NatBoolGen {
 public:
  enum class Ty { Nat, Bool };

  explicit NatBoolGen(uint32_t seed) : rng_(seed) {}

  Term gen(Ty ty, unsigned depth) {
    std::vector<Ty> ctx;
    return gen(ty, depth, ctx);
  }

  static Term type_of(Ty ty) { return Term::constant(ty == Ty::Nat ? "Nat" : "Bool"); }

  static Term numeral(unsigned n) {
    Term t = Term::constant("Nat.zero");
    for (unsigned i = 0; i < n; ++i) t = Term::app(Term::constant("Nat.succ"), t);
    return t;
  }

 private:
  unsigned pick(unsigned n) { return std::uniform_int_distribution<unsigned>(0, n - 1)(rng_); }

  static Term c(const char* n) { return Term::constant(n); }
  static Term c1(const char* n) { return Term::constant(n, {Level::of_nat(1)}); }
  static Term motive(Ty over, Ty res) {
    return Term::lam("x", BinderStyle::Explicit, type_of(over), type_of(res));
  }

  Term leaf(Ty ty, const std::vector<Ty>& ctx) {
    std::vector<uint32_t> vars;
    for (uint32_t i = 0; i < ctx.size(); ++i)
      if (ctx[ctx.size() - 1 - i] == ty) vars.push_back(i);
    if (!vars.empty() && pick(2) == 0) return Term::bvar(vars[pick(vars.size())]);
    if (ty == Ty::Nat) return numeral(pick(3));
    return c(pick(2) ? "Bool.true" : "Bool.false");
  }

  Term under(Ty bound, Ty ty, unsigned depth, std::vector<Ty>& ctx) {
    ctx.push_back(bound);
    Term body = gen(ty, depth, ctx);
    ctx.pop_back();
    return body;
  }

  Term gen(Ty ty, unsigned depth, std::vector<Ty>& ctx) {
    if (depth == 0) return leaf(ty, ctx);
    const unsigned d = depth - 1;
    Ty other = pick(2) ? Ty::Nat : Ty::Bool;
    switch (pick(ty == Ty::Nat ? 9 : 8)) {
      case 0:
        return leaf(ty, ctx);
      case 1: {  // beta redex
        Term body = under(other, ty, d, ctx);
        return Term::app(Term::lam("x", BinderStyle::Explicit, type_of(other), body), gen(other, d, ctx));
      }
      case 2: {  // let
        Term val = gen(other, d, ctx);
        Term body = under(other, ty, d, ctx);
        return Term::let("y", type_of(other), val, body);
      }
      case 3:  // Bool.cond at ty
        return mk_app(Term::constant("Bool.cond", {Level::of_nat(1)}),
                      {type_of(ty), gen(Ty::Bool, d, ctx), gen(ty, d, ctx), gen(ty, d, ctx)});
      default:
        break;
    }
    if (ty == Ty::Bool) {
      switch (pick(5)) {
        case 0:
          return Term::app(c("Bool.not"), gen(Ty::Bool, d, ctx));
        case 1:
          return mk_app(c("Bool.and"), {gen(Ty::Bool, d, ctx), gen(Ty::Bool, d, ctx)});
        case 2:
          return mk_app(c("Bool.or"), {gen(Ty::Bool, d, ctx), gen(Ty::Bool, d, ctx)});
        case 3:
          return Term::app(c("Nat.is_zero"), gen(Ty::Nat, d, ctx));
        default:
          return mk_app(c1("Bool.rec"), {motive(Ty::Bool, Ty::Bool), gen(Ty::Bool, d, ctx),
                                         gen(Ty::Bool, d, ctx), gen(Ty::Bool, d, ctx)});
      }
    }
    switch (pick(5)) {
      case 0:
        return Term::app(c("Nat.succ"), gen(Ty::Nat, d, ctx));
      case 1:
        return mk_app(c("Nat.add"), {gen(Ty::Nat, d, ctx), gen(Ty::Nat, d, ctx)});
      case 2:  // keep products small
        return mk_app(c("Nat.mul"), {gen(Ty::Nat, d / 2, ctx), gen(Ty::Nat, d / 2, ctx)});
      case 3:
        return Term::app(c("Nat.pred"), gen(Ty::Nat, d, ctx));
      default: {  // primitive recursion with a step that may use k and ih
        ctx.push_back(Ty::Nat);
        Term step_body = under(Ty::Nat, Ty::Nat, d / 2, ctx);
        ctx.pop_back();
        Term step = Term::lam("k", BinderStyle::Explicit, type_of(Ty::Nat),
                              Term::lam("ih", BinderStyle::Explicit, type_of(Ty::Nat), step_body));
        return mk_app(c1("Nat.rec"), {motive(Ty::Nat, Ty::Nat), gen(Ty::Nat, d, ctx), step,
                                      gen(Ty::Nat, d / 2, ctx)});
      }
    }
  }

  std::mt19937 rng_;
};

}  // namespace dgl::test
