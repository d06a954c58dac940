#include <doctest.h>

#include <random>

#include "dgl/kernel/environment.hpp"
#include "dgl/kernel/inductive.hpp"
#include "support.hpp"

using namespace dgl;

namespace {

Term nat() { return Term::constant("Nat"); }
Term lam(Term body) { return Term::lam("y", BinderStyle::Explicit, nat(), std::move(body)); }

// Raw terms with arbitrary loose indices, for the calculus laws only.
Term random_raw(std::mt19937& rng, unsigned depth) {
  auto pick = [&](unsigned n) { return std::uniform_int_distribution<unsigned>(0, n - 1)(rng); };
  if (depth == 0) {
    switch (pick(3)) {
      case 0: return Term::bvar(pick(4));
      case 1: return Term::constant("c");
      default: return Term::sort(Level::of_nat(pick(2)));
    }
  }
  switch (pick(4)) {
    case 0: return Term::app(random_raw(rng, depth - 1), random_raw(rng, depth - 1));
    case 1: return Term::lam("x", BinderStyle::Explicit, random_raw(rng, depth - 1), random_raw(rng, depth - 1));
    case 2: return Term::pi("x", BinderStyle::Implicit, random_raw(rng, depth - 1), random_raw(rng, depth - 1));
    default:
      return Term::let("x", random_raw(rng, depth - 1), random_raw(rng, depth - 1), random_raw(rng, depth - 1));
  }
}

InductiveSpec nat_spec() {
  InductiveSpec s;
  s.name = "Nat";
  s.type = Term::sort(Level::of_nat(1));
  s.ctors = {{"Nat.zero", nat()}, {"Nat.succ", Term::pi("n", BinderStyle::Explicit, nat(), nat())}};
  return s;
}

}  // namespace

TEST_CASE("names: hierarchy and total order") {
  Name n("Nat.add");
  CHECK(n.prefix() == Name("Nat"));
  CHECK(n.last() == "add");
  CHECK(n.atoms() == std::vector<std::string>{"Nat", "add"});
  CHECK(Name("A.b") < Name("A.b.c"));
  CHECK(Name("A.b.c") < Name("A.c"));
  CHECK(Name::from_atoms({"a", "b"}) == Name("a.b"));
  CHECK(is_valid_atom("leibniz'"));
  CHECK_FALSE(is_valid_atom("1x"));
}

TEST_CASE("lift: examples") {
  CHECK(lift(Term::bvar(0), 1, 0) == Term::bvar(1));
  CHECK(lift(lam(Term::bvar(0)), 1, 0) == lam(Term::bvar(0)));
  // index 0 is below the cutoff; 2 moves by 3
  CHECK(lift(Term::app(Term::bvar(0), Term::bvar(2)), 3, 1) == Term::app(Term::bvar(0), Term::bvar(5)));
}

TEST_CASE("instantiate: examples") {
  Term c = Term::constant("c");
  CHECK(instantiate(Term::bvar(0), c) == c);
  CHECK(instantiate(Term::bvar(1), c) == Term::bvar(0));
  Term body = Term::app(Term::bvar(0), lam(Term::bvar(1)));
  CHECK(instantiate(body, c) == Term::app(c, lam(lift(c, 1, 0))));
  // with an open value the lift under the binder is visible
  Term v = Term::bvar(3);
  CHECK(instantiate(body, v) == Term::app(Term::bvar(3), lam(Term::bvar(4))));
}

TEST_CASE("instantiate_levels: sorts and constant levels") {
  std::vector<Name> ps{"u"};
  CHECK(instantiate_levels(Term::sort(Level::param("u")), ps, {Level::of_nat(1)}) ==
        Term::sort(Level::of_nat(1)));
  CHECK(instantiate_levels(Term::constant("f", {Level::param("u")}), ps, {Level::zero()}) ==
        Term::constant("f", {Level::zero()}));
}

TEST_CASE("instantiate_levels: a prelude polymorphic definition at Type leaves no parameter") {
  const auto& st = test::prelude_state();
  size_t specialized = 0;
  for (auto& d : st.env.declarations()) {
    if (d->uparams.empty()) continue;
    std::vector<Level> ls(d->uparams.size(), Level::of_nat(1));
    Term t = instantiate_levels(d->type, d->uparams, ls);
    CHECK_FALSE(t.has_level_param());
    if (d->is_definition()) CHECK_FALSE(instantiate_levels(d->value, d->uparams, ls).has_level_param());
    ++specialized;
  }
  CHECK(specialized > 50);
}

TEST_CASE("properties: lift by zero and lift-then-instantiate cancel") {
  std::mt19937 rng(7);
  for (int i = 0; i < 500; ++i) {
    Term t = random_raw(rng, 4);
    Term v = random_raw(rng, 2);
    for (uint32_t c = 0; c < 3; ++c) CHECK(lift(t, 0, c) == t);
    CHECK(instantiate(lift(t, 1, 0), v) == t);
    // abstract undoes opening a binder body with a fresh fvar
    if (t.loose_bvar_range() <= 1) {
      Term fv = Term::fvar(next_fvar_id());
      CHECK(abstract(instantiate(t, fv), std::span<const Term>(&fv, 1)) == t);
    }
  }
}

TEST_CASE("env_add: size, duplicates and dependency order") {
  Environment empty;
  Environment e1 = add_inductive(empty, nat_spec());
  CHECK(e1.contains("Nat"));
  CHECK(e1.contains("Nat.rec"));
  CHECK(empty.size() == 0);

  Environment one = env_add(empty, Declaration::axiom("Nat", {}, Term::sort(Level::of_nat(1))));
  CHECK(one.size() == 1);
  try {
    env_add(one, Declaration::axiom("Nat", {}, Term::sort(Level::of_nat(1))));
    FAIL("expected E-DUPLICATE");
  } catch (const Error& e) {
    CHECK(e.code() == code::kDuplicate);
  }

  // The recursor of Nat mentions Nat, which is absent.
  const Declaration& rec = e1.get("Nat.rec");
  try {
    env_add(empty, rec);
    FAIL("expected E-DEPENDENCY");
  } catch (const Error& e) {
    CHECK(e.code() == code::kDependency);
  }
}

TEST_CASE("environments are persistent and iterate in insertion order") {
  Environment base = add_inductive(Environment{}, nat_spec());
  size_t n = base.size();
  Environment a = env_add(base, Declaration::axiom("a", {}, nat()));
  Environment b = env_add(base, Declaration::axiom("b", {}, nat()));
  CHECK(base.size() == n);
  CHECK_FALSE(base.contains("a"));
  CHECK(a.contains("a"));
  CHECK_FALSE(a.contains("b"));
  CHECK(b.contains("b"));
  CHECK_FALSE(b.contains("a"));
  // checking against the old snapshot ignores later extensions
  CHECK(infer(base, {}, Term::constant("Nat.zero")) == nat());
  auto decls = a.declarations();
  CHECK(decls.front()->name == Name("Nat"));
  CHECK(decls.back()->name == Name("a"));
}

TEST_CASE("local contexts: types of variables are lifted into the full context") {
  LocalContext ctx = LocalContext{}
                         .push("A", Term::sort(Level::of_nat(1)))
                         .push("x", Term::bvar(0));
  CHECK(ctx.type_of_var(0) == Term::bvar(1));
  CHECK(ctx.entry_for_var(1).name == Name("A"));
}

TEST_CASE("levels: normalization and comparison") {
  Level u = Level::param("u");
  Level v = Level::param("v");
  CHECK(level_eq(Level::max(u, u), u));
  CHECK(level_eq(Level::imax(u, Level::zero()), Level::zero()));
  CHECK(level_eq(Level::succ(Level::max(u, v)), Level::max(Level::succ(u), Level::succ(v))));
  CHECK(level_eq(Level::imax(u, Level::succ(v)), Level::max(u, Level::succ(v))));
  CHECK_FALSE(level_eq(u, v));
  CHECK_FALSE(level_eq(Level::succ(u), u));
  CHECK(level_leq(u, Level::max(u, v)));
  CHECK(is_never_zero(Level::succ(u)));
  CHECK_FALSE(is_never_zero(Level::max(u, v)));
}

TEST_CASE("levels: max and imax agree with their denotation on small assignments") {
  // Brute-force semantic check against the decision procedure.
  Level u = Level::param("u");
  Level v = Level::param("v");
  std::vector<Level> pool{Level::zero(), Level::of_nat(1), u, v, Level::succ(u)};
  std::vector<Level> exprs;
  for (auto& a : pool)
    for (auto& b : pool) {
      exprs.push_back(Level::max(a, b));
      exprs.push_back(Level::imax(a, b));
      exprs.push_back(Level::succ(Level::imax(a, b)));
    }
  std::function<unsigned(const Level&, unsigned, unsigned)> eval = [&](const Level& l, unsigned uu,
                                                                      unsigned vv) -> unsigned {
    switch (l.kind()) {
      case LevelKind::Zero: return 0;
      case LevelKind::Succ: return eval(l.succ_of(), uu, vv) + 1;
      case LevelKind::Max: return std::max(eval(l.lhs(), uu, vv), eval(l.rhs(), uu, vv));
      case LevelKind::IMax: {
        unsigned r = eval(l.rhs(), uu, vv);
        return r == 0 ? 0 : std::max(eval(l.lhs(), uu, vv), r);
      }
      case LevelKind::Param: return l.param_name() == Name("u") ? uu : vv;
      default: return 0;
    }
  };
  for (auto& a : exprs)
    for (auto& b : exprs) {
      bool same = true;
      for (unsigned uu = 0; uu < 4; ++uu)
        for (unsigned vv = 0; vv < 4; ++vv) same &= eval(a, uu, vv) == eval(b, uu, vv);
      // sound: a claimed equality must hold semantically
      if (level_eq(a, b)) CHECK(same);
      if (level_leq(a, b))
        for (unsigned uu = 0; uu < 4; ++uu)
          for (unsigned vv = 0; vv < 4; ++vv) CHECK(eval(a, uu, vv) <= eval(b, uu, vv));
    }
}
