#include <doctest.h>

#include "dgl/kernel/reduction.hpp"
#include "properties.hpp"

using namespace dgl;

namespace {

Term nat() { return Term::constant("Nat"); }
Term zero() { return Term::constant("Nat.zero"); }
Term add(Term a, Term b) { return mk_app(Term::constant("Nat.add"), {std::move(a), std::move(b)}); }
LocalContext n_ctx() { return LocalContext{}.push("n", nat()); }

}  // namespace

TEST_CASE("whnf: beta") {
  const auto& env = test::mini_state().env;
  Term id = Term::lam("x", BinderStyle::Explicit, nat(), Term::bvar(0));
  CHECK(whnf(env, {}, Term::app(id, zero())) == zero());
}

TEST_CASE("whnf: n + 0 reduces to n") {
  const auto& env = test::mini_state().env;
  CHECK(whnf(env, n_ctx(), add(Term::bvar(0), zero())) == Term::bvar(0));
}

TEST_CASE("whnf: 0 + n is stuck on Nat.rec applied to n") {
  const auto& env = test::mini_state().env;
  Term w = whnf(env, n_ctx(), add(zero(), Term::bvar(0)));
  CHECK(get_app_fn(w) == Term::constant("Nat.rec", {Level::of_nat(1)}));
  auto args = get_app_args(w);
  REQUIRE_FALSE(args.empty());
  CHECK(args.back() == Term::bvar(0));
}

TEST_CASE("whnf: zeta and the unfold policy") {
  const auto& env = test::mini_state().env;
  Term let = Term::let("y", nat(), zero(), Term::app(Term::constant("Nat.succ"), Term::bvar(0)));
  CHECK(whnf(env, {}, let) == Term::app(Term::constant("Nat.succ"), zero()));
  Term stuck = add(zero(), zero());
  CHECK(whnf(env, {}, stuck, UnfoldPolicy::none()) == stuck);
  CHECK(whnf(env, {}, stuck, UnfoldPolicy::only({"Nat.add"})) == zero());
}

TEST_CASE("small_step: normal terms and a beta step") {
  const auto& env = test::mini_state().env;
  CHECK_FALSE(small_step(env, zero()).has_value());
  Term id = Term::lam("x", BinderStyle::Explicit, nat(), Term::bvar(0));
  auto s = small_step(env, Term::app(id, zero()));
  REQUIRE(s);
  CHECK(*s == zero());
}

TEST_CASE("normalize: 2 + 2 is 4 and agrees with whnf") {
  const auto& env = test::mini_state().env;
  Term two = test::NatBoolGen::numeral(2);
  Term four = test::NatBoolGen::numeral(4);
  CHECK(normalize(env, two, 0) == two);
  Term t = add(two, two);
  size_t steps = 0;
  Term cur = t;
  while (auto n = small_step(env, cur)) {
    cur = *n;
    REQUIRE(++steps <= 1000);
  }
  CHECK(cur == four);
  CHECK(normalize(env, t, 1000) == four);
  CHECK(whnf_normal_form(env, t) == four);
}

TEST_CASE("normalize: zero fuel on a redex is an error") {
  const auto& env = test::mini_state().env;
  try {
    normalize(env, add(zero(), zero()), 0);
    FAIL("expected E-FUEL");
  } catch (const Error& e) {
    CHECK(e.code() == code::kFuelExhausted);
  }
}

TEST_CASE("iota: rules fire on constructors only") {
  const auto& env = test::mini_state().env;
  Term rec = Term::constant("Nat.rec", {Level::of_nat(1)});
  Term motive = Term::lam("x", BinderStyle::Explicit, nat(), nat());
  Term z = Term::constant("z0");
  Term step = Term::constant("s0");
  Environment e = env_add(env, Declaration::axiom("z0", {}, nat()));
  e = env_add(e, Declaration::axiom("s0", {}, Term::pi("k", BinderStyle::Explicit, nat(),
                                                    Term::pi("ih", BinderStyle::Explicit, nat(), nat()))));
  auto r0 = iota_step(e, mk_app(rec, {motive, z, step, zero()}));
  REQUIRE(r0);
  CHECK(whnf(e, {}, *r0) == z);
  Term k = test::NatBoolGen::numeral(1);
  auto r1 = iota_step(e, mk_app(rec, {motive, z, step, Term::app(Term::constant("Nat.succ"), k)}));
  REQUIRE(r1);
  CHECK(whnf(e, {}, *r1) == mk_app(step, {k, mk_app(rec, {motive, z, step, k})}));
  // an axiom in major position is stuck
  CHECK_FALSE(iota_step(e, mk_app(rec, {motive, z, step, Term::constant("z0")})).has_value());
}

TEST_CASE("definition heights follow the dependency order") {
  auto st = test::load("def f0 (n : Nat) : Nat := n\n"
                       "def f1 (n : Nat) : Nat := f0 n\n"
                       "def f2 (n : Nat) : Nat := f1 (f0 n)\n",
                       &test::mini_state());
  CHECK(definition_height(st.env, "f0") == 0);
  CHECK(definition_height(st.env, "f1") == 1);
  CHECK(definition_height(st.env, "f2") == 2);
  CHECK(definition_height(st.env, "Nat.add") == 0);
  for (auto& d : test::prelude_state().env.declarations()) {
    if (!d->is_definition()) continue;
    for (auto& c : collect_constants(d->value)) {
      const Declaration* dc = test::prelude_state().env.find(c);
      if (dc && dc->is_definition() && dc->name != d->name) CHECK(dc->height < d->height);
    }
  }
}

TEST_CASE("lazy delta unfolds the higher definition first") {
  auto st = test::load("def f0 (n : Nat) : Nat := n\n"
                       "def f1 (n : Nat) : Nat := f0 n\n"
                       "def f2 (n : Nat) : Nat := f1 n\n",
                       &test::mini_state());
  TypeChecker tc(st.env);
  std::vector<std::string> lines;
  tc.set_trace([&](const std::string& l) { lines.push_back(l); });
  Term x = tc.lctx().add("x", nat());
  CHECK(tc.is_def_eq(Term::app(Term::constant("f2"), x), Term::app(Term::constant("f0"), x)));
  std::vector<std::string> unfolds;
  for (auto& l : lines)
    if (l.find("unfold") != std::string::npos) unfolds.push_back(l);
  REQUIRE(unfolds.size() >= 2);
  CHECK(unfolds[0] == "[defeq] unfold f2 (height 2)");
  CHECK(unfolds[1] == "[defeq] unfold f1 (height 1)");
}

TEST_CASE("properties: whnf is idempotent and the oracle agrees (small sample)") {
  const auto& env = test::prelude_state().env;
  auto terms = test::generate_terms(200, 11, 4);
  for (auto& t : terms) {
    Term w = whnf(env, {}, t);
    CHECK(whnf(env, {}, w) == w);
  }
  auto r = test::oracle_agreement(env, terms);
  INFO(test::summary(r));
  CHECK(r.ok());
}
