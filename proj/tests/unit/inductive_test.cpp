#include <doctest.h>

#include "dgl/kernel/inductive.hpp"
#include "dgl/kernel/reduction.hpp"
#include "properties.hpp"

using namespace dgl;

namespace {

std::string first_error(std::string_view src, const ElabState* base) {
  auto r = test::run_source(src, base);
  if (r.report.diagnostics.empty()) return "";
  return r.report.diagnostics.front().code;
}

// Splits a pi telescope into binder types (de Bruijn, unshifted) and result.
std::vector<Term> pi_domains(Term t, Term* result = nullptr) {
  std::vector<Term> ds;
  while (t.is_pi()) {
    ds.push_back(t.binder_type());
    t = t.binder_body();
  }
  if (result) *result = t;
  return ds;
}

}  // namespace

TEST_CASE("validate: Nat eliminates into every sort") {
  const auto& st = test::mini_state();
  const Declaration& rec = st.env.get("Nat.rec");
  CHECK(rec.large_elim);
  CHECK(rec.num_minors == 2);
  CHECK(rec.num_params == 0);
  CHECK(rec.uparams.size() == 1);
  CHECK(st.env.get("Nat").is_recursive);
}

TEST_CASE("validate: Eq is a subsingleton with large elimination") {
  const auto& st = test::mini_state();
  const Declaration& eq = st.env.get("Eq");
  CHECK(eq.num_params == 2);
  CHECK(eq.num_indices == 1);
  const Declaration& rec = st.env.get("Eq.rec");
  CHECK(rec.large_elim);
  CHECK(rec.num_minors == 1);
  CHECK(rec.uparams.size() == 2);
}

TEST_CASE("validate: negative occurrence is a positivity error") {
  CHECK(first_error("inductive Bad : Type\n  | mk (f : (Bad -> Nat) -> Bad) : Bad\n", &test::mini_state()) ==
        code::kPositivity);
  CHECK(first_error("inductive Bad2 : Type\n  | mk (f : Bad2 -> Nat) : Bad2\n", &test::mini_state()) ==
        code::kPositivity);
  // strictly positive function argument is fine
  CHECK(first_error("inductive Tree : Type\n  | leaf : Tree\n  | node (kids : Nat -> Tree) : Tree\n",
                    &test::mini_state()) == "");
}

TEST_CASE("validate: universe and shape violations") {
  CHECK(first_error("inductive Big : Type\n  | mk (A : Type) : Big\n", &test::mini_state()) == code::kUniverse);
  CHECK(first_error("inductive W : Type 1\n  | mk (A : Type) : W\n", &test::mini_state()) == "");
  CHECK(first_error("inductive Wrong : Type\n  | mk : Nat\n", &test::mini_state()) == code::kInductive);
  CHECK(first_error("inductive Par (A : Type) : Type\n  | mk : Par Nat\n", &test::mini_state()) ==
        code::kInductive);
}

TEST_CASE("subsingleton gate: Prop-valued non-subsingletons eliminate only into Prop") {
  auto st = test::load(R"(
inductive Or (a b : Prop) : Prop
  | inl (h : a) : Or a b
  | inr (h : b) : Or a b
inductive Ex (A : Type) (p : A -> Prop) : Prop
  | intro (w : A) (h : p w) : Ex A p
inductive T : Prop
  | intro : T
)", &test::mini_state());
  CHECK_FALSE(st.env.get("Or.rec").large_elim);
  CHECK_FALSE(st.env.get("Ex.rec").large_elim);
  CHECK(st.env.get("T.rec").large_elim);
  CHECK(st.env.get("Or.rec").uparams.empty());
  auto r = test::run_source(
      "def pick (a b : Prop) (h : Or a b) : Bool := Or.rec (fun (_ : Or a b) => Bool) (fun (x : a) => Bool.true) "
      "(fun (x : b) => Bool.false) h\n",
      &st);
  CHECK(r.report.errors() == 1);
  auto ok = test::run_source(
      "def swap (a b : Prop) (h : Or a b) : Or b a := Or.rec (fun (_ : Or a b) => Or b a) (fun (x : a) => Or.inr b a x) "
      "(fun (x : b) => Or.inl b a x) h\n",
      &st);
  CHECK(ok.report.errors() == 0);
}

TEST_CASE("recursor: Nat.rec has the textbook type") {
  const auto& st = test::mini_state();
  Term result;
  auto ds = pi_domains(st.env.get("Nat.rec").type, &result);
  REQUIRE(ds.size() == 4);
  // motive : Nat -> Sort u
  REQUIRE(ds[0].is_pi());
  CHECK(ds[0].binder_type() == Term::constant("Nat"));
  CHECK(ds[0].binder_body().is_sort());
  // zero premise: motive Nat.zero
  CHECK(ds[1] == Term::app(Term::bvar(0), Term::constant("Nat.zero")));
  // succ premise: forall n, motive n -> motive (succ n)
  REQUIRE(ds[2].is_pi());
  CHECK(ds[2].binder_type() == Term::constant("Nat"));
  REQUIRE(ds[2].binder_body().is_pi());
  CHECK(ds[2].binder_body().binder_type() == Term::app(Term::bvar(2), Term::bvar(0)));
  CHECK(ds[2].binder_body().binder_body() ==
        Term::app(Term::bvar(3), Term::app(Term::constant("Nat.succ"), Term::bvar(1))));
  CHECK(ds[3] == Term::constant("Nat"));
  CHECK(result == Term::app(Term::bvar(3), Term::bvar(0)));
}

TEST_CASE("recursor: Eq.rec is J with the motive over the index and the proof") {
  const auto& st = test::mini_state();
  const Declaration& rec = st.env.get("Eq.rec");
  auto ds = pi_domains(rec.type);
  // {A} {a} (motive : (b : A) -> Eq a b -> Sort u) (refl case) {b} (h : Eq a b)
  REQUIRE(ds.size() == 6);
  Term motive = ds[2];
  REQUIRE(motive.is_pi());
  REQUIRE(motive.binder_body().is_pi());
  CHECK(get_app_fn(motive.binder_body().binder_type()) == Term::constant("Eq", {Level::param(rec.uparams[1])}));
  CHECK(ds[3] == mk_app(Term::bvar(0), {Term::bvar(1), mk_app(Term::constant("Eq.refl", {Level::param(rec.uparams[1])}),
                                                            {Term::bvar(2), Term::bvar(1)})}));
}

TEST_CASE("recursor: HEq.rec ranges over a type and an element") {
  const auto& st = test::prelude_state();
  const Declaration& heq = st.env.get("HEq");
  CHECK(heq.num_indices == 2);
  const Declaration& rec = st.env.get("HEq.rec");
  CHECK(rec.large_elim);
  auto ds = pi_domains(rec.type);
  Term motive = ds[rec.num_params];
  // motive : {B : Sort u} -> (b : B) -> HEq a b -> Sort v
  REQUIRE(motive.is_pi());
  CHECK(motive.binder_type().is_sort());
  REQUIRE(motive.binder_body().is_pi());
  CHECK(motive.binder_body().binder_type() == Term::bvar(0));
  REQUIRE(motive.binder_body().binder_body().is_pi());
  CHECK(get_app_fn(motive.binder_body().binder_body().binder_type()).const_name() == Name("HEq"));
}

TEST_CASE("iota: Nat.rec on zero, on succ, and stuck on a variable") {
  const auto& st = test::mini_state();
  auto r = test::run_source("axiom z : Nat\naxiom s : Nat -> Nat -> Nat\n", &st);
  const auto& env = r.state.env;
  Term rec = Term::constant("Nat.rec", {Level::of_nat(1)});
  Term motive = Term::lam("x", BinderStyle::Explicit, Term::constant("Nat"), Term::constant("Nat"));
  Term z = Term::constant("z");
  Term s = Term::constant("s");
  auto a = iota_step(env, mk_app(rec, {motive, z, s, Term::constant("Nat.zero")}));
  REQUIRE(a);
  CHECK(whnf(env, {}, *a) == z);
  Term one = Term::app(Term::constant("Nat.succ"), Term::constant("Nat.zero"));
  auto b = iota_step(env, mk_app(rec, {motive, z, s, one}));
  REQUIRE(b);
  Term inner = mk_app(rec, {motive, z, s, Term::constant("Nat.zero")});
  CHECK(normalize(env, *b, 100) == mk_app(s, {Term::constant("Nat.zero"), z}));
  CHECK(whnf(env, {}, *b) == mk_app(s, {Term::constant("Nat.zero"), inner}));
  LocalContext ctx = LocalContext{}.push("n", Term::constant("Nat"));
  Term stuck = mk_app(rec, {motive, z, s, Term::bvar(0)});
  CHECK(whnf(env, ctx, stuck) == stuck);
}

TEST_CASE("properties: every prelude recursor type checks and iota agrees with the oracle") {
  const auto& env = test::prelude_state().env;
  TypeChecker tc(env);
  size_t recs = 0;
  for (auto& d : env.declarations()) {
    if (!d->is_recursor()) continue;
    ++recs;
    CHECK_NOTHROW(check_decl(env, Declaration::axiom(Name(d->name.str() + ".copy"), d->uparams, d->type)));
    CHECK(tc.is_def_eq(tc.ensure_sort(tc.infer(d->type)), tc.ensure_sort(tc.infer(d->type))));
    for (auto& rule : d->rules) CHECK_FALSE(rule.rhs.has_loose_bvars());
  }
  CHECK(recs > 20);
  // closed constructor-headed majors in generated terms: kernel iota vs oracle
  auto terms = test::generate_terms(100, 5, 3);
  for (auto& t : terms) {
    std::vector<Term> args;
    Term fn = get_app_fn_args(t, args);
    if (!fn.is_const() || !env.get(fn.const_name()).is_recursor()) continue;
    auto k = iota_step(env, t);
    if (!k) continue;
    CHECK(normalize(env, *k, 1'000'000) == normalize(env, t, 1'000'000));
  }
}
