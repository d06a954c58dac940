#include <doctest.h>

#include <filesystem>
#include <regex>
#include <set>

#include "support.hpp"

using namespace dgl;
namespace fs = std::filesystem;

namespace {

std::vector<Name> names_of(const ElabState& st) {
  std::vector<Name> out;
  for (auto& d : st.env.declarations()) out.push_back(d->name);
  return out;
}

// Definitions added by prelude file `stem`.
std::vector<Name> defined_in(const std::string& stem) {
  Session s(RunFlags{.no_prelude = true});
  std::set<Name> before;
  std::vector<Name> added;
  for (auto& path : prelude_files(test::prelude_dir())) {
    bool target = fs::path(path).stem() == stem;
    if (target)
      for (auto& n : names_of(s.state())) before.insert(n);
    s.check_file(path, false, nullptr, nullptr);
    if (target) {
      for (auto& n : names_of(s.state()))
        if (!before.count(n) && s.env().get(n).is_definition()) added.push_back(n);
      break;
    }
  }
  return added;
}

bool mentions_transitively(const Environment& env, const Name& root, const std::string& atom) {
  std::set<Name> seen;
  std::vector<Name> todo{root};
  while (!todo.empty()) {
    Name n = todo.back();
    todo.pop_back();
    if (!seen.insert(n).second) continue;
    for (auto& a : n.atoms())
      if (a == atom) return true;
    const Declaration& d = env.get(n);
    for (auto& c : collect_constants(d.type)) todo.push_back(c);
    if (d.is_definition())
      for (auto& c : collect_constants(d.value)) todo.push_back(c);
  }
  return false;
}

}  // namespace

TEST_CASE("prelude: manifest order") {
  std::vector<std::string> stems;
  for (auto& p : prelude_files(test::prelude_dir())) stems.push_back(fs::path(p).stem().string());
  CHECK(stems == std::vector<std::string>{"logic", "nat", "algebra", "topology_axioms", "manifold", "lie_group",
                                          "bundle", "derivation", "left_invariant_derivation",
                                          "equality_demos"});
}

TEST_CASE("prelude: cold build checks with no diagnostics") {
  std::ostringstream out, err;
  RunReport report;
  int rc = run({}, RunFlags{.prelude_dir = test::prelude_dir()}, out, err, &report);
  CHECK(rc == 0);
  CHECK(report.diagnostics.empty());
  CHECK(err.str().empty());
  CHECK(report.files == 10);
}

TEST_CASE("prelude: the two models of a product differ definitionally and agree pointwise") {
  const auto& st = test::prelude_state();
  Term a = test::term(st, "ModelWithCorners.to_fun (model_with_corners_self Real (Prod Real Real))");
  Term b = test::term(st,
                      "ModelWithCorners.to_fun (prod_model (model_with_corners_self Real Real) "
                      "(model_with_corners_self Real Real))");
  CHECK_FALSE(def_eq(st.env, {}, a, b));
  ConversionFlags eta;
  eta.structure_eta = true;
  CHECK(def_eq(st.env, {}, a, b, eta));
  CHECK(st.env.get("model_self_prod_pointwise").is_definition());
  // self model is the identity on the nose
  Term id = test::term(st, "ModelWithCorners.to_fun (model_with_corners_self Real Real)");
  CHECK(def_eq(st.env, {}, id, test::term(st, "fun (x : Real) => x")));
}

TEST_CASE("prelude: fibers of the total space are the family members") {
  const auto& st = test::prelude_state();
  auto r = test::run_source(
      "axiom Base0 : Type\naxiom Fib : Base0 -> Type\naxiom pt_b : Base0\naxiom pt_x : Fib pt_b\n"
      "#def_eq (Fib (total_space.proj (total_space.incl Fib pt_b pt_x))) (Fib pt_b) expect true\n"
      "#check (Sigma.snd (total_space.incl Fib pt_b pt_x) : Fib pt_b)\n",
      &st);
  CHECK(r.report.errors() == 0);
  CHECK(r.out.rfind("true\n", 0) == 0);
}

TEST_CASE("prelude: nat and derivation theorems use no axioms") {
  const auto& env = test::prelude_state().env;
  for (const char* stem : {"nat", "derivation"}) {
    auto defs = defined_in(stem);
    CHECK(defs.size() > 5);
    for (auto& n : defs) {
      INFO(n.str());
      CHECK(axioms_of(env, n).empty());
    }
  }
  for (const char* n : {"Derivation.bracket_leibniz", "Derivation.bracket_antisymm", "Derivation.jacobi",
                        "Derivation.bracket"})
    CHECK(axioms_of(env, n).empty());
}

TEST_CASE("prelude: the product Lie group leans only on smoothness lemmas") {
  const auto& env = test::prelude_state().env;
  std::vector<Name> expected{"smooth_comp", "smooth_fst", "smooth_on_prod", "smooth_prod_mk", "smooth_snd"};
  CHECK(axioms_of(env, "lie_group_prod") == expected);
  // every one of them is a declared smoothness axiom
  for (auto& a : expected) CHECK(env.get(a).is_axiom());
}

TEST_CASE("prelude: the left-invariant Lie algebra needs only function extensionality") {
  const auto& env = test::prelude_state().env;
  CHECK(axioms_of(env, "LeftInvariantDerivation.lie_algebra") == std::vector<Name>{"funext"});
  CHECK(axioms_of(env, "LeftInvariantDerivation.bracket") == std::vector<Name>{"funext"});
  CHECK(axioms_of(env, "Derivation.lie_algebra") == std::vector<Name>{"funext"});
}

TEST_CASE("prelude: HEq appears only in the equality demos") {
  std::regex word("\\bHEq\\b");
  for (auto& path : prelude_files(test::prelude_dir())) {
    std::string src = test::read_file(path);
    bool demo = fs::path(path).filename() == "equality_demos.dgl";
    CHECK(std::regex_search(src, word) == demo);
  }
  const auto& env = test::prelude_state().env;
  CHECK_FALSE(mentions_transitively(env, "hdifferential", "HEq"));
  CHECK_FALSE(mentions_transitively(env, "transport", "HEq"));
  CHECK_FALSE(mentions_transitively(env, "LeftInvariantDerivation.lie_algebra", "HEq"));
}

TEST_CASE("prelude: transport along refl is the identity") {
  const auto& st = test::prelude_state();
  LocalContext ctx = LocalContext{}
                         .push("A", Term::sort(Level::of_nat(1)))
                         .push("T", Term::pi("a", BinderStyle::Explicit, Term::bvar(0), Term::sort(Level::of_nat(1))))
                         .push("a", Term::bvar(1))
                         .push("x", Term::app(Term::bvar(1), Term::bvar(0)));
  Term t = test::term(st, "transport T (Eq.refl a) x", ctx);
  CHECK(whnf(st.env, ctx, t) == Term::bvar(0));
  // the chained differential lands at the composed endpoint
  CHECK(st.env.get("hdifferential_comp").is_definition());
}
