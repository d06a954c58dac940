#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "support.hpp"

using namespace dgl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("dgl_test_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name, std::ios::binary) << text;
    return (path / name).string();
  }
};

// Copies the prelude so a test may edit one file or the manifest.
TempDir prelude_copy() {
  TempDir t;
  for (auto& e : fs::directory_iterator(test::prelude_dir())) fs::copy(e.path(), t.path / e.path().filename());
  return t;
}

struct Outcome {
  int rc;
  std::string out, err;
  RunReport report;
};

Outcome run_files(const std::vector<std::string>& files, RunFlags flags = {}) {
  if (flags.prelude_dir.empty()) flags.prelude_dir = test::prelude_dir();
  std::ostringstream out, err;
  Outcome o;
  o.rc = run(files, flags, out, err, &o.report);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string corpus(const std::string& f) { return test::corpus_dir() + "/" + f; }

std::string strip_wall_time(const std::string& s) {
  std::string out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);)
    if (line.rfind("wall-time:", 0) != 0) out += line + "\n";
  return out;
}

}  // namespace

TEST_CASE("run: the equality corpus passes") {
  auto o = run_files({corpus("equality.dgl")});
  CHECK(o.rc == 0);
  CHECK(o.report.errors() == 0);
  CHECK(o.out.rfind("true\nfalse\ntrue\nfalse\n", 0) == 0);
  CHECK(o.out.find("'zero_add' does not depend on any axioms\n") != std::string::npos);
  CHECK(o.out.find("checked 11 files, ") != std::string::npos);
  CHECK(o.out.find(": 0 errors, 0 warnings\n") != std::string::npos);
}

TEST_CASE("run: a type error exits 1 with one mismatch diagnostic") {
  auto o = run_files({corpus("negative/type_error.dgl")});
  CHECK(o.rc == 1);
  REQUIRE(o.report.diagnostics.size() == 1);
  const auto& d = o.report.diagnostics[0];
  CHECK(d.code == code::kTypeMismatch);
  CHECK(d.line == 1);
  CHECK(d.column == 18);
  CHECK(d.str().find("type_error.dgl:1:18: error[E-TYPE-MISMATCH]: ") != std::string::npos);
  CHECK(o.err.find(d.str()) != std::string::npos);
}

TEST_CASE("run: a missing file exits 2") {
  auto o = run_files({corpus("missing.dgl")});
  CHECK(o.rc == 2);
}

TEST_CASE("run: without the prelude Nat is unknown") {
  RunFlags f;
  f.no_prelude = true;
  auto o = run_files({corpus("negative/uses_nat.dgl")}, f);
  CHECK(o.rc == 1);
  REQUIRE_FALSE(o.report.diagnostics.empty());
  CHECK(o.report.diagnostics[0].code == code::kUnknownConst);
}

TEST_CASE("run: structure eta flag flips the product pair") {
  auto off = run_files({corpus("product_model.dgl")});
  RunFlags f;
  f.eta_structures = true;
  auto on = run_files({corpus("product_model.dgl")}, f);
  CHECK(off.rc == 0);
  CHECK(on.rc == 0);
  CHECK(off.out.rfind("false\n", 0) == 0);
  CHECK(on.out.rfind("true\n", 0) == 0);
}

TEST_CASE("run: forbidden axioms") {
  RunFlags f;
  f.forbid_axioms = {"bogus"};
  auto o = run_files({corpus("negative/forbidden.dgl")}, f);
  CHECK(o.rc == 1);
  REQUIRE(o.report.diagnostics.size() == 1);
  CHECK(o.report.diagnostics[0].code == code::kForbiddenAxiom);
  CHECK(run_files({corpus("negative/forbidden.dgl")}).rc == 0);
}

TEST_CASE("run: #fail outcomes") {
  auto passes = run_files({corpus("negative/fail_passes.dgl")});
  CHECK(passes.rc == 1);
  REQUIRE(passes.report.diagnostics.size() == 1);
  CHECK(passes.report.diagnostics[0].code == code::kFailPassed);
  auto r = test::run_source("#fail def x : Nat := Bool.true\n", &test::mini_state());
  CHECK(r.report.diagnostics.empty());
}

TEST_CASE("run: parse errors are reported and intact commands still run") {
  auto o = run_files({corpus("negative/parse_error.dgl")});
  CHECK(o.rc == 1);
  CHECK(o.report.errors() == 2);
  for (auto& d : o.report.diagnostics) CHECK(d.code == code::kParse);
}

TEST_CASE("run: trace flag prints conversion steps for user #def_eq only") {
  RunFlags f;
  f.trace_defeq = true;
  auto o = run_files({corpus("equality.dgl")}, f);
  CHECK(o.rc == 0);
  CHECK(o.out.find("[defeq] ") != std::string::npos);
  auto plain = run_files({corpus("equality.dgl")});
  CHECK(plain.out.find("[defeq]") == std::string::npos);
}

TEST_CASE("print axioms: both output forms and unknown names") {
  auto r = test::run_source("#print axioms lie_group_prod\n#print axioms add_zero\n", &test::prelude_state());
  CHECK(r.out ==
        "'lie_group_prod' depends on axioms: [smooth_comp, smooth_fst, smooth_on_prod, smooth_prod_mk, "
        "smooth_snd]\n'lie_group_prod' uses opaque constants: [prod_open_sets, smooth, smooth_on]\n"
        "'add_zero' does not depend on any axioms\n");
  REQUIRE(r.report.axiom_reports.size() == 2);
  CHECK(r.report.axiom_reports[1].axioms.empty());
  CHECK_THROWS_AS(axioms_of(test::prelude_state().env, "no_such_name"), Error);
  try {
    axioms_of(test::prelude_state().env, "no_such_name");
  } catch (const Error& e) {
    CHECK(e.code() == code::kUnknownName);
  }
}

TEST_CASE("prelude edits: a flipped expectation gives exactly one diagnostic") {
  TempDir dir = prelude_copy();
  fs::path nat = dir.path / "nat.dgl";
  std::string text = test::read_file(nat.string());
  const std::string line = "#def_eq (fun n : Nat => Nat.add n zero) (fun n : Nat => n) expect true";
  auto at = text.find(line);
  REQUIRE(at != std::string::npos);
  text.replace(at + line.size() - 4, 4, "false");
  dir.write("nat.dgl", text);
  RunFlags f;
  f.prelude_dir = dir.path.string();
  auto o = run_files({}, f);
  CHECK(o.rc == 1);
  REQUIRE(o.report.diagnostics.size() == 1);
  CHECK(o.report.diagnostics[0].code == code::kDefEqExpect);
}

TEST_CASE("prelude edits: lie_group before manifold is an unknown-constant error") {
  TempDir dir = prelude_copy();
  std::string manifest = test::read_file((dir.path / "manifest.txt").string());
  auto m = manifest.find("manifold.dgl");
  auto l = manifest.find("lie_group.dgl");
  REQUIRE(m != std::string::npos);
  REQUIRE(l != std::string::npos);
  REQUIRE(m < l);
  manifest.replace(l, std::string("lie_group.dgl").size(), "manifold.dgl");
  manifest.replace(m, std::string("manifold.dgl").size(), "lie_group.dgl");
  dir.write("manifest.txt", manifest);
  RunFlags f;
  f.prelude_dir = dir.path.string();
  auto o = run_files({}, f);
  CHECK(o.rc == 1);
  REQUIRE_FALSE(o.report.diagnostics.empty());
  CHECK(o.report.diagnostics[0].code == code::kUnknownConst);
  CHECK(o.report.diagnostics[0].file.find("lie_group.dgl") != std::string::npos);
}

TEST_CASE("determinism: two runs print the same bytes") {
  std::vector<std::string> files{corpus("equality.dgl"), corpus("product_model.dgl"), corpus("instances.dgl")};
  auto a = run_files(files);
  auto b = run_files(files);
  CHECK(a.rc == 0);
  CHECK(strip_wall_time(a.out) == strip_wall_time(b.out));
  CHECK(a.err == b.err);
  CHECK(a.out.find("wall-time: ") != std::string::npos);
}
