#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dgl/driver/session.hpp"
#include "dgl/syntax/parser.hpp"
#include "dgl/syntax/render.hpp"

namespace dgl {
// Lets test frameworks print terms and names.
inline std::ostream& operator<<(std::ostream& os, const Term& t) { return os << (t ? render(t) : "<null>"); }
inline std::ostream& operator<<(std::ostream& os, const Name& n) { return os << n.str(); }
}  // namespace dgl

namespace dgl::test {

inline std::string prelude_dir() { return DGL_TEST_PRELUDE_DIR; }
inline std::string corpus_dir() { return DGL_TEST_CORPUS_DIR; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Built once per process; every caller gets the same snapshot.
inline const ElabState& prelude_state() {
  static const ElabState st = build_prelude(prelude_dir());
  return st;
}

struct SourceRun {
  ElabState state;
  std::string out;
  std::string err;
  RunReport report;
};

// Checks `src` as a user file on top of `base` (or an empty state).
inline SourceRun run_source(std::string_view src, const ElabState* base = nullptr,
                            RunFlags flags = {}) {
  flags.no_prelude = true;
  Session s(flags);
  if (base) s.state() = *base;
  std::ostringstream out, err;
  s.check_source("test.dgl", src, true, &out, &err);
  return {s.state(), out.str(), err.str(), s.report()};
}

// Same, throwing on the first diagnostic.
inline ElabState load(std::string_view src, const ElabState* base = nullptr) {
  SourceRun r = run_source(src, base);
  if (r.report.errors() > 0) throw std::runtime_error(r.err);
  return r.state;
}

// Elaborates a surface term with no expected type over `ctx`.
inline Term term(const ElabState& st, std::string_view src, const LocalContext& ctx = {},
                 std::vector<Name> opens = {}) {
  ElabScope scope;
  scope.open_namespaces = std::move(opens);
  return elaborate_term(st.env, ctx, st.instances, *parse_term(src), std::nullopt, scope);
}

// Minimal kernel fixture: Eq, Bool, Nat and addition on the second argument.
inline const char* kMiniPrelude = R"(
inductive Eq.{u} {A : Sort u} (a : A) : A -> Prop
  | refl : Eq a a
inductive Bool : Type
  | false : Bool
  | true : Bool
inductive Nat : Type
  | zero : Nat
  | succ (n : Nat) : Nat
def Nat.add (m n : Nat) : Nat :=
  Nat.rec (fun (_ : Nat) => Nat) m (fun (_ : Nat) (ih : Nat) => Nat.succ ih) n
structure Prod.{u v} (A : Type u) (B : Type v) := mk :: (fst : A) (snd : B)
)";

inline const ElabState& mini_state() {
  static const ElabState st = load(kMiniPrelude);
  return st;
}

}  // namespace dgl::test
