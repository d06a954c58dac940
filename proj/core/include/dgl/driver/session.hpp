#pragma once

#include <chrono>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dgl/elab/elaborator.hpp"

namespace dgl {

enum class Severity : uint8_t { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string file;
  int line = 0;
  int column = 0;
  std::string code;
  std::string message;
  std::vector<std::string> terms;

  // `file:line:col: severity[code]: message`
  std::string str() const;
};

struct AxiomReport {
  Name name;
  std::vector<Name> axioms;  // Prop-valued axioms, sorted
  std::vector<Name> opaque;  // other axiomatized constants, sorted
};

struct RunFlags {
  bool no_prelude = false;
  bool trace_defeq = false;
  bool eta_structures = false;
  std::vector<Name> forbid_axioms;
  // Empty selects default_prelude_dir().
  std::string prelude_dir;
};

struct RunReport {
  size_t files = 0;
  size_t commands = 0;
  std::vector<Diagnostic> diagnostics;
  std::vector<AxiomReport> axiom_reports;
  double wall_time_ms = 0;

  size_t errors() const;
  size_t warnings() const;
};

// Sorted transitive closure over the constants of `n`'s type and value of
// the axioms whose type is a proposition. Throws E-UNKNOWN-NAME.
std::vector<Name> axioms_of(const Environment& env, const Name& n);
// Same closure, restricted to axioms whose type is not a proposition.
std::vector<Name> opaque_constants_of(const Environment& env, const Name& n);

struct CommandOptions {
  ConversionFlags flags;
  // Printed output and traces are only produced for user files.
  bool trace_defeq = false;
  std::vector<Name> forbid_axioms;
};

struct CommandOutcome {
  std::vector<std::string> output;  // printed lines, trace lines included
  std::vector<Error> errors;
  std::vector<Error> warnings;
  std::optional<AxiomReport> axioms;
};

// Runs one command against `st`. On error `st` and `scope` are unchanged.
CommandOutcome execute_command(ElabState& st, ElabScope& scope, const SurfaceCommand& c,
                               const CommandOptions& opts = {});

// The source-tree prelude when present, else the installed one.
std::string default_prelude_dir();
// Prelude file paths in manifest order. Throws E-IO.
std::vector<std::string> prelude_files(const std::string& dir);

// One growing environment over a sequence of files.
class Session {
 public:
  explicit Session(RunFlags flags = {});

  ElabState& state() { return state_; }
  const Environment& env() const { return state_.env; }
  RunReport& report() { return report_; }
  const RunFlags& flags() const { return flags_; }

  // Checks `text` as the file `path`. Outputs of user files go to `out`;
  // prelude outputs are dropped. Diagnostics go to `err` as discovered.
  void check_source(const std::string& path, std::string_view text, bool user_file,
                    std::ostream* out, std::ostream* err);
  // False when the file cannot be read.
  bool check_file(const std::string& path, bool user_file, std::ostream* out, std::ostream* err);
  // Checks the manifest files; false on an IO problem.
  bool load_prelude(std::ostream* err);

 private:
  void emit(Diagnostic d, std::ostream* err);

  RunFlags flags_;
  ElabState state_;
  RunReport report_;
};

// Fully checked prelude. Throws the first diagnostic as an Error.
ElabState build_prelude(const std::string& dir = default_prelude_dir());

// `dgl check`: prelude, then `paths` in order. Exit 0 clean, 1 on any error
// diagnostic, 2 when a file cannot be read.
int run(const std::vector<std::string>& paths, const RunFlags& flags, std::ostream& out,
        std::ostream& err, RunReport* report = nullptr);

}  // namespace dgl
