#include "dgl/driver/session.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "dgl/syntax/parser.hpp"
#include "dgl/syntax/render.hpp"

#ifndef DGL_DEFAULT_PRELUDE_DIR
#define DGL_DEFAULT_PRELUDE_DIR ""
#endif
#ifndef DGL_INSTALLED_PRELUDE_DIR
#define DGL_INSTALLED_PRELUDE_DIR ""
#endif

namespace dgl {

namespace fs = std::filesystem;
using CmdK = SurfaceCommand::Kind;

namespace {

constexpr const char* kInternal = "E-INTERNAL";
constexpr const char* kOpenEmpty = "W-OPEN-EMPTY";

std::string join(const std::vector<Name>& ns) {
  std::string s;
  for (auto& n : ns) s += (s.empty() ? "" : ", ") + n.str();
  return s;
}

// Names of the axioms reachable from `n`, split by whether their type is a
// proposition.
void collect_axioms(const Environment& env, const Name& n, std::set<Name>& props,
                    std::set<Name>& opaque) {
  const Declaration* root = env.find(n);
  if (!root) throw Error(code::kUnknownName, "unknown declaration '" + n.str() + "'");
  TypeChecker tc(env);
  std::set<Name> seen;
  std::vector<const Declaration*> work{root};
  seen.insert(root->name);
  auto visit_term = [&](const Term& t) {
    if (!t) return;
    for_each(t, [&](const Term& s) {
      if (s.is_const() && !seen.count(s.const_name())) {
        seen.insert(s.const_name());
        if (auto* d = env.find(s.const_name())) work.push_back(d);
      }
      return true;
    });
  };
  while (!work.empty()) {
    const Declaration* d = work.back();
    work.pop_back();
    if (d->is_axiom()) {
      (tc.is_prop(d->type) ? props : opaque).insert(d->name);
    }
    visit_term(d->type);
    if (d->is_definition()) visit_term(d->value);
  }
}

bool resolves_globally(const Environment& env, const ElabScope& scope, const std::string& s) {
  Name n(s);
  if (env.contains(n)) return true;
  for (auto& ns : scope.open_namespaces)
    if (env.contains(ns.append(n))) return true;
  return false;
}

struct Elaborated {
  Term term;
  Term type;
};

class CommandRunner {
 public:
  CommandRunner(ElabState& st, ElabScope& scope, const CommandOptions& opts, CommandOutcome& out)
      : st_(st), scope_(scope), opts_(opts), out_(out) {
    eopts_.flags = opts.flags;
  }

  void run(const SurfaceCommand& c) {
    switch (c.kind) {
      case CmdK::Def:
      case CmdK::Axiom:
      case CmdK::Inductive:
      case CmdK::Structure:
      case CmdK::Class:
      case CmdK::Instance:
        declaration(c);
        break;
      case CmdK::Check:
        check(c);
        break;
      case CmdK::Whnf:
        whnf(c);
        break;
      case CmdK::DefEq:
        def_eq(c);
        break;
      case CmdK::Fail:
        fail(c);
        break;
      case CmdK::PrintAxioms:
        print_axioms(c);
        break;
      case CmdK::Open:
        open(c);
        break;
    }
  }

 private:
  std::string show(const Term& t) const {
    RenderOptions ro;
    ro.env = &st_.env;
    ro.is_global = [this](const std::string& s) { return resolves_globally(st_.env, scope_, s); };
    return render(t, {}, ro);
  }

  Elaborated elab(const SurfaceTerm& s, std::optional<Term> expected = std::nullopt) {
    Elaborator e(st_.env, st_.instances, scope_, eopts_);
    e.set_level_params({}, true);
    Term t = e.elab(s, expected);
    e.synthesize_pending(true);
    t = e.finalize(t, s.span.begin);
    // The kernel has the last word on well-typedness.
    TypeChecker tc(st_.env, opts_.flags);
    Term ty = tc.infer(t);
    return {t, ty};
  }

  void declaration(const SurfaceCommand& c) {
    ElabState next = st_;
    auto added = elaborate_command(next, c, scope_, eopts_);
    if (!opts_.forbid_axioms.empty() && (c.kind == CmdK::Def || c.kind == CmdK::Instance)) {
      for (auto& n : added) {
        std::set<Name> props, opaque;
        collect_axioms(next.env, n, props, opaque);
        for (auto& f : opts_.forbid_axioms)
          if (props.count(f) || opaque.count(f))
            throw Error(code::kForbiddenAxiom,
                        "'" + n.str() + "' depends on forbidden axiom '" + f.str() + "'",
                        c.span.begin);
      }
    }
    st_ = std::move(next);
  }

  void check(const SurfaceCommand& c) {
    const SurfaceTerm& s = *c.value;
    if (s.kind == SurfaceTerm::Kind::Ident && !s.levels) {
      Elaborator e(st_.env, st_.instances, scope_, eopts_);
      const Declaration* d = e.find_global(s.name, s.span.begin);
      std::string head = d->name.str();
      if (!d->uparams.empty()) {
        head += ".{";
        for (size_t i = 0; i < d->uparams.size(); ++i) head += (i ? ", " : "") + d->uparams[i].str();
        head += "}";
      }
      out_.output.push_back(head + " : " + show(d->type));
      return;
    }
    auto r = elab(s);
    out_.output.push_back(show(r.term) + " : " + show(r.type));
  }

  void whnf(const SurfaceCommand& c) {
    auto r = elab(*c.value);
    TypeChecker tc(st_.env, opts_.flags);
    out_.output.push_back(show(tc.whnf(r.term)));
  }

  void def_eq(const SurfaceCommand& c) {
    auto l = elab(*c.lhs);
    Elaborated r;
    try {
      r = elab(*c.rhs, l.type);
    } catch (const Error&) {
      r = elab(*c.rhs);
    }
    TypeChecker tc(st_.env, opts_.flags);
    if (opts_.trace_defeq) tc.set_trace([this](const std::string& line) { out_.output.push_back(line); });
    const bool eq = tc.is_def_eq(l.term, r.term);
    out_.output.push_back(eq ? "true" : "false");
    if (c.expect && *c.expect != eq)
      throw Error(code::kDefEqExpect,
                  std::string("definitional equality check returned ") + (eq ? "true" : "false") +
                      ", expected " + (*c.expect ? "true" : "false"),
                  c.span.begin, {show(l.term), show(r.term)});
  }

  void fail(const SurfaceCommand& c) {
    ElabState st = st_;
    ElabScope scope = scope_;
    CommandOutcome inner = execute_command(st, scope, *c.inner, opts_);
    if (inner.errors.empty())
      throw Error(code::kFailPassed,
                  "'" + to_string(c.inner->kind) + "' inside #fail succeeded unexpectedly", c.span.begin);
  }

  void print_axioms(const SurfaceCommand& c) {
    Elaborator e(st_.env, st_.instances, scope_, eopts_);
    const Declaration* d = nullptr;
    try {
      d = e.find_global(c.name, c.span.begin);
    } catch (const Error& err) {
      if (err.code() != code::kUnknownConst) throw;
      throw Error(code::kUnknownName, "unknown declaration '" + c.name + "'", c.span.begin);
    }
    AxiomReport rep;
    rep.name = d->name;
    rep.axioms = axioms_of(st_.env, d->name);
    rep.opaque = opaque_constants_of(st_.env, d->name);
    const std::string q = "'" + d->name.str() + "'";
    if (rep.axioms.empty())
      out_.output.push_back(q + " does not depend on any axioms");
    else
      out_.output.push_back(q + " depends on axioms: [" + join(rep.axioms) + "]");
    if (!rep.opaque.empty()) out_.output.push_back(q + " uses opaque constants: [" + join(rep.opaque) + "]");
    out_.axioms = std::move(rep);
  }

  void open(const SurfaceCommand& c) {
    auto decls = st_.env.declarations();
    for (auto& ns : c.namespaces) {
      const std::string prefix = ns + ".";
      bool any = std::any_of(decls.begin(), decls.end(),
                             [&](const DeclPtr& d) { return d->name.str().starts_with(prefix); });
      if (!any) out_.warnings.emplace_back(kOpenEmpty, "namespace '" + ns + "' has no declarations", c.span.begin);
      Name n(ns);
      if (std::find(scope_.open_namespaces.begin(), scope_.open_namespaces.end(), n) ==
          scope_.open_namespaces.end())
        scope_.open_namespaces.push_back(n);
    }
  }

  ElabState& st_;
  ElabScope& scope_;
  const CommandOptions& opts_;
  CommandOutcome& out_;
  ElabOptions eopts_;
};

}  // namespace

std::string Diagnostic::str() const {
  std::ostringstream os;
  os << file << ":" << line << ":" << column << ": " << (severity == Severity::Error ? "error" : "warning")
     << "[" << code << "]: " << message;
  return os.str();
}

size_t RunReport::errors() const {
  return std::count_if(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

size_t RunReport::warnings() const { return diagnostics.size() - errors(); }

std::vector<Name> axioms_of(const Environment& env, const Name& n) {
  std::set<Name> props, opaque;
  collect_axioms(env, n, props, opaque);
  return {props.begin(), props.end()};
}

std::vector<Name> opaque_constants_of(const Environment& env, const Name& n) {
  std::set<Name> props, opaque;
  collect_axioms(env, n, props, opaque);
  return {opaque.begin(), opaque.end()};
}

CommandOutcome execute_command(ElabState& st, ElabScope& scope, const SurfaceCommand& c,
                               const CommandOptions& opts) {
  CommandOutcome out;
  ElabState saved_st = st;
  ElabScope saved_scope = scope;
  try {
    CommandRunner(st, scope, opts, out).run(c);
  } catch (Error& e) {
    e.set_pos_if_missing(c.span.begin);
    out.errors.push_back(e);
  } catch (const std::exception& e) {
    out.errors.emplace_back(kInternal, std::string("internal error: ") + e.what(), c.span.begin);
  }
  if (!out.errors.empty()) {
    st = std::move(saved_st);
    scope = std::move(saved_scope);
  }
  return out;
}

std::string default_prelude_dir() {
  std::error_code ec;
  const std::string src = DGL_DEFAULT_PRELUDE_DIR;
  if (!src.empty() && fs::exists(fs::path(src) / "manifest.txt", ec)) return src;
  return DGL_INSTALLED_PRELUDE_DIR;
}

std::vector<std::string> prelude_files(const std::string& dir) {
  const fs::path manifest = fs::path(dir) / "manifest.txt";
  std::ifstream in(manifest);
  if (!in) throw Error(code::kIO, "cannot read prelude manifest '" + manifest.string() + "'");
  std::vector<std::string> files;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    files.push_back((fs::path(dir) / line.substr(b, e - b + 1)).string());
  }
  return files;
}

Session::Session(RunFlags flags) : flags_(std::move(flags)) {}

void Session::emit(Diagnostic d, std::ostream* err) {
  if (err) *err << d.str() << "\n";
  report_.diagnostics.push_back(std::move(d));
}

void Session::check_source(const std::string& path, std::string_view text, bool user_file,
                           std::ostream* out, std::ostream* err) {
  ++report_.files;
  auto diag = [&](const Error& e, Severity sev) {
    Diagnostic d;
    d.severity = sev;
    d.file = path;
    d.line = e.pos().line;
    d.column = e.pos().column;
    d.code = e.code();
    d.message = e.what();
    d.terms = e.terms();
    emit(std::move(d), err);
  };
  std::vector<Token> tokens;
  try {
    tokens = tokenize(text);
  } catch (const Error& e) {
    diag(e, Severity::Error);
    return;
  }
  ParseResult parsed = parse_file(tokens);
  // Parse errors and command diagnostics interleave in source order.
  size_t next_parse_error = 0;
  auto flush_parse_errors = [&](int before_line, int before_col) {
    while (next_parse_error < parsed.errors.size()) {
      const auto& p = parsed.errors[next_parse_error].pos();
      if (p.line > before_line || (p.line == before_line && p.column > before_col)) break;
      diag(parsed.errors[next_parse_error++], Severity::Error);
    }
  };
  CommandOptions opts;
  // The prelude asserts the default conversion relation, so the flag is user-only.
  opts.flags.structure_eta = user_file && flags_.eta_structures;
  opts.trace_defeq = user_file && flags_.trace_defeq;
  if (user_file) opts.forbid_axioms = flags_.forbid_axioms;
  ElabScope scope;
  for (auto& c : parsed.commands) {
    flush_parse_errors(c->span.begin.line, c->span.begin.column);
    ++report_.commands;
    CommandOutcome r = execute_command(state_, scope, *c, opts);
    if (out && user_file)
      for (auto& line : r.output) *out << line << "\n";
    for (auto& w : r.warnings) diag(w, Severity::Warning);
    for (auto& e : r.errors) diag(e, Severity::Error);
    if (r.axioms) report_.axiom_reports.push_back(std::move(*r.axioms));
  }
  flush_parse_errors(INT32_MAX, INT32_MAX);
}

bool Session::check_file(const std::string& path, bool user_file, std::ostream* out, std::ostream* err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::stringstream ss;
  ss << in.rdbuf();
  check_source(path, ss.str(), user_file, out, err);
  return true;
}

bool Session::load_prelude(std::ostream* err) {
  const std::string dir = flags_.prelude_dir.empty() ? default_prelude_dir() : flags_.prelude_dir;
  std::vector<std::string> files;
  try {
    files = prelude_files(dir);
  } catch (const Error& e) {
    if (err) *err << "dgl: " << e.what() << "\n";
    return false;
  }
  for (auto& f : files) {
    if (!check_file(f, false, nullptr, err)) {
      if (err) *err << "dgl: cannot read prelude file '" << f << "'\n";
      return false;
    }
  }
  return true;
}

ElabState build_prelude(const std::string& dir) {
  RunFlags flags;
  flags.prelude_dir = dir;
  Session s(flags);
  std::ostringstream err;
  if (!s.load_prelude(nullptr)) throw Error(code::kIO, "cannot load prelude from '" + dir + "'");
  for (auto& d : s.report().diagnostics)
    if (d.severity == Severity::Error) throw Error(d.code, d.str(), {d.line, d.column}, d.terms);
  return s.state();
}

int run(const std::vector<std::string>& paths, const RunFlags& flags, std::ostream& out, std::ostream& err,
        RunReport* report) {
  const auto start = std::chrono::steady_clock::now();
  for (auto& p : paths) {
    std::ifstream probe(p);
    if (!probe) {
      err << "dgl: cannot read file '" << p << "'\n";
      return 2;
    }
  }
  Session s(flags);
  if (!flags.no_prelude && !s.load_prelude(&err)) return 2;
  for (auto& p : paths) {
    if (!s.check_file(p, true, &out, &err)) {
      err << "dgl: cannot read file '" << p << "'\n";
      return 2;
    }
  }
  RunReport& r = s.report();
  r.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  out << "checked " << r.files << " files, " << r.commands << " commands: " << r.errors() << " errors, "
      << r.warnings() << " warnings\n";
  out << "wall-time: " << static_cast<long long>(r.wall_time_ms) << " ms\n";
  const int code = r.errors() ? 1 : 0;
  if (report) *report = std::move(r);
  return code;
}

}  // namespace dgl
