#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "dgl/kernel/environment.hpp"
#include "dgl/kernel/local_context.hpp"

namespace dgl {

struct ConversionFlags {
  bool function_eta = true;
  bool structure_eta = false;
  bool proof_irrelevance = true;
};

class UnfoldPolicy {
 public:
  enum class Kind : uint8_t { All, None, Only };

  static UnfoldPolicy all() { return UnfoldPolicy(Kind::All, {}); }
  static UnfoldPolicy none() { return UnfoldPolicy(Kind::None, {}); }
  static UnfoldPolicy only(std::unordered_set<Name> names) {
    return UnfoldPolicy(Kind::Only, std::move(names));
  }

  Kind kind() const { return kind_; }
  bool allows(const Name& n) const {
    return kind_ == Kind::All || (kind_ == Kind::Only && names_.count(n) > 0);
  }

 private:
  UnfoldPolicy(Kind k, std::unordered_set<Name> names) : kind_(k), names_(std::move(names)) {}
  Kind kind_;
  std::unordered_set<Name> names_;
};

// Lets the elaborator run kernel reduction and inference over terms that
// still contain metavariables. The kernel proper never installs hooks.
class MetaHooks {
 public:
  virtual ~MetaHooks() = default;
  virtual std::optional<Term> assignment(uint64_t mvar) const = 0;
  virtual std::optional<Term> mvar_type(uint64_t mvar) const = 0;
  virtual std::optional<Level> level_assignment(uint64_t mvar) const = 0;
};

using TraceSink = std::function<void(const std::string&)>;

// Checker state for one command. Caches live as long as the instance.
class TypeChecker {
 public:
  explicit TypeChecker(Environment env, ConversionFlags flags = {}, const MetaHooks* hooks = nullptr);

  const Environment& env() const { return env_; }
  const ConversionFlags& flags() const { return flags_; }
  FVarContext& lctx() { return lctx_; }
  const FVarContext& lctx() const { return lctx_; }
  void set_trace(TraceSink sink) { trace_ = std::move(sink); }

  Term whnf_core(const Term& t);
  Term whnf(const Term& t, const UnfoldPolicy& policy = UnfoldPolicy::all());
  // Head iota step when the major premise reduces to a constructor.
  std::optional<Term> iota_step(const Term& t);
  // Unfolds a definition-headed application once.
  std::optional<Term> unfold_definition(const Term& t);

  // With `infer_only`, argument and annotation checks are skipped.
  Term infer(const Term& t, bool infer_only = false);
  // Throws E-TYPE-MISMATCH rendering both types.
  void check(const Term& t, const Term& expected);
  bool is_def_eq(const Term& t, const Term& s);

  Term ensure_sort(const Term& type);
  Term ensure_pi(const Term& type);
  // Level of the sort `type` lives in.
  Level sort_level(const Term& type);
  bool is_prop(const Term& type);
  bool is_proof(const Term& t);

  // Replaces assigned metavariables (via hooks) throughout.
  Term instantiate_mvars(const Term& t) const;
  Level instantiate_level_mvars(const Level& l) const;

  std::string render(const Term& t) const;

 private:
  Term whnf_core_impl(const Term& t);
  Term infer_core(const Term& t, bool infer_only);
  Term infer_app(const Term& t, bool infer_only);
  Term infer_binding(const Term& t, bool infer_only);
  Term infer_let(const Term& t, bool infer_only);
  Term infer_const(const Term& t, bool infer_only);

  bool def_eq_core(const Term& t, const Term& s);
  std::optional<bool> quick_def_eq(const Term& t, const Term& s);
  bool def_eq_binding(const Term& t, const Term& s);
  bool def_eq_args(const Term& t, const Term& s);
  bool def_eq_levels(const std::vector<Level>& a, const std::vector<Level>& b) const;
  bool def_eq_level(const Level& a, const Level& b) const;
  std::optional<bool> lazy_delta(Term& t, Term& s);
  bool try_function_eta(const Term& t, const Term& s);
  bool try_structure_eta(const Term& t, const Term& s);
  bool proof_irrel_eq(const Term& t, const Term& s, bool& decided);
  const Declaration* unfoldable_head(const Term& t) const;

  void trace(const std::string& line) const {
    if (trace_) trace_(line);
  }

  struct PairHash {
    size_t operator()(const std::pair<const void*, const void*>& p) const noexcept {
      return std::hash<const void*>{}(p.first) * 31 + std::hash<const void*>{}(p.second);
    }
  };

  Environment env_;
  ConversionFlags flags_;
  const MetaHooks* hooks_;
  FVarContext lctx_;
  TraceSink trace_;
  unsigned def_eq_depth_ = 0;

  std::unordered_map<Term, Term, TermHash> whnf_core_cache_;
  std::unordered_map<Term, Term, TermHash> whnf_cache_;
  std::unordered_map<Term, Term, TermHash> infer_cache_[2];
  // Keeps both terms alive so the pointer key stays unique.
  std::unordered_map<std::pair<const void*, const void*>, std::pair<Term, Term>, PairHash> eq_cache_;
};

// --- context-based API ------------------------------------------------------
// These open `ctx` as free variables, run a fresh checker and abstract the
// result back over the telescope.

Term whnf(const Environment& env, const LocalContext& ctx, const Term& t,
          const UnfoldPolicy& policy = UnfoldPolicy::all());
bool def_eq(const Environment& env, const LocalContext& ctx, const Term& t, const Term& u,
            ConversionFlags flags = {});
Term infer(const Environment& env, const LocalContext& ctx, const Term& t);
// Throws on failure, E-TYPE-MISMATCH when the types differ.
void check(const Environment& env, const LocalContext& ctx, const Term& t, const Term& expected);

// Checks a definition or axiom against `env`. Inductive families are
// checked by `add_inductive`; recursors and constructors are re-checked for
// type well-formedness only.
Declaration check_decl(const Environment& env, Declaration d, ConversionFlags flags = {});

}  // namespace dgl
