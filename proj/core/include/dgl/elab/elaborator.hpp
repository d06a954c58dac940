#pragma once

#include <map>
#include <optional>
#include <unordered_set>
#include <vector>

#include "dgl/elab/meta_context.hpp"
#include "dgl/elab/unifier.hpp"
#include "dgl/syntax/ast.hpp"

namespace dgl {

// Class name -> instance names in declaration order.
class InstanceTable {
 public:
  void add_class(const Name& cls);
  bool is_class(const Name& cls) const { return classes_.count(cls) > 0; }
  // Throws E-INSTANCE if `cls` is not a registered class.
  void add_instance(const Name& cls, const Name& inst);
  const std::vector<Name>& instances_of(const Name& cls) const;

 private:
  std::unordered_set<Name> classes_;
  std::map<Name, std::vector<Name>> by_class_;
};

// Everything a command may extend.
struct ElabState {
  Environment env;
  InstanceTable instances;
  // Structure name -> names reachable as `S.f` on a value of `S`: its own
  // fields followed by the fields forwarded from `extends`.
  std::map<Name, std::vector<std::string>> structure_fields;
};

// Name-resolution state of one file.
struct ElabScope {
  std::vector<Name> open_namespaces;
};

struct ElabOptions {
  ConversionFlags flags;
  unsigned instance_depth = 32;
};

// Term elaboration for one command. Locals are free variables of the
// internal checker; unassigned metavariables never escape `finalize`.
class Elaborator {
 public:
  Elaborator(Environment env, const InstanceTable& instances, ElabScope scope = {},
             ElabOptions opts = {});
  Elaborator(const Elaborator&) = delete;
  Elaborator& operator=(const Elaborator&) = delete;

  TypeChecker& tc() { return tc_; }
  MetaContext& mctx() { return mctx_; }

  // --- universe names ---
  // With `auto_bind`, unknown level names are appended to the parameters.
  void set_level_params(std::vector<Name> params, bool auto_bind);
  const std::vector<Name>& level_params() const { return level_params_; }
  // Names inside the declaration `ns.x` also resolve relative to `ns`.
  void set_decl_namespace(Name ns) { decl_ns_ = std::move(ns); }

  // Global resolution: enclosing namespaces of the declaration (innermost
  // first), the exact name, then opened namespaces. Throws E-UNKNOWN-CONST
  // or E-AMBIGUOUS.
  const Declaration* find_global(const std::string& name, SourcePos pos) const;

  // --- locals ---
  Term push_local(Name name, Term type, BinderStyle style = BinderStyle::Explicit,
                  std::optional<Term> value = std::nullopt);
  void pop_locals(size_t n);
  size_t num_locals() const { return locals_.size(); }
  // Elaborates bracketed binders and pushes them; returns the new fvars.
  std::vector<Term> elab_binders(const std::vector<SurfaceBinder>& bs);

  // --- terms ---
  Term elab(const SurfaceTerm& s, const std::optional<Term>& expected);
  Term elab_type(const SurfaceTerm& s);
  Level elab_level(const SurfaceLevel& l);
  Term infer(const Term& t);
  void ensure_has_type(const Term& e, const Term& expected, SourcePos pos);

  // Resolves pending instance problems; with `final`, also those whose goal
  // still has metavariables, and re-checks postponed level constraints.
  void synthesize_pending(bool final);
  std::optional<Term> synth_instance(const Term& goal, unsigned depth = 0);

  // Instantiates and rejects leftover metavariables.
  Term finalize(const Term& t, SourcePos pos);
  // Closes `body` over `fvars` (outermost first) after instantiation. With
  // `style`, every binder except instance-implicit ones gets that style.
  Term close(bool pi, std::span<const Term> fvars, const Term& body,
             std::optional<BinderStyle> style = std::nullopt);

 private:
  Term elab_core(const SurfaceTerm& s, const std::optional<Term>& expected);
  Term elab_app(const SurfaceTerm& s, const std::optional<Term>& expected);
  Term elab_lam(const SurfaceTerm& s, const std::optional<Term>& expected);
  Term elab_pi(const SurfaceTerm& s);
  Term elab_let(const SurfaceTerm& s, const std::optional<Term>& expected);
  Term resolve_ident(const SurfaceTerm& s);
  // `x.f.g` for a local `x`: `S.f x` where `S` heads the type of `x`, iterated.
  Term field_access(Term cur, const std::vector<std::string>& fields, Span span);
  std::optional<Term> find_local(const std::string& name) const;
  Term new_mvar(Term type, Span span, std::string origin);
  Term new_type_mvar(Span span);
  // low-level unification entry point respecting currently open locals
  bool unify(const Term& a, const Term& b);
  std::optional<Term> try_instance(const Term& cand, const Term& cand_type, const Term& goal,
                                   unsigned depth);

  Environment env_;
  const InstanceTable& instances_;
  ElabScope scope_;
  ElabOptions opts_;
  MetaContext mctx_;
  TypeChecker tc_;
  std::vector<Term> locals_;
  std::unordered_set<uint64_t> open_;
  std::vector<Name> level_params_;
  bool auto_bind_ = false;
  Name decl_ns_;
  std::vector<uint64_t> pending_;
  Unifier unifier_;
};

// Elaborates `s` against `expected` over the de Bruijn context `ctx`; the
// result has no metavariables.
Term elaborate_term(const Environment& env, const LocalContext& ctx, const InstanceTable& instances,
                    const SurfaceTerm& s, std::optional<Term> expected = std::nullopt,
                    const ElabScope& scope = {}, ElabOptions opts = {});

// Throws E-INSTANCE when no instance is found, E-INSTANCE-DEPTH when the
// search nests deeper than `depth`.
Term resolve_instance(const Environment& env, const InstanceTable& instances, const Term& goal,
                      unsigned depth = 32);

// def, axiom, inductive, structure, class, instance. Extends `st` and
// returns the names added, in order.
std::vector<Name> elaborate_command(ElabState& st, const SurfaceCommand& c, const ElabScope& scope = {},
                                    ElabOptions opts = {});

// Structure or class: the inductive, its constructor and recursor, then the
// projections in field order and the forwarding projections.
std::vector<Declaration> elaborate_structure(ElabState& st, const SurfaceCommand& c,
                                             const ElabScope& scope = {}, ElabOptions opts = {});

}  // namespace dgl
