#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dgl/kernel/level.hpp"
#include "dgl/kernel/name.hpp"

namespace dgl {

enum class BinderStyle : uint8_t { Explicit, Implicit, InstImplicit };

// Kernel terms. Bound variables are de Bruijn indices (`BVar`). `FVar` is a
// locally-nameless free variable introduced when the checker goes under a
// binder; `MVar` is an elaborator metavariable and never reaches a checked
// declaration.
enum class TermKind : uint8_t { BVar, FVar, MVar, Sort, Const, App, Lam, Pi, Let };

class Term {
 public:
  Term() = default;

  static Term bvar(uint32_t index);
  static Term fvar(uint64_t id);
  static Term mvar(uint64_t id);
  static Term sort(Level l);
  static Term constant(Name n, std::vector<Level> levels = {});
  static Term app(Term fn, Term arg);
  static Term lam(Name binder, BinderStyle style, Term type, Term body);
  static Term pi(Name binder, BinderStyle style, Term type, Term body);
  static Term let(Name binder, Term type, Term value, Term body);

  explicit operator bool() const { return node_ != nullptr; }
  const void* ptr() const { return node_.get(); }

  TermKind kind() const;
  bool is_bvar() const { return kind() == TermKind::BVar; }
  bool is_fvar() const { return kind() == TermKind::FVar; }
  bool is_mvar() const { return kind() == TermKind::MVar; }
  bool is_sort() const { return kind() == TermKind::Sort; }
  bool is_const() const { return kind() == TermKind::Const; }
  bool is_app() const { return kind() == TermKind::App; }
  bool is_lam() const { return kind() == TermKind::Lam; }
  bool is_pi() const { return kind() == TermKind::Pi; }
  bool is_let() const { return kind() == TermKind::Let; }
  bool is_binding() const { return is_lam() || is_pi(); }

  uint32_t bvar_index() const;
  uint64_t fvar_id() const;
  uint64_t mvar_id() const;
  const Level& level() const;
  const Name& const_name() const;
  const std::vector<Level>& const_levels() const;
  const Term& app_fn() const;
  const Term& app_arg() const;
  const Name& binder_name() const;
  BinderStyle binder_style() const;
  const Term& binder_type() const;
  const Term& binder_body() const;
  const Term& let_type() const;
  const Term& let_value() const;
  const Term& let_body() const;

  // One more than the largest loose bound variable index, 0 if closed.
  uint32_t loose_bvar_range() const;
  bool has_loose_bvars() const { return loose_bvar_range() > 0; }
  bool has_fvar() const;
  // Term or level metavariables.
  bool has_mvar() const;
  bool has_level_param() const;
  size_t hash() const;

  // Structural identity up to binder names (alpha-equivalence).
  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

  struct Node;

 private:
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Term::Node {
  TermKind kind;
  BinderStyle style = BinderStyle::Explicit;
  bool has_fvar = false;
  bool has_mvar = false;
  bool has_level_param = false;
  uint32_t loose_range = 0;
  size_t hash = 0;
  uint64_t id = 0;
  Level level;
  Name name;
  std::vector<Level> levels;
  Term a, b, c;
  explicit Node(TermKind k) : kind(k) {}
};

inline TermKind Term::kind() const { return node_->kind; }
inline uint32_t Term::bvar_index() const { return static_cast<uint32_t>(node_->id); }
inline uint64_t Term::fvar_id() const { return node_->id; }
inline uint64_t Term::mvar_id() const { return node_->id; }
inline const Level& Term::level() const { return node_->level; }
inline const Name& Term::const_name() const { return node_->name; }
inline const std::vector<Level>& Term::const_levels() const { return node_->levels; }
inline const Term& Term::app_fn() const { return node_->a; }
inline const Term& Term::app_arg() const { return node_->b; }
inline const Name& Term::binder_name() const { return node_->name; }
inline BinderStyle Term::binder_style() const { return node_->style; }
inline const Term& Term::binder_type() const { return node_->a; }
inline const Term& Term::binder_body() const { return node_->b; }
inline const Term& Term::let_type() const { return node_->a; }
inline const Term& Term::let_value() const { return node_->b; }
inline const Term& Term::let_body() const { return node_->c; }
inline uint32_t Term::loose_bvar_range() const { return node_->loose_range; }
inline bool Term::has_fvar() const { return node_->has_fvar; }
inline bool Term::has_mvar() const { return node_->has_mvar; }
inline bool Term::has_level_param() const { return node_->has_level_param; }
inline size_t Term::hash() const { return node_->hash; }

struct TermHash {
  size_t operator()(const Term& t) const noexcept { return t.hash(); }
};

// --- application spines ----------------------------------------------------

Term mk_app(Term fn, std::span<const Term> args);
Term mk_app(Term fn, std::initializer_list<Term> args);
const Term& get_app_fn(const Term& t);
std::vector<Term> get_app_args(const Term& t);
Term get_app_fn_args(const Term& t, std::vector<Term>& args);
size_t get_app_num_args(const Term& t);

// --- de Bruijn calculus ----------------------------------------------------

// Adds `amount` to every loose bound variable with index >= `cutoff`.
Term lift(const Term& t, uint32_t amount, uint32_t cutoff = 0);
// Substitutes `value` for bound variable 0 of a binder body; other loose
// indices shift down by one. `value` is lifted as it passes under binders.
Term instantiate(const Term& body, const Term& value);
// Simultaneous substitution: #i := values[values.size() - 1 - i] for
// i < values.size(), so `values` is in binder (outermost first) order.
Term instantiate_rev(const Term& body, std::span<const Term> values);
// Replaces free variables `fvars[k]` (outermost first) by bound variables,
// the inverse of `instantiate_rev`.
Term abstract(const Term& t, std::span<const Term> fvars);
bool has_loose_bvar(const Term& t, uint32_t index);

Term instantiate_levels(const Term& t, const std::vector<Name>& params,
                        const std::vector<Level>& levels);

// Generic top-down rewrite. `f(t, depth)` may return a replacement; `depth`
// counts binders entered so far. `f` must be pure; shared subterms are rewritten once.
Term replace(const Term& t,
             const std::function<std::optional<Term>(const Term&, uint32_t)>& f);

// Preorder visit; return false to skip children.
void for_each(const Term& t, const std::function<bool(const Term&)>& f);

std::vector<Name> collect_constants(const Term& t);
void collect_level_params(const Term& t, std::vector<Name>& out);
bool occurs_const(const Term& t, const Name& n);
bool occurs_fvar(const Term& t, uint64_t fvar_id);

// Fresh ids for free variables; process-wide and thread-safe.
uint64_t next_fvar_id();

}  // namespace dgl
