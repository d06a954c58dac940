#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "dgl/kernel/term.hpp"

namespace dgl {

// De Bruijn telescope. Entry i may mention only bound variables that refer to
// entries < i; `var 0` refers to the last entry.
class LocalContext {
 public:
  struct Entry {
    Name name;
    BinderStyle style = BinderStyle::Explicit;
    Term type;
    std::optional<Term> value;
  };

  LocalContext() = default;

  LocalContext push(Name name, Term type, BinderStyle style = BinderStyle::Explicit) const;
  LocalContext push_let(Name name, Term type, Term value) const;

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  // Entry referred to by `var index` at the end of the telescope.
  const Entry& entry_for_var(uint32_t index) const;
  // Type of `var index`, lifted into the full context.
  Term type_of_var(uint32_t index) const;
  std::optional<Term> value_of_var(uint32_t index) const;

 private:
  std::vector<Entry> entries_;
};

// Locally-nameless declarations of free variables. The type checker and the
// elaborator open binders by minting a fresh fvar here.
class FVarContext {
 public:
  struct Decl {
    uint64_t id = 0;
    Name name;
    BinderStyle style = BinderStyle::Explicit;
    Term type;
    std::optional<Term> value;
  };

  Term add(Name name, Term type, BinderStyle style = BinderStyle::Explicit,
           std::optional<Term> value = std::nullopt);
  const Decl* find(uint64_t id) const;
  const Decl& get(uint64_t id) const;

  // Opens a de Bruijn telescope: one fvar per entry, outermost first.
  std::vector<Term> open(const LocalContext& ctx);

  // Closes `body` over `fvars` (outermost first), using the declared names,
  // styles and types. Let-fvars become let binders in both forms.
  Term mk_pi(std::span<const Term> fvars, const Term& body) const;
  Term mk_lambda(std::span<const Term> fvars, const Term& body) const;

 private:
  Term mk_binding(bool pi, std::span<const Term> fvars, const Term& body) const;

  std::unordered_map<uint64_t, Decl> decls_;
};

}  // namespace dgl
