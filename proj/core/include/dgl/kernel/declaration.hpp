#pragma once

#include <memory>
#include <vector>

#include "dgl/kernel/term.hpp"

namespace dgl {

enum class DeclKind : uint8_t { Definition, Axiom, Inductive, Constructor, Recursor };

// One iota rule: `rec params motive minors indices (ctor params fields)`
// rewrites to `rhs params motive minors fields`, where `rhs` is a closed
// lambda abstraction over exactly that argument list.
struct RecRule {
  Name ctor;
  unsigned num_fields = 0;
  Term rhs;
};

struct Declaration {
  DeclKind kind = DeclKind::Axiom;
  Name name;
  std::vector<Name> uparams;
  Term type;

  // Definition
  Term value;
  unsigned height = 0;

  // Inductive, Constructor, Recursor
  Name induct;
  unsigned num_params = 0;
  unsigned num_indices = 0;

  // Inductive
  std::vector<Name> ctors;
  bool is_recursive = false;

  // Constructor
  unsigned ctor_index = 0;
  unsigned num_fields = 0;
  std::vector<Name> field_names;

  // Recursor
  unsigned num_minors = 0;
  bool large_elim = false;
  std::vector<RecRule> rules;

  bool is_definition() const { return kind == DeclKind::Definition; }
  bool is_axiom() const { return kind == DeclKind::Axiom; }
  bool is_inductive() const { return kind == DeclKind::Inductive; }
  bool is_constructor() const { return kind == DeclKind::Constructor; }
  bool is_recursor() const { return kind == DeclKind::Recursor; }

  // Position of the major premise among a recursor's arguments.
  unsigned major_index() const { return num_params + 1 + num_minors + num_indices; }
  const RecRule* rule_for(const Name& ctor) const;

  static Declaration definition(Name name, std::vector<Name> uparams, Term type, Term value);
  static Declaration axiom(Name name, std::vector<Name> uparams, Term type);
};

using DeclPtr = std::shared_ptr<const Declaration>;

}  // namespace dgl
