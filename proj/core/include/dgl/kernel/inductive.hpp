#pragma once

#include <vector>

#include "dgl/kernel/environment.hpp"

namespace dgl {

// A single inductive family. `type` is `Pi (params) (indices), Sort l`;
// every constructor type is closed and of the form
// `Pi (params) (fields), name params indices`.
struct InductiveSpec {
  struct Ctor {
    Name name;
    Term type;
  };

  Name name;
  std::vector<Name> uparams;
  unsigned num_params = 0;
  Term type;
  std::vector<Ctor> ctors;
};

struct EliminationRule {
  // Motive may land in any sort, otherwise only in Prop.
  bool large = false;
  // Prop-valued (or possibly Prop-valued) yet large: the subsingleton case.
  bool subsingleton = false;
};

struct CheckedInductive {
  InductiveSpec spec;
  unsigned num_indices = 0;
  Level result_level;
  bool is_recursive = false;
  EliminationRule elim;
  std::vector<std::vector<Name>> field_names;
};

// Errors: E-POSITIVITY, E-UNIVERSE, E-INDUCTIVE, plus type errors.
CheckedInductive validate_inductive(const Environment& env, const InductiveSpec& spec);

// `env` must already contain the inductive and its constructors.
Declaration generate_recursor(const Environment& env, const CheckedInductive& ind);

// Validates, then adds the inductive, its constructors and `name.rec`.
Environment add_inductive(const Environment& env, const InductiveSpec& spec);

}  // namespace dgl
