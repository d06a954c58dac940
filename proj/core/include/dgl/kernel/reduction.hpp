#pragma once

#include <optional>

#include "dgl/kernel/type_checker.hpp"

namespace dgl {

// Testing oracle, independent of TypeChecker: one leftmost-outermost
// beta/delta/zeta/iota step anywhere in `t`, or nullopt when `t` is normal.
// Iota fires only on a syntactically constructor-headed major premise.
std::optional<Term> small_step(const Environment& env, const Term& t);

// Iterates `small_step` to a normal form. Throws E-FUEL when more than
// `fuel` steps would be needed.
Term normalize(const Environment& env, const Term& t, size_t fuel);

// Kernel iota step on a closed recursor application.
std::optional<Term> iota_step(const Environment& env, const Term& t);

// Full normal form computed by whnf on the head and recursion into the
// spine and binders.
Term whnf_normal_form(const Environment& env, const Term& t);

unsigned definition_height(const Environment& env, const Name& n);

}  // namespace dgl
