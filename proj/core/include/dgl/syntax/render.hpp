#pragma once

#include <functional>
#include <optional>
#include <string>

#include "dgl/kernel/environment.hpp"
#include "dgl/kernel/local_context.hpp"

namespace dgl {

struct RenderOptions {
  // Used for `@` insertion on heads with implicit binders and to avoid
  // binder names that would capture a global.
  const Environment* env = nullptr;
  // Names and types of free variables.
  const FVarContext* fvars = nullptr;
  // True iff a bare identifier resolves to a global in the reading session
  // (e.g. through `open`); such names are never reused for binders.
  std::function<bool(const std::string&)> is_global;
};

// Fully explicit surface text for `t`. Bound variables are named from
// `names` and from the binders of `t`, freshened on clashes; the output
// elaborates back to `t` in a session seeing the same globals.
std::string render(const Term& t, const LocalContext& names = {}, const RenderOptions& opts = {});

// Surface text of a level: `0`, `u+1`, `max u v` and so on.
std::string render_level(const Level& l);

// `Prop`, `Type`, `Type u`, `Sort u`.
std::string render_sort(const Level& l);

}  // namespace dgl
