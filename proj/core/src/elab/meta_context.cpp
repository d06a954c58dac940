#include "dgl/elab/meta_context.hpp"

#include <algorithm>

namespace dgl {

Term MetaContext::new_mvar(Term type, std::vector<uint64_t> scope, Span span, std::string origin) {
  std::sort(scope.begin(), scope.end());
  mvars_.push_back({std::move(type), std::nullopt, std::move(scope), span, std::move(origin)});
  return Term::mvar(mvars_.size() - 1);
}

Level MetaContext::new_level_mvar() {
  levels_.emplace_back();
  return Level::mvar(levels_.size() - 1);
}

bool MetaContext::in_scope(uint64_t mvar, uint64_t fvar) const {
  const auto& s = mvars_.at(mvar).scope;
  return std::binary_search(s.begin(), s.end(), fvar);
}

std::optional<Term> MetaContext::assignment(uint64_t mvar) const {
  if (mvar >= mvars_.size()) return std::nullopt;
  return mvars_[mvar].value;
}

std::optional<Term> MetaContext::mvar_type(uint64_t mvar) const {
  if (mvar >= mvars_.size()) return std::nullopt;
  return mvars_[mvar].type;
}

std::optional<Level> MetaContext::level_assignment(uint64_t mvar) const {
  if (mvar >= levels_.size()) return std::nullopt;
  return levels_[mvar];
}

}  // namespace dgl
