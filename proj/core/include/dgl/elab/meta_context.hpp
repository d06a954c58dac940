#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "dgl/kernel/type_checker.hpp"
#include "dgl/syntax/ast.hpp"

namespace dgl {

// Metavariable table for one command. Ids are dense, starting at 0.
// Assignments are kept acyclic by the occurs check in the unifier.
class MetaContext : public MetaHooks {
 public:
  struct MVarDecl {
    Term type;
    std::optional<Term> value;
    // Free variables the assignment may mention.
    std::vector<uint64_t> scope;
    Span span;
    std::string origin;  // shown in unsolved-metavariable errors
  };

  Term new_mvar(Term type, std::vector<uint64_t> scope, Span span = {}, std::string origin = "placeholder");
  Level new_level_mvar();

  const MVarDecl& decl(uint64_t id) const { return mvars_.at(id); }
  bool is_assigned(uint64_t id) const { return mvars_.at(id).value.has_value(); }
  bool is_level_assigned(uint64_t id) const { return levels_.at(id).has_value(); }
  void assign(uint64_t id, Term value) { mvars_.at(id).value = std::move(value); }
  void assign_level(uint64_t id, Level value) { levels_.at(id) = std::move(value); }
  bool in_scope(uint64_t mvar, uint64_t fvar) const;

  size_t num_mvars() const { return mvars_.size(); }
  size_t num_level_mvars() const { return levels_.size(); }

  std::optional<Term> assignment(uint64_t mvar) const override;
  std::optional<Term> mvar_type(uint64_t mvar) const override;
  std::optional<Level> level_assignment(uint64_t mvar) const override;

  // Level constraints the unifier could not decide yet; re-checked once the
  // command is fully elaborated.
  void postpone(Level a, Level b) { postponed_.emplace_back(std::move(a), std::move(b)); }
  const std::vector<std::pair<Level, Level>>& postponed() const { return postponed_; }
  void clear_postponed() { postponed_.clear(); }

  // Cheap value snapshot used for backtracking.
  struct Checkpoint {
    std::vector<MVarDecl> mvars;
    std::vector<std::optional<Level>> levels;
    size_t num_postponed = 0;
  };
  Checkpoint save() const { return {mvars_, levels_, postponed_.size()}; }
  void restore(const Checkpoint& c) {
    mvars_ = c.mvars;
    levels_ = c.levels;
    postponed_.resize(std::min(postponed_.size(), c.num_postponed));
  }

 private:
  std::vector<MVarDecl> mvars_;
  std::vector<std::optional<Level>> levels_;
  std::vector<std::pair<Level, Level>> postponed_;
};

}  // namespace dgl
