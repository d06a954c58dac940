#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dgl/kernel/name.hpp"

namespace dgl {

enum class LevelKind : uint8_t { Zero, Succ, Max, IMax, Param, MVar };

// Universe level expression. Immutable, shared. `MVar` levels only ever
// appear during elaboration; the kernel rejects declarations containing them.
class Level {
 public:
  Level();  // zero

  static Level zero();
  static Level succ(Level l);
  static Level max(Level a, Level b);
  static Level imax(Level a, Level b);
  static Level param(Name n);
  static Level mvar(uint64_t id);
  static Level of_nat(unsigned n);

  LevelKind kind() const;
  bool is_zero() const { return kind() == LevelKind::Zero; }
  const Level& succ_of() const;
  const Level& lhs() const;
  const Level& rhs() const;
  const Name& param_name() const;
  uint64_t mvar_id() const;

  bool has_param() const;
  bool has_mvar() const;
  size_t hash() const;

  // succ^n(zero) -> n
  std::optional<unsigned> to_nat() const;
  // Strips outer succs: returns (base, count).
  std::pair<Level, unsigned> to_offset() const;

  friend bool operator==(const Level& a, const Level& b);
  friend bool operator!=(const Level& a, const Level& b) { return !(a == b); }

 struct Node;  // opaque

 private:
  explicit Level(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

std::string to_string(const Level& l);

// Applies the usual local simplifications (max with zero, imax into succ,
// idempotent max). Denotation is preserved.
Level simplify(const Level& l);

Level instantiate_level(const Level& l, const std::vector<Name>& params,
                        const std::vector<Level>& values);
Level replace_level(const Level& l,
                    const std::function<std::optional<Level>(const Level&)>& f);
void collect_level_params(const Level& l, std::vector<Name>& out);

// Decision procedures over level expressions. Metavariables are treated as
// opaque parameters.
bool level_eq(const Level& a, const Level& b);
bool level_leq(const Level& a, const Level& b);
// True iff `l` denotes a level >= 1 under every parameter assignment.
bool is_never_zero(const Level& l);

}  // namespace dgl
