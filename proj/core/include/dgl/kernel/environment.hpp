#pragma once

#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "dgl/kernel/declaration.hpp"

namespace dgl {

// Persistent, append-only store of declarations. Copies are cheap and an
// extension never changes an existing value. Iteration is in insertion order.
class Environment {
 public:
  Environment();

  const Declaration* find(const Name& n) const;
  // Throws E-UNKNOWN-CONST.
  const Declaration& get(const Name& n) const;
  bool contains(const Name& n) const { return find(n) != nullptr; }
  size_t size() const { return size_; }
  // Snapshot of the declarations in insertion order.
  std::vector<DeclPtr> declarations() const;

  // Height used by lazy delta; 0 for anything that is not a definition.
  unsigned height_of(const Name& n) const;

  friend Environment env_add(const Environment& env, Declaration d);

 private:
  // Shared append-only storage. A value sees the first `size_` entries; an
  // extension appends in place when it is the newest value over the storage
  // and copies the visible prefix otherwise.
  struct Storage {
    std::mutex mu;
    std::vector<DeclPtr> order;
    std::unordered_map<Name, size_t> index;
  };
  std::shared_ptr<Storage> storage_;
  size_t size_ = 0;
};

// Appends `d`. Errors: E-DUPLICATE for a present name, E-DEPENDENCY when `d`
// mentions a constant not yet present (a recursor may mention itself). The
// definition height is computed here.
Environment env_add(const Environment& env, Declaration d);

}  // namespace dgl
