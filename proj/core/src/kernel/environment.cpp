#include "dgl/kernel/environment.hpp"

#include <algorithm>

#include "dgl/error.hpp"

namespace dgl {

const RecRule* Declaration::rule_for(const Name& ctor) const {
  for (auto& r : rules)
    if (r.ctor == ctor) return &r;
  return nullptr;
}

Declaration Declaration::definition(Name name, std::vector<Name> uparams, Term type, Term value) {
  Declaration d;
  d.kind = DeclKind::Definition;
  d.name = std::move(name);
  d.uparams = std::move(uparams);
  d.type = std::move(type);
  d.value = std::move(value);
  return d;
}

Declaration Declaration::axiom(Name name, std::vector<Name> uparams, Term type) {
  Declaration d;
  d.kind = DeclKind::Axiom;
  d.name = std::move(name);
  d.uparams = std::move(uparams);
  d.type = std::move(type);
  return d;
}

Environment::Environment() : storage_(std::make_shared<Storage>()) {}

const Declaration* Environment::find(const Name& n) const {
  std::lock_guard lock(storage_->mu);
  auto it = storage_->index.find(n);
  if (it == storage_->index.end() || it->second >= size_) return nullptr;
  return storage_->order[it->second].get();
}

const Declaration& Environment::get(const Name& n) const {
  if (auto* d = find(n)) return *d;
  throw Error(code::kUnknownConst, "unknown constant '" + n.str() + "'");
}

std::vector<DeclPtr> Environment::declarations() const {
  std::lock_guard lock(storage_->mu);
  return std::vector<DeclPtr>(storage_->order.begin(), storage_->order.begin() + size_);
}

unsigned Environment::height_of(const Name& n) const {
  auto* d = find(n);
  return d && d->is_definition() ? d->height : 0;
}

namespace {

void check_dependencies(const Environment& env, const Declaration& d, const Term& t) {
  if (!t) return;
  for (auto& c : collect_constants(t)) {
    if (c == d.name && d.is_recursor()) continue;
    if (!env.contains(c))
      throw Error(code::kDependency, "declaration '" + d.name.str() +
                                         "' depends on '" + c.str() + "', which is not declared before it");
  }
}

}  // namespace

Environment env_add(const Environment& env, Declaration d) {
  if (env.contains(d.name))
    throw Error(code::kDuplicate, "duplicate declaration '" + d.name.str() + "'");
  check_dependencies(env, d, d.type);
  check_dependencies(env, d, d.value);
  for (auto& r : d.rules) check_dependencies(env, d, r.rhs);
  if (d.is_definition()) {
    bool any = false;
    unsigned h = 0;
    for (auto& c : collect_constants(d.value)) {
      auto* ref = env.find(c);
      if (ref && ref->is_definition()) {
        any = true;
        h = std::max(h, ref->height);
      }
    }
    d.height = any ? h + 1 : 0;
  }
  auto ptr = std::make_shared<const Declaration>(std::move(d));
  Environment out;
  {
    std::lock_guard lock(env.storage_->mu);
    if (env.storage_->order.size() == env.size_) {
      out.storage_ = env.storage_;
    } else {
      auto copy = std::make_shared<Environment::Storage>();
      copy->order.assign(env.storage_->order.begin(), env.storage_->order.begin() + env.size_);
      for (size_t i = 0; i < copy->order.size(); ++i) copy->index.emplace(copy->order[i]->name, i);
      out.storage_ = std::move(copy);
    }
    // The chosen storage is either locked here or private to `out`.
    out.storage_->index[ptr->name] = out.storage_->order.size();
    out.storage_->order.push_back(ptr);
  }
  out.size_ = env.size_ + 1;
  return out;
}

}  // namespace dgl
