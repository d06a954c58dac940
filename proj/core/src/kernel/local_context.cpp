#include "dgl/kernel/local_context.hpp"

#include "dgl/error.hpp"

namespace dgl {

LocalContext LocalContext::push(Name name, Term type, BinderStyle style) const {
  LocalContext out = *this;
  out.entries_.push_back(Entry{std::move(name), style, std::move(type), std::nullopt});
  return out;
}

LocalContext LocalContext::push_let(Name name, Term type, Term value) const {
  LocalContext out = *this;
  out.entries_.push_back(
      Entry{std::move(name), BinderStyle::Explicit, std::move(type), std::move(value)});
  return out;
}

const LocalContext::Entry& LocalContext::entry_for_var(uint32_t index) const {
  if (index >= entries_.size())
    throw Error(code::kUnboundVar, "unbound variable #" + std::to_string(index));
  return entries_[entries_.size() - 1 - index];
}

Term LocalContext::type_of_var(uint32_t index) const {
  return lift(entry_for_var(index).type, index + 1, 0);
}

std::optional<Term> LocalContext::value_of_var(uint32_t index) const {
  const auto& e = entry_for_var(index);
  if (!e.value) return std::nullopt;
  return lift(*e.value, index + 1, 0);
}

Term FVarContext::add(Name name, Term type, BinderStyle style, std::optional<Term> value) {
  uint64_t id = next_fvar_id();
  decls_.emplace(id, Decl{id, std::move(name), style, std::move(type), std::move(value)});
  return Term::fvar(id);
}

const FVarContext::Decl* FVarContext::find(uint64_t id) const {
  auto it = decls_.find(id);
  return it == decls_.end() ? nullptr : &it->second;
}

const FVarContext::Decl& FVarContext::get(uint64_t id) const {
  if (auto* d = find(id)) return *d;
  throw Error(code::kUnboundVar, "unknown free variable");
}

std::vector<Term> FVarContext::open(const LocalContext& ctx) {
  std::vector<Term> fvars;
  fvars.reserve(ctx.size());
  for (const auto& e : ctx.entries()) {
    Term ty = instantiate_rev(e.type, fvars);
    std::optional<Term> val;
    if (e.value) val = instantiate_rev(*e.value, fvars);
    fvars.push_back(add(e.name, ty, e.style, val));
  }
  return fvars;
}

Term FVarContext::mk_binding(bool pi, std::span<const Term> fvars, const Term& body) const {
  Term r = abstract(body, fvars);
  for (size_t k = fvars.size(); k-- > 0;) {
    const Decl& d = get(fvars[k].fvar_id());
    auto outer = fvars.subspan(0, k);
    Term ty = abstract(d.type, outer);
    if (d.value)
      r = Term::let(d.name, ty, abstract(*d.value, outer), r);
    else if (pi)
      r = Term::pi(d.name, d.style, ty, r);
    else
      r = Term::lam(d.name, d.style, ty, r);
  }
  return r;
}

Term FVarContext::mk_pi(std::span<const Term> fvars, const Term& body) const {
  return mk_binding(true, fvars, body);
}

Term FVarContext::mk_lambda(std::span<const Term> fvars, const Term& body) const {
  return mk_binding(false, fvars, body);
}

}  // namespace dgl
