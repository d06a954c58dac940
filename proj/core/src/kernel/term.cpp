#include "dgl/kernel/term.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_map>
#include <unordered_set>

namespace dgl {

namespace {

size_t mix(size_t h, size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

uint32_t sub_range(const Term& body) {
  uint32_t r = body.loose_bvar_range();
  return r > 0 ? r - 1 : 0;
}

}  // namespace

Term Term::bvar(uint32_t index) {
  auto n = std::make_shared<Node>(TermKind::BVar);
  n->id = index;
  n->loose_range = index + 1;
  n->hash = mix(3, index);
  return Term(std::move(n));
}

Term Term::fvar(uint64_t id) {
  auto n = std::make_shared<Node>(TermKind::FVar);
  n->id = id;
  n->has_fvar = true;
  n->hash = mix(5, id);
  return Term(std::move(n));
}

Term Term::mvar(uint64_t id) {
  auto n = std::make_shared<Node>(TermKind::MVar);
  n->id = id;
  n->has_mvar = true;
  n->hash = mix(7, id);
  return Term(std::move(n));
}

Term Term::sort(Level l) {
  auto n = std::make_shared<Node>(TermKind::Sort);
  n->has_mvar = l.has_mvar();
  n->has_level_param = l.has_param();
  n->hash = mix(11, l.hash());
  n->level = std::move(l);
  return Term(std::move(n));
}

Term Term::constant(Name name, std::vector<Level> levels) {
  auto n = std::make_shared<Node>(TermKind::Const);
  size_t h = mix(13, std::hash<Name>{}(name));
  for (auto& l : levels) {
    h = mix(h, l.hash());
    n->has_mvar |= l.has_mvar();
    n->has_level_param |= l.has_param();
  }
  n->hash = h;
  n->name = std::move(name);
  n->levels = std::move(levels);
  return Term(std::move(n));
}

Term Term::app(Term fn, Term arg) {
  auto n = std::make_shared<Node>(TermKind::App);
  n->loose_range = std::max(fn.loose_bvar_range(), arg.loose_bvar_range());
  n->has_fvar = fn.has_fvar() || arg.has_fvar();
  n->has_mvar = fn.has_mvar() || arg.has_mvar();
  n->has_level_param = fn.has_level_param() || arg.has_level_param();
  n->hash = mix(mix(17, fn.hash()), arg.hash());
  n->a = std::move(fn);
  n->b = std::move(arg);
  return Term(std::move(n));
}

static std::shared_ptr<Term::Node> binding_node(TermKind k, Name binder, BinderStyle style,
                                                Term type, Term body) {
  auto n = std::make_shared<Term::Node>(k);
  n->style = style;
  n->loose_range = std::max(type.loose_bvar_range(), sub_range(body));
  n->has_fvar = type.has_fvar() || body.has_fvar();
  n->has_mvar = type.has_mvar() || body.has_mvar();
  n->has_level_param = type.has_level_param() || body.has_level_param();
  n->hash = mix(mix(mix(k == TermKind::Lam ? 19 : 23, static_cast<size_t>(style)), type.hash()),
                body.hash());
  n->name = std::move(binder);
  n->a = std::move(type);
  n->b = std::move(body);
  return n;
}

Term Term::lam(Name binder, BinderStyle style, Term type, Term body) {
  return Term(binding_node(TermKind::Lam, std::move(binder), style, std::move(type), std::move(body)));
}

Term Term::pi(Name binder, BinderStyle style, Term type, Term body) {
  return Term(binding_node(TermKind::Pi, std::move(binder), style, std::move(type), std::move(body)));
}

Term Term::let(Name binder, Term type, Term value, Term body) {
  auto n = std::make_shared<Node>(TermKind::Let);
  n->loose_range = std::max({type.loose_bvar_range(), value.loose_bvar_range(), sub_range(body)});
  n->has_fvar = type.has_fvar() || value.has_fvar() || body.has_fvar();
  n->has_mvar = type.has_mvar() || value.has_mvar() || body.has_mvar();
  n->has_level_param = type.has_level_param() || value.has_level_param() || body.has_level_param();
  n->hash = mix(mix(mix(29, type.hash()), value.hash()), body.hash());
  n->name = std::move(binder);
  n->a = std::move(type);
  n->b = std::move(value);
  n->c = std::move(body);
  return Term(std::move(n));
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (!a || !b) return false;
  if (a.hash() != b.hash() || a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case TermKind::BVar:
    case TermKind::FVar:
    case TermKind::MVar:
      return a.node_->id == b.node_->id;
    case TermKind::Sort:
      return a.level() == b.level();
    case TermKind::Const:
      return a.const_name() == b.const_name() && a.const_levels() == b.const_levels();
    case TermKind::App: {
      // Iterate down the spine to keep recursion shallow for long applications.
      const Term* x = &a;
      const Term* y = &b;
      while (x->is_app() && y->is_app()) {
        if (x->node_ == y->node_) return true;
        if (x->hash() != y->hash()) return false;
        if (!(x->app_arg() == y->app_arg())) return false;
        x = &x->app_fn();
        y = &y->app_fn();
      }
      return *x == *y;
    }
    case TermKind::Lam:
    case TermKind::Pi:
      return a.binder_style() == b.binder_style() && a.binder_type() == b.binder_type() &&
             a.binder_body() == b.binder_body();
    case TermKind::Let:
      return a.let_type() == b.let_type() && a.let_value() == b.let_value() &&
             a.let_body() == b.let_body();
  }
  return false;
}

// --- spines ----------------------------------------------------------------

Term mk_app(Term fn, std::span<const Term> args) {
  for (const auto& a : args) fn = Term::app(std::move(fn), a);
  return fn;
}

Term mk_app(Term fn, std::initializer_list<Term> args) {
  return mk_app(std::move(fn), std::span<const Term>(args.begin(), args.size()));
}

const Term& get_app_fn(const Term& t) {
  const Term* cur = &t;
  while (cur->is_app()) cur = &cur->app_fn();
  return *cur;
}

size_t get_app_num_args(const Term& t) {
  size_t n = 0;
  const Term* cur = &t;
  while (cur->is_app()) {
    cur = &cur->app_fn();
    ++n;
  }
  return n;
}

Term get_app_fn_args(const Term& t, std::vector<Term>& args) {
  size_t n = get_app_num_args(t);
  size_t base = args.size();
  args.resize(base + n);
  const Term* cur = &t;
  for (size_t i = n; i-- > 0;) {
    args[base + i] = cur->app_arg();
    cur = &cur->app_fn();
  }
  return *cur;
}

std::vector<Term> get_app_args(const Term& t) {
  std::vector<Term> args;
  get_app_fn_args(t, args);
  return args;
}

// --- traversal -------------------------------------------------------------

namespace {

struct PtrDepthHash {
  size_t operator()(const std::pair<const void*, uint32_t>& k) const noexcept {
    return std::hash<const void*>{}(k.first) ^ (size_t(k.second) * 0x9e3779b97f4a7c15ULL);
  }
};

// `f` must be a pure function of (term, depth); results are cached per
// (node, depth) so shared subterms are rewritten once.
class Replacer {
 public:
  explicit Replacer(const std::function<std::optional<Term>(const Term&, uint32_t)>& f) : f_(f) {}

  Term run(const Term& t, uint32_t depth) {
    if (auto r = f_(t, depth)) return *r;
    if (!t.is_app() && !t.is_binding() && !t.is_let()) return t;
    auto key = std::make_pair(t.ptr(), depth);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    Term out = visit(t, depth);
    cache_.emplace(key, out);
    return out;
  }

 private:
  Term visit(const Term& t, uint32_t depth) {
    switch (t.kind()) {
      case TermKind::App: {
        Term fn = run(t.app_fn(), depth);
        Term arg = run(t.app_arg(), depth);
        if (fn.ptr() == t.app_fn().ptr() && arg.ptr() == t.app_arg().ptr()) return t;
        return Term::app(std::move(fn), std::move(arg));
      }
      case TermKind::Lam:
      case TermKind::Pi: {
        Term ty = run(t.binder_type(), depth);
        Term body = run(t.binder_body(), depth + 1);
        if (ty.ptr() == t.binder_type().ptr() && body.ptr() == t.binder_body().ptr()) return t;
        return t.is_lam()
                   ? Term::lam(t.binder_name(), t.binder_style(), std::move(ty), std::move(body))
                   : Term::pi(t.binder_name(), t.binder_style(), std::move(ty), std::move(body));
      }
      case TermKind::Let: {
        Term ty = run(t.let_type(), depth);
        Term val = run(t.let_value(), depth);
        Term body = run(t.let_body(), depth + 1);
        if (ty.ptr() == t.let_type().ptr() && val.ptr() == t.let_value().ptr() &&
            body.ptr() == t.let_body().ptr())
          return t;
        return Term::let(t.binder_name(), std::move(ty), std::move(val), std::move(body));
      }
      default:
        return t;
    }
  }

  const std::function<std::optional<Term>(const Term&, uint32_t)>& f_;
  std::unordered_map<std::pair<const void*, uint32_t>, Term, PtrDepthHash> cache_;
};

}  // namespace

Term replace(const Term& t,
             const std::function<std::optional<Term>(const Term&, uint32_t)>& f) {
  Replacer r(f);
  return r.run(t, 0);
}

void for_each(const Term& t, const std::function<bool(const Term&)>& f) {
  if (!f(t)) return;
  switch (t.kind()) {
    case TermKind::App:
      for_each(t.app_fn(), f);
      for_each(t.app_arg(), f);
      return;
    case TermKind::Lam:
    case TermKind::Pi:
      for_each(t.binder_type(), f);
      for_each(t.binder_body(), f);
      return;
    case TermKind::Let:
      for_each(t.let_type(), f);
      for_each(t.let_value(), f);
      for_each(t.let_body(), f);
      return;
    default:
      return;
  }
}

// --- de Bruijn calculus ----------------------------------------------------

Term lift(const Term& t, uint32_t amount, uint32_t cutoff) {
  if (amount == 0 || t.loose_bvar_range() <= cutoff) return t;
  return replace(t, [&](const Term& s, uint32_t depth) -> std::optional<Term> {
    uint32_t c = cutoff + depth;
    if (s.loose_bvar_range() <= c) return s;
    if (s.is_bvar()) return Term::bvar(s.bvar_index() + amount);
    return std::nullopt;
  });
}

Term instantiate_rev(const Term& body, std::span<const Term> values) {
  const uint32_t n = static_cast<uint32_t>(values.size());
  if (n == 0 || !body.has_loose_bvars()) return body;
  return replace(body, [&](const Term& s, uint32_t depth) -> std::optional<Term> {
    if (s.loose_bvar_range() <= depth) return s;
    if (s.is_bvar()) {
      uint32_t i = s.bvar_index();
      if (i < depth) return s;
      uint32_t k = i - depth;
      if (k < n) return lift(values[n - 1 - k], depth, 0);
      return Term::bvar(i - n);
    }
    return std::nullopt;
  });
}

Term instantiate(const Term& body, const Term& value) {
  return instantiate_rev(body, std::span<const Term>(&value, 1));
}

Term abstract(const Term& t, std::span<const Term> fvars) {
  if (fvars.empty() || !t.has_fvar()) return t;
  const uint32_t n = static_cast<uint32_t>(fvars.size());
  return replace(t, [&](const Term& s, uint32_t depth) -> std::optional<Term> {
    if (!s.has_fvar()) return s;
    if (s.is_fvar()) {
      for (uint32_t k = n; k-- > 0;)
        if (fvars[k].fvar_id() == s.fvar_id()) return Term::bvar(depth + n - 1 - k);
      return s;
    }
    return std::nullopt;
  });
}

bool has_loose_bvar(const Term& t, uint32_t index) {
  if (t.loose_bvar_range() <= index) return false;
  switch (t.kind()) {
    case TermKind::BVar:
      return t.bvar_index() == index;
    case TermKind::App:
      return has_loose_bvar(t.app_fn(), index) || has_loose_bvar(t.app_arg(), index);
    case TermKind::Lam:
    case TermKind::Pi:
      return has_loose_bvar(t.binder_type(), index) || has_loose_bvar(t.binder_body(), index + 1);
    case TermKind::Let:
      return has_loose_bvar(t.let_type(), index) || has_loose_bvar(t.let_value(), index) ||
             has_loose_bvar(t.let_body(), index + 1);
    default:
      return false;
  }
}

Term instantiate_levels(const Term& t, const std::vector<Name>& params,
                        const std::vector<Level>& levels) {
  if (params.empty() || !t.has_level_param()) return t;
  return replace(t, [&](const Term& s, uint32_t) -> std::optional<Term> {
    if (!s.has_level_param()) return s;
    if (s.is_sort()) return Term::sort(instantiate_level(s.level(), params, levels));
    if (s.is_const()) {
      std::vector<Level> ls;
      ls.reserve(s.const_levels().size());
      for (auto& l : s.const_levels()) ls.push_back(instantiate_level(l, params, levels));
      return Term::constant(s.const_name(), std::move(ls));
    }
    return std::nullopt;
  });
}

std::vector<Name> collect_constants(const Term& t) {
  std::vector<Name> out;
  std::unordered_set<Name> seen;
  std::unordered_set<const void*> visited;
  for_each(t, [&](const Term& s) {
    if (!visited.insert(s.ptr()).second) return false;
    if (s.is_const() && seen.insert(s.const_name()).second) out.push_back(s.const_name());
    return true;
  });
  return out;
}

void collect_level_params(const Term& t, std::vector<Name>& out) {
  std::unordered_set<const void*> visited;
  for_each(t, [&](const Term& s) {
    if (!s.has_level_param() || !visited.insert(s.ptr()).second) return false;
    if (s.is_sort()) collect_level_params(s.level(), out);
    if (s.is_const())
      for (auto& l : s.const_levels()) collect_level_params(l, out);
    return true;
  });
}

bool occurs_const(const Term& t, const Name& n) {
  bool found = false;
  for_each(t, [&](const Term& s) {
    if (found) return false;
    if (s.is_const() && s.const_name() == n) found = true;
    return !found;
  });
  return found;
}

bool occurs_fvar(const Term& t, uint64_t id) {
  if (!t.has_fvar()) return false;
  bool found = false;
  for_each(t, [&](const Term& s) {
    if (found || !s.has_fvar()) return false;
    if (s.is_fvar() && s.fvar_id() == id) found = true;
    return !found;
  });
  return found;
}

uint64_t next_fvar_id() {
  static std::atomic<uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace dgl
