#include "dgl/kernel/level.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace dgl {

struct Level::Node {
  LevelKind kind;
  Level lhs;
  Level rhs;
  Name name;
  uint64_t id = 0;
  bool has_param = false;
  bool has_mvar = false;
  size_t hash = 0;
  explicit Node(LevelKind k) : kind(k), lhs(nullptr), rhs(nullptr) {}
};

namespace {

size_t mix(size_t h, size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

const std::shared_ptr<const Level::Node>& zero_node() {
  static const std::shared_ptr<const Level::Node> z = [] {
    auto n = std::make_shared<Level::Node>(LevelKind::Zero);
    n->hash = 17;
    return n;
  }();
  return z;
}

}  // namespace

Level::Level() : node_(zero_node()) {}

LevelKind Level::kind() const { return node_->kind; }
const Level& Level::succ_of() const { return node_->lhs; }
const Level& Level::lhs() const { return node_->lhs; }
const Level& Level::rhs() const { return node_->rhs; }
const Name& Level::param_name() const { return node_->name; }
uint64_t Level::mvar_id() const { return node_->id; }
bool Level::has_param() const { return node_->has_param; }
bool Level::has_mvar() const { return node_->has_mvar; }
size_t Level::hash() const { return node_->hash; }

Level Level::zero() { return Level(); }

Level Level::succ(Level l) {
  auto n = std::make_shared<Node>(LevelKind::Succ);
  n->has_param = l.has_param();
  n->has_mvar = l.has_mvar();
  n->hash = mix(31, l.hash());
  n->lhs = std::move(l);
  return Level(std::shared_ptr<const Node>(std::move(n)));
}

Level Level::max(Level a, Level b) {
  auto n = std::make_shared<Node>(LevelKind::Max);
  n->has_param = a.has_param() || b.has_param();
  n->has_mvar = a.has_mvar() || b.has_mvar();
  n->hash = mix(mix(37, a.hash()), b.hash());
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return Level(std::shared_ptr<const Node>(std::move(n)));
}

Level Level::imax(Level a, Level b) {
  auto n = std::make_shared<Node>(LevelKind::IMax);
  n->has_param = a.has_param() || b.has_param();
  n->has_mvar = a.has_mvar() || b.has_mvar();
  n->hash = mix(mix(41, a.hash()), b.hash());
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return Level(std::shared_ptr<const Node>(std::move(n)));
}

Level Level::param(Name name) {
  auto n = std::make_shared<Node>(LevelKind::Param);
  n->has_param = true;
  n->hash = mix(43, std::hash<Name>{}(name));
  n->name = std::move(name);
  return Level(std::shared_ptr<const Node>(std::move(n)));
}

Level Level::mvar(uint64_t id) {
  auto n = std::make_shared<Node>(LevelKind::MVar);
  n->has_mvar = true;
  n->id = id;
  n->hash = mix(47, id);
  return Level(std::shared_ptr<const Node>(std::move(n)));
}

Level Level::of_nat(unsigned k) {
  Level l;
  for (unsigned i = 0; i < k; ++i) l = succ(l);
  return l;
}

std::optional<unsigned> Level::to_nat() const {
  auto [base, k] = to_offset();
  if (base.is_zero()) return k;
  return std::nullopt;
}

std::pair<Level, unsigned> Level::to_offset() const {
  Level cur = *this;
  unsigned k = 0;
  while (cur.kind() == LevelKind::Succ) {
    cur = cur.succ_of();
    ++k;
  }
  return {cur, k};
}

bool operator==(const Level& a, const Level& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case LevelKind::Zero:
      return true;
    case LevelKind::Succ:
      return a.succ_of() == b.succ_of();
    case LevelKind::Max:
    case LevelKind::IMax:
      return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    case LevelKind::Param:
      return a.param_name() == b.param_name();
    case LevelKind::MVar:
      return a.mvar_id() == b.mvar_id();
  }
  return false;
}

namespace {

bool is_atomic_level(const Level& l) {
  switch (l.kind()) {
    case LevelKind::Zero:
    case LevelKind::Param:
    case LevelKind::MVar:
      return true;
    case LevelKind::Succ:
      return l.to_nat().has_value();
    default:
      return false;
  }
}

std::string atom_string(const Level& l) {
  std::string s = to_string(l);
  return is_atomic_level(l) ? s : "(" + s + ")";
}

}  // namespace

std::string to_string(const Level& l) {
  switch (l.kind()) {
    case LevelKind::Zero:
      return "0";
    case LevelKind::Succ: {
      auto [base, k] = l.to_offset();
      if (base.is_zero()) return std::to_string(k);
      return atom_string(base) + "+" + std::to_string(k);
    }
    case LevelKind::Max:
      return "max " + atom_string(l.lhs()) + " " + atom_string(l.rhs());
    case LevelKind::IMax:
      return "imax " + atom_string(l.lhs()) + " " + atom_string(l.rhs());
    case LevelKind::Param:
      return l.param_name().str();
    case LevelKind::MVar:
      return "?u." + std::to_string(l.mvar_id());
  }
  return "?";
}

Level replace_level(const Level& l,
                    const std::function<std::optional<Level>(const Level&)>& f) {
  if (auto r = f(l)) return *r;
  switch (l.kind()) {
    case LevelKind::Succ: {
      Level a = replace_level(l.succ_of(), f);
      return a == l.succ_of() ? l : Level::succ(a);
    }
    case LevelKind::Max:
    case LevelKind::IMax: {
      Level a = replace_level(l.lhs(), f);
      Level b = replace_level(l.rhs(), f);
      if (a == l.lhs() && b == l.rhs()) return l;
      return l.kind() == LevelKind::Max ? Level::max(a, b) : Level::imax(a, b);
    }
    default:
      return l;
  }
}

Level instantiate_level(const Level& l, const std::vector<Name>& params,
                        const std::vector<Level>& values) {
  if (!l.has_param()) return l;
  return replace_level(l, [&](const Level& x) -> std::optional<Level> {
    if (!x.has_param()) return x;
    if (x.kind() == LevelKind::Param) {
      for (size_t i = 0; i < params.size() && i < values.size(); ++i)
        if (params[i] == x.param_name()) return values[i];
      return x;
    }
    return std::nullopt;
  });
}

void collect_level_params(const Level& l, std::vector<Name>& out) {
  if (!l.has_param()) return;
  switch (l.kind()) {
    case LevelKind::Param:
      if (std::find(out.begin(), out.end(), l.param_name()) == out.end())
        out.push_back(l.param_name());
      return;
    case LevelKind::Succ:
      collect_level_params(l.succ_of(), out);
      return;
    case LevelKind::Max:
    case LevelKind::IMax:
      collect_level_params(l.lhs(), out);
      collect_level_params(l.rhs(), out);
      return;
    default:
      return;
  }
}

// ---------------------------------------------------------------------------
// Decision procedure.
//
// Every level without imax denotes max(c, p_1 + o_1, ..., p_k + o_k). The
// canonical form drops c when some o_i >= c. imax is eliminated by case
// splitting each parameter that occurs under an imax right-hand side into
// "p = 0" and "p = p' + 1"; after the split the zeroness of every imax
// right-hand side is syntactically decided.

namespace {

using Key = std::string;

Key key_of(const Level& l) {
  return l.kind() == LevelKind::Param ? "p:" + l.param_name().str()
                                      : "?" + std::to_string(l.mvar_id());
}

struct MaxPlus {
  unsigned constant = 0;
  std::map<Key, unsigned> offsets;

  bool is_zero() const { return constant == 0 && offsets.empty(); }
  unsigned floor() const {
    unsigned m = constant;
    for (auto& [k, o] : offsets) m = std::max(m, o);
    return m;
  }
  void normalize() {
    for (auto& [k, o] : offsets)
      if (o >= constant) {
        constant = 0;
        break;
      }
  }
  friend bool operator==(const MaxPlus&, const MaxPlus&) = default;
};

MaxPlus join(MaxPlus a, const MaxPlus& b) {
  a.constant = std::max(a.constant, b.constant);
  for (auto& [k, o] : b.offsets) {
    auto it = a.offsets.find(k);
    if (it == a.offsets.end())
      a.offsets.emplace(k, o);
    else
      it->second = std::max(it->second, o);
  }
  return a;
}

using Split = std::map<Key, bool>;  // true = positive (p = p' + 1)

MaxPlus eval(const Level& l, const Split& split) {
  switch (l.kind()) {
    case LevelKind::Zero:
      return {};
    case LevelKind::Succ: {
      MaxPlus m = eval(l.succ_of(), split);
      m.constant += 1;
      for (auto& [k, o] : m.offsets) o += 1;
      return m;
    }
    case LevelKind::Max:
      return join(eval(l.lhs(), split), eval(l.rhs(), split));
    case LevelKind::IMax: {
      MaxPlus b = eval(l.rhs(), split);
      if (b.is_zero()) return {};
      return join(eval(l.lhs(), split), b);
    }
    case LevelKind::Param:
    case LevelKind::MVar: {
      Key k = key_of(l);
      auto it = split.find(k);
      MaxPlus m;
      if (it == split.end()) {
        m.offsets[k] = 0;
      } else if (it->second) {
        m.constant = 1;
        m.offsets[k] = 1;
      }
      return m;
    }
  }
  return {};
}

void collect_all_keys(const Level& l, std::set<Key>& out) {
  switch (l.kind()) {
    case LevelKind::Param:
    case LevelKind::MVar:
      out.insert(key_of(l));
      return;
    case LevelKind::Succ:
      collect_all_keys(l.succ_of(), out);
      return;
    case LevelKind::Max:
    case LevelKind::IMax:
      collect_all_keys(l.lhs(), out);
      collect_all_keys(l.rhs(), out);
      return;
    default:
      return;
  }
}

void collect_split_keys(const Level& l, std::set<Key>& out) {
  switch (l.kind()) {
    case LevelKind::Succ:
      collect_split_keys(l.succ_of(), out);
      return;
    case LevelKind::Max:
      collect_split_keys(l.lhs(), out);
      collect_split_keys(l.rhs(), out);
      return;
    case LevelKind::IMax:
      collect_split_keys(l.lhs(), out);
      collect_all_keys(l.rhs(), out);
      return;
    default:
      return;
  }
}

constexpr size_t kMaxSplit = 12;

// Runs `pred` on every case split; false as soon as one case fails. When the
// split would be too large, returns nullopt so callers can fall back.
template <class Pred>
std::optional<bool> for_all_splits(const std::vector<Level>& levels, Pred pred) {
  std::set<Key> keys;
  for (auto& l : levels) collect_split_keys(l, keys);
  if (keys.size() > kMaxSplit) return std::nullopt;
  std::vector<Key> ks(keys.begin(), keys.end());
  size_t cases = size_t{1} << ks.size();
  for (size_t mask = 0; mask < cases; ++mask) {
    Split s;
    for (size_t i = 0; i < ks.size(); ++i) s[ks[i]] = (mask >> i) & 1;
    if (!pred(s)) return false;
  }
  return true;
}

}  // namespace

bool level_eq(const Level& a, const Level& b) {
  if (a == b) return true;
  auto r = for_all_splits({a, b}, [&](const Split& s) {
    MaxPlus x = eval(a, s), y = eval(b, s);
    x.normalize();
    y.normalize();
    return x == y;
  });
  return r.value_or(false);
}

bool level_leq(const Level& a, const Level& b) {
  if (a == b || a.is_zero()) return true;
  auto r = for_all_splits({a, b}, [&](const Split& s) {
    MaxPlus x = eval(a, s), y = eval(b, s);
    if (x.constant > y.floor()) return false;
    for (auto& [k, o] : x.offsets) {
      auto it = y.offsets.find(k);
      if (it == y.offsets.end() || it->second < o) return false;
    }
    return true;
  });
  return r.value_or(false);
}

bool is_never_zero(const Level& l) {
  auto r = for_all_splits({l}, [&](const Split& s) { return eval(l, s).floor() >= 1; });
  return r.value_or(false);
}

Level simplify(const Level& l) {
  switch (l.kind()) {
    case LevelKind::Succ: {
      Level a = simplify(l.succ_of());
      return a == l.succ_of() ? l : Level::succ(a);
    }
    case LevelKind::Max: {
      Level a = simplify(l.lhs());
      Level b = simplify(l.rhs());
      if (a.is_zero()) return b;
      if (b.is_zero()) return a;
      if (level_leq(a, b)) return b;
      if (level_leq(b, a)) return a;
      if (a == l.lhs() && b == l.rhs()) return l;
      return Level::max(a, b);
    }
    case LevelKind::IMax: {
      Level b = simplify(l.rhs());
      if (b.is_zero()) return b;
      Level a = simplify(l.lhs());
      if (is_never_zero(b)) return simplify(Level::max(a, b));
      if (a.is_zero() || a == b) return b;
      if (a == l.lhs() && b == l.rhs()) return l;
      return Level::imax(a, b);
    }
    default:
      return l;
  }
}

}  // namespace dgl
