#include "dgl/syntax/render.hpp"

#include <unordered_set>

namespace dgl {

namespace {

bool is_atomic_level(const Level& l) {
  if (l.to_nat()) return true;
  return l.kind() == LevelKind::Param || l.kind() == LevelKind::MVar;
}

std::string paren_level(const Level& l) {
  std::string s = render_level(l);
  return is_atomic_level(l) ? s : "(" + s + ")";
}

const std::unordered_set<std::string>& reserved_words() {
  static const std::unordered_set<std::string> words = {
      "def", "axiom", "inductive", "structure", "class", "instance", "fun", "forall", "let",
      "Sort", "Prop", "Type", "extends", "open", "expect", "axioms", "max", "imax", "_"};
  return words;
}

enum Prec { kTop = 0, kArrowLhs = 1, kArg = 2 };

class Printer {
 public:
  explicit Printer(const RenderOptions& opts) : opts_(opts) {}

  void push_context(const LocalContext& names) {
    for (auto& e : names.entries()) scope_.push_back({fresh(e.name), e.type});
  }

  void collect_fvar_names(const Term& t) {
    if (!opts_.fvars || !t.has_fvar()) return;
    std::unordered_set<const void*> seen;
    for_each(t, [&](const Term& s) {
      if (!s.has_fvar() || !seen.insert(s.ptr()).second) return false;
      if (s.is_fvar())
        if (auto* d = opts_.fvars->find(s.fvar_id())) avoid_.insert(d->name.str());
      return true;
    });
  }

  std::string print(const Term& t, int prec) {
    switch (t.kind()) {
      case TermKind::BVar:
        return bvar_name(t.bvar_index());
      case TermKind::FVar:
        return fvar_name(t.fvar_id());
      case TermKind::MVar:
        return "?m." + std::to_string(t.mvar_id());
      case TermKind::Sort: {
        std::string s = render_sort(t.level());
        bool atomic = s == "Prop" || s == "Type";
        return atomic || prec < kArg ? s : "(" + s + ")";
      }
      case TermKind::Const:
        return maybe_at(t, 0) + const_text(t);
      case TermKind::App:
        return wrap(print_app(t), prec >= kArg);
      case TermKind::Lam:
        return wrap(print_lam(t), prec > kTop);
      case TermKind::Pi:
        return wrap(print_pi(t), prec > kTop);
      case TermKind::Let:
        return wrap(print_let(t), prec > kTop);
    }
    return "?";
  }

 private:
  struct Entry {
    std::string name;
    Term type;
  };

  static std::string wrap(const std::string& s, bool parens) { return parens ? "(" + s + ")" : s; }

  std::string const_text(const Term& t) const {
    std::string s = t.const_name().str();
    if (!t.const_levels().empty()) {
      s += ".{";
      for (size_t i = 0; i < t.const_levels().size(); ++i) {
        if (i) s += ", ";
        s += render_level(t.const_levels()[i]);
      }
      s += "}";
    }
    return s;
  }

  std::string bvar_name(uint32_t i) const {
    if (i < scope_.size()) return scope_[scope_.size() - 1 - i].name;
    return "#" + std::to_string(i);
  }

  std::string fvar_name(uint64_t id) const {
    if (opts_.fvars)
      if (auto* d = opts_.fvars->find(id)) return d->name.is_anonymous() ? "_x" : d->name.str();
    return "_fvar." + std::to_string(id);
  }

  // Type of the head, used only for its syntactic binder styles.
  std::optional<Term> head_type(const Term& head) const {
    switch (head.kind()) {
      case TermKind::Const:
        if (opts_.env)
          if (auto* d = opts_.env->find(head.const_name())) return d->type;
        return std::nullopt;
      case TermKind::FVar:
        if (opts_.fvars)
          if (auto* d = opts_.fvars->find(head.fvar_id())) return d->type;
        return std::nullopt;
      case TermKind::BVar:
        if (head.bvar_index() < scope_.size()) return scope_[scope_.size() - 1 - head.bvar_index()].type;
        return std::nullopt;
      default:
        return std::nullopt;
    }
  }

  // `@` is needed when any of the first nargs+1 binders is not explicit,
  // since elaboration would otherwise insert those arguments itself.
  std::string maybe_at(const Term& head, size_t nargs) const {
    auto ty = head_type(head);
    if (!ty) return "";
    Term cur = *ty;
    for (size_t i = 0; i <= nargs && cur.is_pi(); ++i) {
      if (cur.binder_style() != BinderStyle::Explicit) return "@";
      cur = cur.binder_body();
    }
    return "";
  }

  std::string print_app(const Term& t) {
    std::vector<Term> args;
    const Term& head = get_app_fn_args(t, args);
    std::string s;
    if (head.is_const() || head.is_fvar() || head.is_bvar()) {
      s = maybe_at(head, args.size()) + (head.is_const() ? const_text(head) : print(head, kArg));
    } else {
      s = print(head, kArg);
    }
    for (auto& a : args) s += " " + print(a, kArg);
    return s;
  }

  bool taken(const std::string& n) const {
    if (n.empty() || reserved_words().count(n) || avoid_.count(n)) return true;
    for (auto& e : scope_)
      if (e.name == n) return true;
    if (opts_.env && opts_.env->contains(Name(n))) return true;
    if (opts_.is_global && opts_.is_global(n)) return true;
    return false;
  }

  std::string fresh(const Name& binder) const {
    std::string base = binder.str();
    if (base.empty() || base == "_" || !is_valid_atom(base)) base = "x";
    if (!taken(base)) return base;
    for (unsigned k = 1;; ++k) {
      std::string c = base + "_" + std::to_string(k);
      if (!taken(c)) return c;
    }
  }

  static std::string open_bracket(BinderStyle s) {
    return s == BinderStyle::Implicit ? "{" : s == BinderStyle::InstImplicit ? "[" : "(";
  }
  static std::string close_bracket(BinderStyle s) {
    return s == BinderStyle::Implicit ? "}" : s == BinderStyle::InstImplicit ? "]" : ")";
  }

  std::string print_lam(const Term& t) {
    std::string s = "fun";
    size_t pushed = 0;
    Term cur = t;
    while (cur.is_lam()) {
      std::string ty = print(cur.binder_type(), kTop);
      std::string n = fresh(cur.binder_name());
      s += " " + open_bracket(cur.binder_style()) + n + " : " + ty + close_bracket(cur.binder_style());
      scope_.push_back({n, cur.binder_type()});
      ++pushed;
      cur = cur.binder_body();
    }
    s += " => " + print(cur, kTop);
    scope_.resize(scope_.size() - pushed);
    return s;
  }

  std::string print_pi(const Term& t) {
    if (t.binder_style() == BinderStyle::Explicit && !has_loose_bvar(t.binder_body(), 0)) {
      std::string dom = print(t.binder_type(), kArrowLhs);
      scope_.push_back({"_", t.binder_type()});
      std::string body = print(t.binder_body(), kTop);
      scope_.pop_back();
      return dom + " -> " + body;
    }
    std::string ty = print(t.binder_type(), kTop);
    std::string n = fresh(t.binder_name());
    scope_.push_back({n, t.binder_type()});
    std::string body = print(t.binder_body(), kTop);
    scope_.pop_back();
    return open_bracket(t.binder_style()) + n + " : " + ty + close_bracket(t.binder_style()) + " -> " + body;
  }

  std::string print_let(const Term& t) {
    std::string ty = print(t.let_type(), kTop);
    std::string val = print(t.let_value(), kTop);
    std::string n = fresh(t.binder_name());
    scope_.push_back({n, t.let_type()});
    std::string body = print(t.let_body(), kTop);
    scope_.pop_back();
    return "let " + n + " : " + ty + " := " + val + "; " + body;
  }

  const RenderOptions& opts_;
  std::vector<Entry> scope_;
  std::unordered_set<std::string> avoid_;
};

}  // namespace

std::string render_level(const Level& l) {
  if (auto n = l.to_nat()) return std::to_string(*n);
  switch (l.kind()) {
    case LevelKind::Succ: {
      auto [base, k] = l.to_offset();
      return paren_level(base) + "+" + std::to_string(k);
    }
    case LevelKind::Max:
      return "max " + paren_level(l.lhs()) + " " + paren_level(l.rhs());
    case LevelKind::IMax:
      return "imax " + paren_level(l.lhs()) + " " + paren_level(l.rhs());
    case LevelKind::Param:
      return l.param_name().str();
    case LevelKind::MVar:
      return "?u." + std::to_string(l.mvar_id());
    case LevelKind::Zero:
      return "0";
  }
  return "?";
}

std::string render_sort(const Level& l) {
  if (l.is_zero()) return "Prop";
  if (l.kind() == LevelKind::Succ) {
    const Level& k = l.succ_of();
    if (k.is_zero()) return "Type";
    return "Type " + paren_level(k);
  }
  return "Sort " + paren_level(l);
}

std::string render(const Term& t, const LocalContext& names, const RenderOptions& opts) {
  Printer p(opts);
  p.collect_fvar_names(t);
  p.push_context(names);
  return p.print(t, kTop);
}

}  // namespace dgl
