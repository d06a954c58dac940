#include "dgl/syntax/parser.hpp"

#include <set>

namespace dgl {

std::string to_string(SurfaceCommand::Kind k) {
  using K = SurfaceCommand::Kind;
  switch (k) {
    case K::Def: return "def";
    case K::Axiom: return "axiom";
    case K::Inductive: return "inductive";
    case K::Structure: return "structure";
    case K::Class: return "class";
    case K::Instance: return "instance";
    case K::Check: return "#check";
    case K::Whnf: return "#whnf";
    case K::DefEq: return "#def_eq";
    case K::Fail: return "#fail";
    case K::PrintAxioms: return "#print axioms";
    case K::Open: return "open";
  }
  return "?";
}

namespace {

int codepoints(const std::string& s) {
  int n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

using TermNode = SurfaceTerm;
using TermK = SurfaceTerm::Kind;

class Parser {
 public:
  explicit Parser(const std::vector<Token>& toks) : toks_(toks) {}

  ParseResult parse_file() {
    ParseResult r;
    while (!peek().is(TokenKind::Eof, "") || peek().kind != TokenKind::Eof) {
      if (peek().kind == TokenKind::Eof) break;
      size_t start = pos_;
      try {
        r.commands.push_back(parse_command());
      } catch (const Error& e) {
        r.errors.push_back(e);
        if (pos_ == start) ++pos_;
        while (!starts_command(peek())) ++pos_;
      }
    }
    return r;
  }

  STermPtr parse_term_only() {
    STermPtr t = term();
    if (peek().kind != TokenKind::Eof) {
      expected_.insert("end of input");
      fail();
    }
    return t;
  }

 private:
  // --- token helpers ---------------------------------------------------------

  const Token& peek(size_t k = 0) const {
    size_t i = std::min(pos_ + k, toks_.size() - 1);
    return toks_[i];
  }

  const Token& advance() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    expected_.clear();
    last_ = &t;
    return t;
  }

  SourcePos end_pos() const {
    if (!last_) return peek().pos();
    return {last_->line, last_->column + codepoints(last_->lexeme)};
  }

  bool at_symbol(std::string_view v) const { return peek().is_symbol(v); }
  bool at_keyword(std::string_view v) const { return peek().is_keyword(v); }
  bool at_ident() const { return peek().kind == TokenKind::Identifier; }
  bool at_ident(std::string_view v) const { return peek().is(TokenKind::Identifier, v); }

  bool accept_symbol(std::string_view v) {
    if (at_symbol(v)) {
      advance();
      return true;
    }
    expected_.insert("'" + std::string(v) + "'");
    return false;
  }

  bool accept_keyword(std::string_view v) {
    if (at_keyword(v)) {
      advance();
      return true;
    }
    expected_.insert("'" + std::string(v) + "'");
    return false;
  }

  void expect_symbol(std::string_view v) {
    if (!accept_symbol(v)) fail();
  }

  std::string expect_ident() {
    if (at_ident()) return advance().value;
    expected_.insert("identifier");
    fail();
  }

  std::string expect_atomic_ident() {
    const Token& t = peek();
    std::string s = expect_ident();
    if (s.find('.') != std::string::npos)
      throw Error(code::kParse, "expected an atomic identifier, found '" + s + "'", t.pos());
    return s;
  }

  static std::string describe(const Token& t) {
    if (t.kind == TokenKind::Eof) return "end of file";
    return to_string(t.kind) + " '" + t.lexeme + "'";
  }

  [[noreturn]] void fail() {
    std::string msg = "syntax error: expected ";
    if (expected_.empty()) {
      msg += "a term";
    } else {
      size_t i = 0;
      for (auto& e : expected_) {
        if (i > 0) msg += i + 1 == expected_.size() ? " or " : ", ";
        msg += e;
        ++i;
      }
    }
    msg += ", found " + describe(peek());
    throw Error(code::kParse, msg, peek().pos());
  }

  [[noreturn]] void fail_at(const Token& t, const std::string& msg) {
    throw Error(code::kParse, "syntax error: " + msg, t.pos());
  }

  std::shared_ptr<TermNode> node(TermK k, SourcePos begin) {
    auto n = std::make_shared<TermNode>();
    n->kind = k;
    n->span.begin = begin;
    return n;
  }

  STermPtr finish(std::shared_ptr<TermNode> n) {
    n->span.end = end_pos();
    return n;
  }

  STermPtr mk_ident(const std::string& name, Span span) {
    auto n = std::make_shared<TermNode>();
    n->kind = TermK::Ident;
    n->name = name;
    n->span = span;
    return n;
  }

  STermPtr mk_app(STermPtr fn, STermPtr arg) {
    auto n = std::make_shared<TermNode>();
    n->kind = TermK::App;
    n->span = {fn->span.begin, arg->span.end};
    n->fn = std::move(fn);
    n->arg = std::move(arg);
    return n;
  }

  // --- levels ----------------------------------------------------------------

  SLevelPtr level() {
    SourcePos b = peek().pos();
    if (at_ident("max") || at_ident("imax")) {
      bool is_max = advance().value == "max";
      auto n = std::make_shared<SurfaceLevel>();
      n->kind = is_max ? SurfaceLevel::Kind::Max : SurfaceLevel::Kind::IMax;
      n->a = level_atom();
      n->b = level_atom();
      n->span = {b, end_pos()};
      return n;
    }
    SLevelPtr a = level_atom();
    while (at_symbol("+")) {
      advance();
      if (peek().kind != TokenKind::Nat) {
        expected_.insert("natural literal");
        fail();
      }
      auto n = std::make_shared<SurfaceLevel>();
      n->kind = SurfaceLevel::Kind::Add;
      n->num = static_cast<unsigned>(std::stoul(advance().value));
      n->a = a;
      n->span = {b, end_pos()};
      a = n;
    }
    return a;
  }

  SLevelPtr level_atom() {
    SourcePos b = peek().pos();
    auto n = std::make_shared<SurfaceLevel>();
    if (peek().kind == TokenKind::Nat) {
      n->kind = SurfaceLevel::Kind::Num;
      n->num = static_cast<unsigned>(std::stoul(advance().value));
    } else if (at_symbol("_")) {
      advance();
      n->kind = SurfaceLevel::Kind::Hole;
    } else if (at_ident() && !at_ident("max") && !at_ident("imax")) {
      n->kind = SurfaceLevel::Kind::Ident;
      n->name = expect_atomic_ident();
    } else if (accept_symbol("(")) {
      SLevelPtr inner = level();
      expect_symbol(")");
      return inner;
    } else {
      expected_.insert("universe level");
      fail();
    }
    n->span = {b, end_pos()};
    return n;
  }

  // Level argument after `Type`/`Sort`, if one follows.
  SLevelPtr optional_sort_level() {
    if (peek().kind == TokenKind::Nat) return level_atom();
    if (at_ident() && peek().value.find('.') == std::string::npos && !at_ident("max") && !at_ident("imax"))
      return level_atom();
    if (at_symbol("(")) {
      size_t save = pos_;
      auto save_last = last_;
      try {
        return level_atom();
      } catch (const Error&) {
        pos_ = save;
        last_ = save_last;
        expected_.clear();
      }
    }
    return nullptr;
  }

  std::vector<SLevelPtr> level_list() {
    std::vector<SLevelPtr> out;
    while (!at_symbol("}")) {
      out.push_back(level());
      if (!accept_symbol(",")) break;
    }
    expect_symbol("}");
    return out;
  }

  // --- binders ---------------------------------------------------------------

  // One bracketed group: `(x y : T)`, `{x : T}`, `[x : T]` or `[T]`.
  bool at_binder_group() const { return at_symbol("(") || at_symbol("{") || at_symbol("["); }

  void binder_group(std::vector<SurfaceBinder>& out, bool allow_untyped) {
    const Token& open = peek();
    BinderStyle style = BinderStyle::Explicit;
    std::string close = ")";
    if (open.is_symbol("{")) {
      style = BinderStyle::Implicit;
      close = "}";
    } else if (open.is_symbol("[")) {
      style = BinderStyle::InstImplicit;
      close = "]";
    }
    advance();
    SourcePos b = open.pos();
    if (style == BinderStyle::InstImplicit) {
      // `[C A]` is anonymous; `[inst : C A]` is named.
      if ((at_ident() || at_symbol("_")) && peek(1).is_symbol(":")) {
        std::string n = at_symbol("_") ? (advance(), std::string("_")) : expect_atomic_ident();
        advance();
        STermPtr ty = term();
        expect_symbol("]");
        out.push_back({n, style, ty, {b, end_pos()}});
        return;
      }
      STermPtr ty = term();
      expect_symbol("]");
      out.push_back({"_", style, ty, {b, end_pos()}});
      return;
    }
    std::vector<std::string> names;
    while (at_ident() || at_symbol("_")) {
      if (at_symbol("_")) {
        advance();
        names.push_back("_");
      } else {
        names.push_back(expect_atomic_ident());
      }
    }
    if (names.empty()) {
      expected_.insert("identifier");
      fail();
    }
    STermPtr ty;
    if (accept_symbol(":")) {
      ty = term();
    } else if (!allow_untyped) {
      fail();
    }
    expect_symbol(close);
    for (auto& n : names) out.push_back({n, style, ty, {b, end_pos()}});
  }

  // Binders of `fun` and `forall`: bare names, bracketed groups, or a single
  // unbracketed `x y : T` run.
  std::vector<SurfaceBinder> fun_binders(std::string_view terminator) {
    std::vector<SurfaceBinder> out;
    while (true) {
      if (at_binder_group()) {
        binder_group(out, true);
      } else if (at_ident() || at_symbol("_")) {
        SourcePos b = peek().pos();
        std::vector<std::string> names;
        while (at_ident() || at_symbol("_")) {
          if (at_symbol("_")) {
            advance();
            names.push_back("_");
          } else {
            names.push_back(expect_atomic_ident());
          }
        }
        STermPtr ty;
        if (accept_symbol(":")) ty = term();
        for (auto& n : names) out.push_back({n, BinderStyle::Explicit, ty, {b, end_pos()}});
        if (ty) break;
      } else {
        break;
      }
    }
    if (out.empty()) {
      expected_.insert("binder");
      fail();
    }
    if (!at_symbol(terminator)) {
      expected_.insert("'" + std::string(terminator) + "'");
      fail();
    }
    advance();
    return out;
  }

  std::vector<SurfaceBinder> decl_binders() {
    std::vector<SurfaceBinder> out;
    while (at_binder_group()) binder_group(out, false);
    return out;
  }

  STermPtr wrap_binders(TermK k, const std::vector<SurfaceBinder>& bs, STermPtr body, SourcePos begin) {
    for (size_t i = bs.size(); i-- > 0;) {
      auto n = std::make_shared<TermNode>();
      n->kind = k;
      n->binder = bs[i];
      n->body = body;
      n->span = {i == 0 ? begin : bs[i].span.begin, body->span.end};
      body = n;
    }
    return body;
  }

  // --- terms -----------------------------------------------------------------

  STermPtr term() {
    SourcePos b = peek().pos();
    if (accept_keyword("fun")) {
      auto bs = fun_binders("=>");
      return wrap_binders(TermK::Lam, bs, term(), b);
    }
    if (accept_keyword("forall")) {
      auto bs = fun_binders(",");
      return wrap_binders(TermK::Pi, bs, term(), b);
    }
    if (accept_keyword("let")) return let_term(b);
    if (at_binder_group()) {
      if (auto t = try_pi_binders(b)) return t;
    }
    STermPtr lhs = app();
    if (accept_symbol("->")) {
      STermPtr rhs = term();
      auto n = node(TermK::Pi, b);
      n->binder = {"_", BinderStyle::Explicit, lhs, lhs->span};
      n->body = rhs;
      return finish(n);
    }
    return lhs;
  }

  STermPtr let_term(SourcePos b) {
    auto n = node(TermK::Let, b);
    SourcePos nb = peek().pos();
    n->binder.name = expect_atomic_ident();
    if (accept_symbol(":")) n->binder.type = term();
    n->binder.span = {nb, end_pos()};
    expect_symbol(":=");
    n->value = term();
    expect_symbol(";");
    n->body = term();
    return finish(n);
  }

  STermPtr try_pi_binders(SourcePos b) {
    size_t save = pos_;
    auto save_last = last_;
    auto save_expected = expected_;
    try {
      std::vector<SurfaceBinder> bs;
      while (at_binder_group()) binder_group(bs, false);
      if (at_symbol("->")) {
        advance();
        return wrap_binders(TermK::Pi, bs, term(), b);
      }
    } catch (const Error&) {
    }
    pos_ = save;
    last_ = save_last;
    expected_ = save_expected;
    return nullptr;
  }

  bool at_atom_start() const {
    const Token& t = peek();
    if (t.kind == TokenKind::Identifier) return true;
    if (t.kind == TokenKind::Keyword) return t.value == "Sort" || t.value == "Type" || t.value == "Prop";
    if (t.kind == TokenKind::Symbol) return t.value == "(" || t.value == "_" || t.value == "@";
    return false;
  }

  STermPtr app() {
    STermPtr t = postfix_atom();
    while (true) {
      if (at_atom_start()) {
        t = mk_app(t, postfix_atom());
      } else if (at_keyword("fun") || at_keyword("forall") || at_keyword("let")) {
        return mk_app(t, term());
      } else {
        return t;
      }
    }
  }

  STermPtr postfix_atom() {
    STermPtr a = atom();
    while (true) {
      const Token& t = peek();
      if (t.is_symbol(".") && last_ && t.offset == last_->offset + last_->lexeme.size() &&
          peek(1).kind == TokenKind::Nat && peek(1).offset == t.offset + 1) {
        advance();
        const Token& n = advance();
        if (n.value != "1" && n.value != "2") fail_at(n, "only '.1' and '.2' projections are supported");
        Span s{n.pos(), end_pos()};
        a = mk_app(mk_ident(n.value == "1" ? "Prod.fst" : "Prod.snd", s), a);
        continue;
      }
      if (t.is_symbol("inv")) {
        advance();
        Span s{t.pos(), end_pos()};
        a = mk_app(mk_ident("inv", s), a);
        continue;
      }
      return a;
    }
  }

  STermPtr atom() {
    const Token& t = peek();
    SourcePos b = t.pos();
    if (t.kind == TokenKind::Identifier || t.is_symbol("@")) {
      bool at = false;
      if (t.is_symbol("@")) {
        advance();
        at = true;
      }
      auto n = node(TermK::Ident, b);
      n->name = expect_ident();
      n->explicit_mode = at;
      if (at_symbol(".{") && peek().offset == last_->offset + last_->lexeme.size()) {
        advance();
        n->levels = level_list();
      }
      return finish(n);
    }
    if (t.is_symbol("_")) {
      advance();
      return finish(node(TermK::Hole, b));
    }
    if (t.is_keyword("Prop") || t.is_keyword("Type") || t.is_keyword("Sort")) {
      advance();
      auto n = node(TermK::Sort, b);
      if (t.value == "Prop") {
        n->sort_kind = SurfaceTerm::SortKind::Prop;
      } else {
        n->sort_kind = t.value == "Type" ? SurfaceTerm::SortKind::Type : SurfaceTerm::SortKind::Sort;
        n->level = optional_sort_level();
        if (!n->level && t.value == "Sort") {
          expected_.insert("universe level");
          fail();
        }
      }
      return finish(n);
    }
    if (accept_symbol("(")) {
      STermPtr inner = term();
      if (accept_symbol(":")) {
        auto n = node(TermK::Ascribe, b);
        n->body = inner;
        n->value = term();
        expect_symbol(")");
        return finish(n);
      }
      if (accept_symbol(",")) {
        STermPtr second = term();
        expect_symbol(")");
        Span s{b, end_pos()};
        auto pair = mk_app(mk_app(mk_ident("Prod.mk", s), inner), second);
        auto out = std::make_shared<TermNode>(*pair);
        out->span = s;
        return out;
      }
      expect_symbol(")");
      auto out = std::make_shared<TermNode>(*inner);
      out->span = {b, end_pos()};
      return out;
    }
    expected_.insert("term");
    fail();
  }

  // --- commands ----------------------------------------------------------------

  using CmdK = SurfaceCommand::Kind;

  void skip_attributes() {
    while (at_symbol("@[")) {
      advance();
      int depth = 1;
      while (depth > 0) {
        if (peek().kind == TokenKind::Eof) fail_at(peek(), "unterminated attribute list");
        if (at_symbol("[") || at_symbol("@[")) ++depth;
        if (at_symbol("]")) --depth;
        advance();
      }
    }
  }

  void decl_header(SurfaceCommand& c) {
    c.name = expect_ident();
    if (at_symbol(".{") && peek().offset == last_->offset + last_->lexeme.size()) {
      advance();
      std::vector<std::string> us;
      while (!at_symbol("}")) {
        us.push_back(expect_atomic_ident());
        accept_symbol(",");
      }
      expect_symbol("}");
      c.uparams = std::move(us);
    }
    c.binders = decl_binders();
  }

  SCommandPtr parse_command() {
    skip_attributes();
    const Token& t = peek();
    auto c = std::make_shared<SurfaceCommand>();
    c->span.begin = t.pos();
    if (accept_keyword("def")) {
      c->kind = CmdK::Def;
      decl_header(*c);
      if (accept_symbol(":")) c->type = term();
      expect_symbol(":=");
      c->value = term();
    } else if (accept_keyword("axiom")) {
      c->kind = CmdK::Axiom;
      decl_header(*c);
      expect_symbol(":");
      c->type = term();
    } else if (accept_keyword("instance")) {
      c->kind = CmdK::Instance;
      decl_header(*c);
      expect_symbol(":");
      c->type = term();
      expect_symbol(":=");
      c->value = term();
    } else if (accept_keyword("inductive")) {
      c->kind = CmdK::Inductive;
      decl_header(*c);
      if (accept_symbol(":")) c->type = term();
      accept_symbol(":=");
      while (accept_symbol("|")) {
        SurfaceCtor ctor;
        ctor.span.begin = peek().pos();
        ctor.name = expect_atomic_ident();
        ctor.binders = decl_binders();
        if (accept_symbol(":")) ctor.type = term();
        ctor.span.end = end_pos();
        c->ctors.push_back(std::move(ctor));
      }
    } else if (at_keyword("structure") || at_keyword("class")) {
      c->kind = advance().value == "class" ? CmdK::Class : CmdK::Structure;
      decl_header(*c);
      if (accept_keyword("extends")) c->extends = app();
      if (accept_symbol(":")) c->type = term();
      if (accept_symbol(":=")) {
        if (at_ident() && peek(1).is_symbol("::")) {
          c->ctor_name = expect_atomic_ident();
          advance();
        }
        while (at_symbol("(")) c->fields.push_back(field());
      }
    } else if (accept_keyword("#check")) {
      c->kind = CmdK::Check;
      c->value = term();
    } else if (accept_keyword("#whnf")) {
      c->kind = CmdK::Whnf;
      c->value = term();
    } else if (accept_keyword("#def_eq")) {
      c->kind = CmdK::DefEq;
      c->lhs = postfix_atom();
      c->rhs = postfix_atom();
      if (at_ident("expect")) {
        advance();
        if (at_ident("true") || at_ident("false")) {
          c->expect = advance().value == "true";
        } else {
          expected_ = {"'true'", "'false'"};
          fail();
        }
      }
    } else if (accept_keyword("#fail")) {
      c->kind = CmdK::Fail;
      if (at_keyword("#fail")) fail_at(peek(), "'#fail' must wrap a command other than '#fail'");
      if (!starts_command(peek()) || peek().kind == TokenKind::Eof) {
        expected_.insert("command");
        fail();
      }
      c->inner = parse_command();
    } else if (accept_keyword("#print")) {
      c->kind = CmdK::PrintAxioms;
      if (!at_ident("axioms")) {
        expected_.insert("'axioms'");
        fail();
      }
      advance();
      c->name = expect_ident();
    } else if (accept_keyword("open")) {
      c->kind = CmdK::Open;
      c->namespaces.push_back(expect_ident());
      while (at_ident()) c->namespaces.push_back(advance().value);
    } else {
      expected_.insert("command");
      fail();
    }
    c->span.end = end_pos();
    return c;
  }

  SurfaceField field() {
    SurfaceField f;
    f.span.begin = peek().pos();
    expect_symbol("(");
    std::vector<std::string> names;
    while (at_ident()) names.push_back(expect_atomic_ident());
    if (names.empty()) {
      expected_.insert("field name");
      fail();
    }
    f.binders = decl_binders();
    if (names.size() > 1 && !f.binders.empty())
      fail_at(peek(), "a field group with several names cannot take binders");
    expect_symbol(":");
    f.type = term();
    expect_symbol(")");
    f.span.end = end_pos();
    f.name = names[0];
    if (names.size() > 1) {
      // Callers expand groups; keep the first name here and stash the rest.
      f.name.clear();
      for (size_t i = 0; i < names.size(); ++i) f.name += (i ? " " : "") + names[i];
    }
    return f;
  }

  const std::vector<Token>& toks_;
  size_t pos_ = 0;
  const Token* last_ = nullptr;
  std::set<std::string> expected_;
};

}  // namespace

ParseResult parse_file(const std::vector<Token>& tokens) {
  Parser p(tokens);
  ParseResult r = p.parse_file();
  // Expand multi-name field groups into one field per name.
  for (auto& cmd : r.commands) {
    bool grouped = false;
    for (auto& f : cmd->fields) grouped |= f.name.find(' ') != std::string::npos;
    if (!grouped) continue;
    auto copy = std::make_shared<SurfaceCommand>(*cmd);
    copy->fields.clear();
    for (auto& f : cmd->fields) {
      size_t start = 0;
      while (start <= f.name.size()) {
        size_t sp = f.name.find(' ', start);
        SurfaceField g = f;
        g.name = f.name.substr(start, sp == std::string::npos ? std::string::npos : sp - start);
        copy->fields.push_back(std::move(g));
        if (sp == std::string::npos) break;
        start = sp + 1;
      }
    }
    cmd = copy;
  }
  return r;
}

STermPtr parse_term(const std::vector<Token>& tokens) {
  Parser p(tokens);
  return p.parse_term_only();
}

STermPtr parse_term(std::string_view source) { return parse_term(tokenize(source)); }

}  // namespace dgl
