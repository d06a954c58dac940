#include "dgl/syntax/lexer.hpp"

#include <array>
#include <cctype>

namespace dgl {

namespace {

constexpr std::array<std::string_view, 14> kKeywords = {
    "def", "axiom", "inductive", "structure", "class", "instance", "fun",
    "forall", "let", "Sort", "Prop", "Type", "extends", "open"};

constexpr std::array<std::string_view, 5> kHashCommands = {"#check", "#whnf", "#def_eq", "#fail", "#print"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_rest(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

struct Unicode {
  std::string_view bytes;
  TokenKind kind;
  std::string_view value;
};

constexpr std::array<Unicode, 4> kUnicode = {{
    {"\xE2\x86\x92", TokenKind::Symbol, "->"},     // →
    {"\xCE\xBB", TokenKind::Keyword, "fun"},       // λ
    {"\xE2\x88\x80", TokenKind::Keyword, "forall"},  // ∀
    {"\xE2\x81\xBB\xC2\xB9", TokenKind::Symbol, "inv"},  // ⁻¹
}};

// Longest match first.
constexpr std::array<std::string_view, 20> kSymbols = {
    ":=", "=>", "->", "::", ".{", "@[", "(", ")", "{", "}", "[", "]", ":", ",", ".", "@", "|", ";", "+", "_"};

}  // namespace

std::string to_string(TokenKind k) {
  switch (k) {
    case TokenKind::Keyword:
      return "keyword";
    case TokenKind::Identifier:
      return "identifier";
    case TokenKind::Symbol:
      return "symbol";
    case TokenKind::Nat:
      return "natural literal";
    case TokenKind::Eof:
      return "end of file";
  }
  return "?";
}

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords)
    if (k == word) return true;
  return false;
}

bool starts_command(const Token& t) {
  if (t.kind == TokenKind::Eof) return true;
  if (t.kind == TokenKind::Symbol) return t.value == "@[";
  if (t.kind != TokenKind::Keyword) return false;
  static constexpr std::array<std::string_view, 12> starters = {
      "def", "axiom", "inductive", "structure", "class", "instance", "open",
      "#check", "#whnf", "#def_eq", "#fail", "#print"};
  for (auto s : starters)
    if (s == t.value) return true;
  return false;
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1;
  int col = 1;
  auto advance = [&](size_t bytes) {
    // Columns count code points; continuation bytes do not advance them.
    for (size_t k = 0; k < bytes; ++k, ++i) {
      unsigned char c = static_cast<unsigned char>(src[i]);
      if (c == '\n') {
        ++line;
        col = 1;
      } else if ((c & 0xC0) != 0x80) {
        ++col;
      }
    }
  };
  auto emit = [&](TokenKind kind, size_t len, std::string value) {
    Token t;
    t.kind = kind;
    t.lexeme = std::string(src.substr(i, len));
    t.value = std::move(value);
    t.line = line;
    t.column = col;
    t.offset = i;
    out.push_back(std::move(t));
    advance(len);
  };

  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (ident_start(c)) {
      size_t j = i;
      while (true) {
        while (j < src.size() && ident_rest(src[j])) ++j;
        if (j + 1 < src.size() && src[j] == '.' && ident_start(src[j + 1])) {
          ++j;
          continue;
        }
        break;
      }
      std::string word(src.substr(i, j - i));
      if (word == "_") {
        emit(TokenKind::Symbol, 1, "_");
        continue;
      }
      TokenKind kind = is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier;
      emit(kind, j - i, word);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      emit(TokenKind::Nat, j - i, std::string(src.substr(i, j - i)));
      continue;
    }
    if (c == '#') {
      size_t j = i + 1;
      while (j < src.size() && ident_rest(src[j])) ++j;
      std::string word(src.substr(i, j - i));
      bool known = false;
      for (auto k : kHashCommands) known |= (k == word);
      if (!known)
        throw Error(code::kLex, "unknown command '" + word + "'", {line, col});
      emit(TokenKind::Keyword, j - i, word);
      continue;
    }
    bool matched = false;
    for (auto& u : kUnicode) {
      if (src.substr(i, u.bytes.size()) == u.bytes) {
        emit(u.kind, u.bytes.size(), std::string(u.value));
        matched = true;
        break;
      }
    }
    if (matched) continue;
    for (auto s : kSymbols) {
      if (src.substr(i, s.size()) == s) {
        emit(TokenKind::Symbol, s.size(), std::string(s));
        matched = true;
        break;
      }
    }
    if (matched) continue;
    std::string shown;
    unsigned char uc = static_cast<unsigned char>(c);
    if (uc >= 0x20 && uc < 0x7F) {
      shown = std::string(1, c);
    } else {
      char buf[8];
      std::snprintf(buf, sizeof buf, "0x%02X", uc);
      shown = buf;
    }
    throw Error(code::kLex, "illegal character '" + shown + "'", {line, col});
  }
  Token eof;
  eof.kind = TokenKind::Eof;
  eof.line = line;
  eof.column = col;
  eof.offset = src.size();
  out.push_back(eof);
  return out;
}

}  // namespace dgl
