#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dgl/error.hpp"

namespace dgl {

enum class TokenKind : uint8_t { Keyword, Identifier, Symbol, Nat, Eof };

struct Token {
  TokenKind kind = TokenKind::Eof;
  // Source text exactly as written.
  std::string lexeme;
  // Normalized spelling: unicode aliases map to their ASCII forms.
  std::string value;
  int line = 1;
  int column = 1;
  // Byte offset of the first character.
  size_t offset = 0;

  SourcePos pos() const { return {line, column}; }
  bool is(TokenKind k, std::string_view v) const { return kind == k && value == v; }
  bool is_symbol(std::string_view v) const { return is(TokenKind::Symbol, v); }
  bool is_keyword(std::string_view v) const { return is(TokenKind::Keyword, v); }
};

std::string to_string(TokenKind k);

// Full token stream ending in Eof. Comments (`--` to end of line) and
// whitespace are skipped. Throws E-LEX with the position of an illegal
// character.
std::vector<Token> tokenize(std::string_view source);

// True for words reserved by the grammar.
bool is_keyword(std::string_view word);

// Keywords that start a top-level command; parse recovery resumes there.
bool starts_command(const Token& t);

}  // namespace dgl
