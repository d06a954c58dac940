#pragma once

#include <string_view>
#include <vector>

#include "dgl/syntax/ast.hpp"
#include "dgl/syntax/lexer.hpp"

namespace dgl {

struct ParseResult {
  std::vector<SCommandPtr> commands;
  // One E-PARSE error per broken command, in source order.
  std::vector<Error> errors;
};

// Commands in source order. A syntax error inside a command is recorded and
// parsing resumes at the next token that can start a command.
ParseResult parse_file(const std::vector<Token>& tokens);

// Parses a complete term; throws E-PARSE.
STermPtr parse_term(const std::vector<Token>& tokens);
STermPtr parse_term(std::string_view source);

}  // namespace dgl
