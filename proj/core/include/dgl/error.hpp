#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dgl {

// 1-based source position; line 0 means "unknown".
struct SourcePos {
  int line = 0;
  int column = 0;
};

// Stable diagnostic codes. Golden tests key on these strings.
namespace code {
inline constexpr const char* kLex = "E-LEX";
inline constexpr const char* kParse = "E-PARSE";
inline constexpr const char* kUnknownConst = "E-UNKNOWN-CONST";
inline constexpr const char* kAmbiguous = "E-AMBIGUOUS";
inline constexpr const char* kUnboundVar = "E-UNBOUND-VAR";
inline constexpr const char* kTypeMismatch = "E-TYPE-MISMATCH";
inline constexpr const char* kNotFunction = "E-NOT-FUNCTION";
inline constexpr const char* kTypeExpected = "E-TYPE-EXPECTED";
inline constexpr const char* kLevelArity = "E-LEVEL-ARITY";
inline constexpr const char* kUniverse = "E-UNIVERSE";
inline constexpr const char* kDuplicate = "E-DUPLICATE";
inline constexpr const char* kDependency = "E-DEPENDENCY";
inline constexpr const char* kPositivity = "E-POSITIVITY";
inline constexpr const char* kInductive = "E-INDUCTIVE";
inline constexpr const char* kStructure = "E-STRUCTURE";
inline constexpr const char* kUnsolved = "E-UNSOLVED-MVAR";
inline constexpr const char* kUnify = "E-UNIFY";
inline constexpr const char* kInstance = "E-INSTANCE";
inline constexpr const char* kInstanceDepth = "E-INSTANCE-DEPTH";
inline constexpr const char* kDefEqExpect = "E-DEFEQ-EXPECT";
inline constexpr const char* kFailPassed = "E-FAIL-PASSED";
inline constexpr const char* kForbiddenAxiom = "E-FORBIDDEN-AXIOM";
inline constexpr const char* kUnknownName = "E-UNKNOWN-NAME";
inline constexpr const char* kMetavarInKernel = "E-MVAR-IN-KERNEL";
inline constexpr const char* kFuelExhausted = "E-FUEL";
inline constexpr const char* kIO = "E-IO";
}  // namespace code

// The single exception type used across the checker. Kernel errors carry no
// position; the driver attaches the position of the enclosing command.
class Error : public std::runtime_error {
 public:
  Error(std::string code, std::string message, SourcePos pos = {},
        std::vector<std::string> terms = {})
      : std::runtime_error(message),
        code_(std::move(code)),
        pos_(pos),
        terms_(std::move(terms)) {}

  const std::string& code() const { return code_; }
  const SourcePos& pos() const { return pos_; }
  const std::vector<std::string>& terms() const { return terms_; }
  bool has_pos() const { return pos_.line > 0; }
  void set_pos_if_missing(SourcePos p) {
    if (!has_pos()) pos_ = p;
  }

 private:
  std::string code_;
  SourcePos pos_;
  std::vector<std::string> terms_;
};

}  // namespace dgl
