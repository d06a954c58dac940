#pragma once

#include <compare>
#include <functional>
#include <string>
#include <vector>

namespace dgl {

// Hierarchical name such as `Nat.add`. Stored in dotted form; ordering is
// lexicographic over atoms so `A.b` < `A.b.c` < `A.c`.
class Name {
 public:
  Name() = default;
  explicit Name(std::string dotted) : text_(std::move(dotted)) {}
  Name(const char* dotted) : text_(dotted) {}

  static Name from_atoms(const std::vector<std::string>& atoms);

  bool is_anonymous() const { return text_.empty(); }
  bool is_atomic() const { return text_.find('.') == std::string::npos; }
  const std::string& str() const { return text_; }
  std::vector<std::string> atoms() const;

  Name append(const std::string& atom) const;
  Name append(const Name& suffix) const;
  // `Nat.add` -> `Nat`; atomic names have the anonymous prefix.
  Name prefix() const;
  std::string last() const;

  friend bool operator==(const Name& a, const Name& b) { return a.text_ == b.text_; }
  friend std::strong_ordering operator<=>(const Name& a, const Name& b);

 private:
  std::string text_;
};

// True iff `s` matches the identifier-atom lexeme grammar.
bool is_valid_atom(const std::string& s);

}  // namespace dgl

template <>
struct std::hash<dgl::Name> {
  size_t operator()(const dgl::Name& n) const noexcept {
    return std::hash<std::string>{}(n.str());
  }
};
