#include "dgl/kernel/name.hpp"

#include <cctype>

namespace dgl {

Name Name::from_atoms(const std::vector<std::string>& atoms) {
  std::string out;
  for (const auto& a : atoms) {
    if (!out.empty()) out += '.';
    out += a;
  }
  return Name(std::move(out));
}

std::vector<std::string> Name::atoms() const {
  std::vector<std::string> out;
  if (text_.empty()) return out;
  size_t start = 0;
  while (true) {
    size_t dot = text_.find('.', start);
    if (dot == std::string::npos) {
      out.push_back(text_.substr(start));
      break;
    }
    out.push_back(text_.substr(start, dot - start));
    start = dot + 1;
  }
  return out;
}

Name Name::append(const std::string& atom) const {
  if (text_.empty()) return Name(atom);
  return Name(text_ + "." + atom);
}

Name Name::append(const Name& suffix) const {
  if (suffix.is_anonymous()) return *this;
  return append(suffix.str());
}

Name Name::prefix() const {
  size_t dot = text_.rfind('.');
  if (dot == std::string::npos) return Name();
  return Name(text_.substr(0, dot));
}

std::string Name::last() const {
  size_t dot = text_.rfind('.');
  if (dot == std::string::npos) return text_;
  return text_.substr(dot + 1);
}

std::strong_ordering operator<=>(const Name& a, const Name& b) {
  auto xa = a.atoms();
  auto xb = b.atoms();
  size_t n = std::min(xa.size(), xb.size());
  for (size_t i = 0; i < n; ++i) {
    if (auto c = xa[i] <=> xb[i]; c != 0) return c;
  }
  return xa.size() <=> xb.size();
}

bool is_valid_atom(const std::string& s) {
  if (s.empty()) return false;
  auto c0 = static_cast<unsigned char>(s[0]);
  if (!(std::isalpha(c0) || c0 == '_')) return false;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (!(std::isalnum(c) || c == '_' || c == '\'')) return false;
  }
  return true;
}

}  // namespace dgl
