#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "kosrel/error.hpp"

namespace kosrel {

/// Dotted hierarchical address of a concept: `D`, `D12`, `D12.776`, ...
///
/// Grammar: a single upper-case letter, optionally followed by a two-digit
/// segment and any number of `.`-prefixed three-digit segments.
class TreeCode {
 public:
  TreeCode() = default;

  static bool is_valid(std::string_view text) noexcept {
    if (text.empty() || !std::isupper(static_cast<unsigned char>(text[0]))) return false;
    if (text.size() == 1) return true;
    auto digits = [&](std::size_t pos, std::size_t n) {
      if (pos + n > text.size()) return false;
      return std::all_of(text.begin() + pos, text.begin() + pos + n,
                         [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
    };
    if (!digits(1, 2)) return false;
    std::size_t pos = 3;
    while (pos < text.size()) {
      if (text[pos] != '.' || !digits(pos + 1, 3)) return false;
      pos += 4;
    }
    return pos == text.size();
  }

  static std::optional<TreeCode> try_parse(std::string_view text) {
    if (!is_valid(text)) return std::nullopt;
    TreeCode code;
    code.text_ = std::string(text);
    return code;
  }

  static TreeCode parse(std::string_view text) {
    auto code = try_parse(text);
    if (!code) throw Error("malformed tree code '" + std::string(text) + "'");
    return *code;
  }

  const std::string& str() const noexcept { return text_; }
  bool empty() const noexcept { return text_.empty(); }

  /// 1 for a bare category letter, otherwise 2 + number of dots.
  int level() const noexcept {
    if (text_.size() <= 1) return 1;
    return 2 + static_cast<int>(std::count(text_.begin(), text_.end(), '.'));
  }

  std::optional<TreeCode> parent() const {
    if (text_.size() <= 1) return std::nullopt;
    TreeCode p;
    auto dot = text_.rfind('.');
    p.text_ = dot == std::string::npos ? text_.substr(0, 1) : text_.substr(0, dot);
    return p;
  }

  char category() const noexcept { return text_.empty() ? '\0' : text_[0]; }

  /// True when `this` lies strictly below `other`.
  bool is_descendant_of(const TreeCode& other) const noexcept {
    if (text_.size() <= other.text_.size()) return false;
    if (text_.compare(0, other.text_.size(), other.text_) != 0) return false;
    return other.text_.size() == 1 || text_[other.text_.size()] == '.';
  }

  friend bool operator==(const TreeCode&, const TreeCode&) = default;
  friend std::strong_ordering operator<=>(const TreeCode& a, const TreeCode& b) noexcept {
    return a.text_.compare(b.text_) <=> 0;
  }
  friend std::ostream& operator<<(std::ostream& os, const TreeCode& c) { return os << c.text_; }

 private:
  std::string text_;
};

inline int level_of(const TreeCode& code) noexcept { return code.level(); }

}  // namespace kosrel

template <>
struct std::hash<kosrel::TreeCode> {
  std::size_t operator()(const kosrel::TreeCode& c) const noexcept {
    return std::hash<std::string>{}(c.str());
  }
};
