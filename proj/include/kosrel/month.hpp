#pragma once

#include <compare>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>

#include "kosrel/error.hpp"
#include "kosrel/text.hpp"

namespace kosrel {

/// Calendar month. Day-level dates are truncated on parse.
class Month {
 public:
  Month() = default;
  Month(int year, int month) : index_(year * 12 + (month - 1)) {
    if (month < 1 || month > 12) throw Error("month out of range: " + std::to_string(month));
  }

  static Month from_index(int index) {
    Month m;
    m.index_ = index;
    return m;
  }

  /// Accepts `YYYY-MM` or `YYYY-MM-DD`.
  static Month parse(std::string_view text) {
    text = trim(text);
    if ((text.size() != 7 && text.size() != 10) || text[4] != '-' ||
        (text.size() == 10 && text[7] != '-'))
      throw Error("malformed month '" + std::string(text) + "' (expected YYYY-MM)");
    auto year = parse_u64(text.substr(0, 4));
    auto month = parse_u64(text.substr(5, 2));
    if (!year || !month || *month < 1 || *month > 12)
      throw Error("malformed month '" + std::string(text) + "'");
    if (text.size() == 10) {
      auto day = parse_u64(text.substr(8, 2));
      if (!day || *day < 1 || *day > 31) throw Error("malformed date '" + std::string(text) + "'");
    }
    return Month(static_cast<int>(*year), static_cast<int>(*month));
  }

  int year() const noexcept { return index_ / 12; }
  int month() const noexcept { return index_ % 12 + 1; }
  /// Months since year 0; consecutive months differ by one.
  int index() const noexcept { return index_; }

  Month next() const { return from_index(index_ + 1); }
  Month operator+(int months) const { return from_index(index_ + months); }
  int operator-(const Month& other) const { return index_ - other.index_; }

  std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year(), month());
    return buf;
  }

  friend bool operator==(const Month&, const Month&) = default;
  friend auto operator<=>(const Month&, const Month&) = default;
  friend std::ostream& operator<<(std::ostream& os, const Month& m) { return os << m.str(); }

 private:
  int index_ = 0;
};

}  // namespace kosrel
