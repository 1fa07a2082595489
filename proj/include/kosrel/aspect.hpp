#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "kosrel/error.hpp"
#include "kosrel/month.hpp"
#include "kosrel/text.hpp"
#include "kosrel/tree_code.hpp"

namespace kosrel {

enum class Aspect { disruptiveness, influence, informativeness, usefulness };

inline constexpr std::array<Aspect, 4> kAspects = {
    Aspect::disruptiveness, Aspect::influence, Aspect::informativeness, Aspect::usefulness};

inline std::string_view aspect_name(Aspect a) {
  switch (a) {
    case Aspect::disruptiveness: return "disruptiveness";
    case Aspect::influence: return "influence";
    case Aspect::informativeness: return "informativeness";
    case Aspect::usefulness: return "usefulness";
  }
  return "?";
}

inline Aspect parse_aspect(std::string_view s) {
  for (auto a : kAspects)
    if (aspect_name(a) == s) return a;
  throw Error("unknown aspect '" + std::string(s) + "'");
}

using NodeValues = std::map<TreeCode, double>;

/// One aspect's score per tree node for one month.
struct AspectScores {
  Aspect aspect = Aspect::informativeness;
  Month month;
  NodeValues values;

  friend bool operator==(const AspectScores&, const AspectScores&) = default;
};

inline constexpr std::string_view kAspectCsvHeader = "tree_code,level,aspect,month,value";

/// `# key=value` comment lines come first, then the header and the rows.
inline void write_aspect_csv(std::ostream& out, const AspectScores& s,
                             const std::map<std::string, std::string>& header_comments = {}) {
  for (const auto& [k, v] : header_comments) out << "# " << k << '=' << v << '\n';
  out << kAspectCsvHeader << '\n';
  const auto name = aspect_name(s.aspect);
  const auto month = s.month.str();
  for (const auto& [code, value] : s.values)
    out << code << ',' << code.level() << ',' << name << ',' << month << ',' << format_g17(value)
        << '\n';
}

inline AspectScores read_aspect_csv(std::istream& in) {
  AspectScores s;
  std::optional<Aspect> aspect;
  std::optional<Month> month;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (is_blank_or_comment(line)) continue;
    if (!header) {
      if (line != kAspectCsvHeader) throw ParseError(lineno, "unexpected aspect CSV header");
      header = true;
      continue;
    }
    auto f = split(line, ',');
    if (f.size() != 5) throw ParseError(lineno, "expected 5 columns");
    try {
      auto code = TreeCode::parse(f[0]);
      auto a = parse_aspect(f[2]);
      auto m = Month::parse(f[3]);
      if ((aspect && *aspect != a) || (month && *month != m))
        throw Error("mixed aspects or months in one file");
      aspect = a;
      month = m;
      auto v = parse_double(f[4]);
      if (!v || !std::isfinite(*v)) throw Error("bad value");
      if (!s.values.emplace(code, *v).second) throw Error("duplicate tree code " + code.str());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (!header) throw ParseError(0, "aspect CSV without header");
  if (aspect) s.aspect = *aspect;
  if (month) s.month = *month;
  return s;
}

}  // namespace kosrel
