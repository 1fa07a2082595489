#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kosrel/error.hpp"
#include "kosrel/graphmetrics.hpp"
#include "kosrel/infometrics.hpp"
#include "kosrel/month.hpp"
#include "kosrel/synthgen.hpp"
#include "kosrel/text.hpp"

namespace kosrel {

/// 64-bit FNV-1a, used for config and content fingerprints.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  std::uint64_t value() const noexcept { return hash_; }
  std::string hex() const {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_));
    return buf;
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

struct PipelineConfig {
  std::filesystem::path hierarchy_path;
  std::filesystem::path articles_path;
  std::filesystem::path citations_path;
  std::filesystem::path changes_path;  // optional
  Month first_month{2014, 1};
  Month last_month{2014, 12};
  double sample_fraction = 0.10;
  std::uint64_t base_seed = 42;
  PageRankOptions pagerank;
  int rrf_k = 60;
  InformativenessMode informativeness_mode = InformativenessMode::entropy_term;
  std::filesystem::path output_dir = "out";
  std::size_t top_k = 10;
  bool dump_article_scores = false;
  unsigned threads = 1;
  ScenarioConfig scenario;

  std::vector<Month> window() const {
    std::vector<Month> out;
    for (Month m = first_month; m <= last_month; m = m.next()) out.push_back(m);
    return out;
  }

  void validate() const {
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0))
      throw Error("sample_fraction must lie in (0, 1]");
    if (last_month < first_month) throw Error("the month window is empty");
    if (!(pagerank.alpha > 0.0 && pagerank.alpha < 1.0)) throw Error("pagerank.alpha must lie in (0, 1)");
    if (!(pagerank.tol > 0.0)) throw Error("pagerank.tol must be positive");
    if (pagerank.max_iter < 1) throw Error("pagerank.max_iter must be >= 1");
    if (rrf_k <= 0) throw Error("rrf_k must be positive");
    if (top_k < 1) throw Error("top_k must be >= 1");
  }

  /// Parameters that shape the outputs, one `key=value` per line. Paths,
  /// thread count and output directory are excluded; input files enter the
  /// config hash through their contents instead.
  std::string canonical_parameters() const {
    std::ostringstream s;
    s << "first_month=" << first_month << '\n'
      << "last_month=" << last_month << '\n'
      << "sample_fraction=" << format_g17(sample_fraction) << '\n'
      << "base_seed=" << base_seed << '\n'
      << "pagerank.alpha=" << format_g17(pagerank.alpha) << '\n'
      << "pagerank.tol=" << format_g17(pagerank.tol) << '\n'
      << "pagerank.max_iter=" << pagerank.max_iter << '\n'
      << "rrf_k=" << rrf_k << '\n'
      << "informativeness_mode=" << mode_name(informativeness_mode) << '\n'
      << "top_k=" << top_k << '\n';
    return s.str();
  }
};

namespace detail {

inline std::string unquote(std::string_view v) {
  v = trim(v);
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\'')))
    v = v.substr(1, v.size() - 2);
  return std::string(v);
}

inline double to_double(const std::string& key, const std::string& v) {
  auto d = parse_double(v);
  if (!d) throw Error("config key '" + key + "' expects a number, got '" + v + "'");
  return *d;
}

inline std::int64_t to_int(const std::string& key, const std::string& v) {
  std::string_view s = v;
  bool neg = !s.empty() && s.front() == '-';
  auto u = parse_u64(neg ? s.substr(1) : s);
  if (!u) throw Error("config key '" + key + "' expects an integer, got '" + v + "'");
  return neg ? -static_cast<std::int64_t>(*u) : static_cast<std::int64_t>(*u);
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("config key '" + key + "' expects true/false, got '" + v + "'");
}

inline std::vector<int> to_int_list(const std::string& key, std::string v) {
  if (!v.empty() && v.front() == '[') v = v.substr(1);
  if (!v.empty() && v.back() == ']') v.pop_back();
  std::vector<int> out;
  for (auto part : split(v, ',')) {
    if (trim(part).empty()) continue;
    out.push_back(static_cast<int>(to_int(key, std::string(trim(part)))));
  }
  return out;
}

}  // namespace detail

/// Flat `key = value` file. `#` starts a comment line; `[section]` headers
/// prefix the following keys with `section.`. Relative paths are resolved
/// against `base_dir`.
inline PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  PipelineConfig c;
  auto path = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (is_blank_or_comment(line)) continue;
    auto t = trim(line);
    if (t.front() == '[' && t.back() == ']') {
      section = std::string(trim(t.substr(1, t.size() - 2)));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected 'key = value'");
    std::string key(trim(t.substr(0, eq)));
    if (!section.empty()) key = section + "." + key;
    const std::string v = detail::unquote(t.substr(eq + 1));
    auto& s = c.scenario;
    try {
      if (key == "hierarchy") c.hierarchy_path = path(v);
      else if (key == "articles") c.articles_path = path(v);
      else if (key == "citations") c.citations_path = path(v);
      else if (key == "changes") c.changes_path = v.empty() ? std::filesystem::path{} : path(v);
      else if (key == "output_dir") c.output_dir = path(v);
      else if (key == "first_month") c.first_month = Month::parse(v);
      else if (key == "last_month") c.last_month = Month::parse(v);
      else if (key == "sample_fraction") c.sample_fraction = detail::to_double(key, v);
      else if (key == "base_seed") c.base_seed = static_cast<std::uint64_t>(detail::to_int(key, v));
      else if (key == "pagerank.alpha" || key == "pagerank_alpha") c.pagerank.alpha = detail::to_double(key, v);
      else if (key == "pagerank.tol" || key == "pagerank_tol") c.pagerank.tol = detail::to_double(key, v);
      else if (key == "pagerank.max_iter" || key == "pagerank_max_iter") c.pagerank.max_iter = static_cast<int>(detail::to_int(key, v));
      else if (key == "rrf_k") c.rrf_k = static_cast<int>(detail::to_int(key, v));
      else if (key == "informativeness_mode") c.informativeness_mode = parse_informativeness_mode(v);
      else if (key == "top_k") c.top_k = static_cast<std::size_t>(detail::to_int(key, v));
      else if (key == "dump_article_scores") c.dump_article_scores = detail::to_bool(key, v);
      else if (key == "threads") c.threads = static_cast<unsigned>(detail::to_int(key, v));
      else if (key == "synth.seed") s.seed = static_cast<std::uint64_t>(detail::to_int(key, v));
      else if (key == "synth.first_month") s.first_month = Month::parse(v);
      else if (key == "synth.months") s.months = static_cast<int>(detail::to_int(key, v));
      else if (key == "synth.articles_per_month") s.articles_per_month = static_cast<int>(detail::to_int(key, v));
      else if (key == "synth.branching") s.branching = detail::to_int_list(key, v);
      else if (key == "synth.multi_mapping_fraction") s.multi_mapping_fraction = detail::to_double(key, v);
      else if (key == "synth.descriptors_per_article") s.descriptors_per_article = detail::to_double(key, v);
      else if (key == "synth.zipf_exponent") s.zipf_exponent = detail::to_double(key, v);
      else if (key == "synth.references_mean") s.references_mean = detail::to_double(key, v);
      else if (key == "synth.min_references") s.min_references = static_cast<int>(detail::to_int(key, v));
      else if (key == "synth.attachment_exponent") s.attachment_exponent = detail::to_double(key, v);
      else if (key == "synth.evolving_fraction") s.evolving_fraction = detail::to_double(key, v);
      else if (key == "synth.usage_boost") s.usage_boost = detail::to_double(key, v);
      else if (key == "synth.boost_lead_months") s.boost_lead_months = static_cast<int>(detail::to_int(key, v));
      else if (key == "synth.retraction_rate") s.retraction_rate = detail::to_double(key, v);
      else if (key == "synth.retraction_tilt") s.retraction_tilt = detail::to_double(key, v);
      else if (key == "synth.first_article_id") s.first_article_id = static_cast<std::uint64_t>(detail::to_int(key, v));
      else throw Error("unknown config key '" + key + "'");
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open config file " + file.string());
  try {
    return parse_config(in, file.parent_path());
  } catch (const ParseError& e) {
    throw Error(file.string() + ": " + e.what());
  }
}

}  // namespace kosrel
