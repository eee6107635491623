#pragma once
//
// samplerec/config.hpp
//
// Flat key=value experiment configuration with a typed schema. Lines are
// `key = value`, blank lines and #-comments are ignored. Unknown keys,
// duplicate keys, keys that do not apply to the selected mode/model, type
// errors and range violations all raise invalid_config.
//

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "samplerec/errors.hpp"
#include "samplerec/linalg.hpp"

namespace samplerec {

enum class RunMode { pipeline, adversary, spline_compare, rate };

inline std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::pipeline: return "pipeline";
    case RunMode::adversary: return "adversary";
    case RunMode::spline_compare: return "spline-compare";
    case RunMode::rate: return "rate";
  }
  return "?";
}

struct ExperimentConfig {
  RunMode mode = RunMode::pipeline;
  std::string model = "fourier_sobolev";

  // model parameters
  double alpha = 1.0;
  double beta_log = 0.0;
  Index m_trunc = 256;
  Index grid = 0;  // 0: derived as 2 * m_trunc (or 4 * rank)
  Index rank = 5;
  int d = 2;
  double base_alpha = 1.0;
  Index base_len = 0;  // 0: m_trunc
  double beta = 2.0;
  int l_max = 40;
  bool loglog = false;
  double eps = 0.1;
  int max_level = 100000;
  int surrogate_levels = 6;
  double p = 1.0;
  std::string profile = "power";

  // sampling and subsampling
  std::vector<Index> m_list = {4, 8, 16};
  double sample_constant = 8.0;
  double threshold = 0.5;
  int max_attempts = 20;
  int budget_factor = 60;
  double target_head_floor = 0.2;
  double target_full_cap = 4.0;

  // adversary
  std::vector<Index> n_list = {8, 16, 32, 64};

  // execution
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir = "out";
  bool quiet = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw invalid_config("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw invalid_config("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size() || v[0] == '-') throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw invalid_config("config: key '" + key + "' expects a non-negative integer, got '" + v +
                         "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw invalid_config("config: key '" + key + "' expects true/false, got '" + v + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw invalid_config("config: line " + std::to_string(line_no) + " has no '='");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw invalid_config("config: empty key on line " + std::to_string(line_no));
    if (val.empty())
      throw invalid_config("config: empty value for key '" + key + "'");
    if (!kv.emplace(key, val).second) throw invalid_config("config: duplicate key '" + key + "'");
  }

  ExperimentConfig cfg;
  auto it = kv.find("mode");
  if (it == kv.end()) throw invalid_config("config: missing required key 'mode'");
  if (it->second == "pipeline") cfg.mode = RunMode::pipeline;
  else if (it->second == "adversary") cfg.mode = RunMode::adversary;
  else if (it->second == "spline-compare") cfg.mode = RunMode::spline_compare;
  else if (it->second == "rate") cfg.mode = RunMode::rate;
  else throw invalid_config("config: unknown mode '" + it->second + "'");

  if (auto m = kv.find("model"); m != kv.end()) cfg.model = m->second;
  if (cfg.mode == RunMode::adversary) {
    if (kv.find("model") == kv.end()) cfg.model = "haar";
    if (cfg.model != "haar") throw invalid_config("config: adversary mode requires model = haar");
  } else {
    static const std::set<std::string> kModels = {"fourier_sobolev", "finite_rank", "tensor",
                                                  "surrogate"};
    if (!kModels.count(cfg.model))
      throw invalid_config("config: unknown model '" + cfg.model + "' for mode " +
                           to_string(cfg.mode));
  }

  // Applicability: common keys, mode keys, then model keys.
  std::set<std::string> allowed = {"mode", "model", "seeds", "out_dir", "quiet"};
  if (cfg.mode == RunMode::adversary) {
    allowed.insert({"n_list", "beta", "l_max", "loglog", "eps", "max_level"});
  } else {
    allowed.insert({"m_list", "sample_constant", "threshold", "max_attempts", "budget_factor",
                    "target_head_floor", "target_full_cap"});
    if (cfg.model == "fourier_sobolev") allowed.insert({"alpha", "beta_log", "m_trunc", "grid"});
    if (cfg.model == "finite_rank") allowed.insert({"rank", "grid", "alpha"});
    if (cfg.model == "tensor") allowed.insert({"base_alpha", "base_len", "d", "m_trunc"});
    if (cfg.model == "surrogate") allowed.insert({"alpha", "p", "profile", "surrogate_levels"});
  }
  for (const auto& [key, val] : kv) {
    if (!allowed.count(key))
      throw invalid_config("config: key '" + key + "' is unknown or not applicable to mode " +
                           to_string(cfg.mode) + ", model " + cfg.model);
  }

  auto get = [&](const char* key) -> const std::string* {
    auto f = kv.find(key);
    return f == kv.end() ? nullptr : &f->second;
  };

  if (auto* v = get("alpha")) cfg.alpha = detail::parse_double("alpha", *v);
  if (auto* v = get("beta_log")) cfg.beta_log = detail::parse_double("beta_log", *v);
  if (auto* v = get("m_trunc")) cfg.m_trunc = static_cast<Index>(detail::parse_int("m_trunc", *v));
  if (auto* v = get("grid")) cfg.grid = static_cast<Index>(detail::parse_int("grid", *v));
  if (auto* v = get("rank")) cfg.rank = static_cast<Index>(detail::parse_int("rank", *v));
  if (auto* v = get("d")) cfg.d = static_cast<int>(detail::parse_int("d", *v));
  if (auto* v = get("base_alpha")) cfg.base_alpha = detail::parse_double("base_alpha", *v);
  if (auto* v = get("base_len")) cfg.base_len = static_cast<Index>(detail::parse_int("base_len", *v));
  if (auto* v = get("beta")) cfg.beta = detail::parse_double("beta", *v);
  if (auto* v = get("l_max")) cfg.l_max = static_cast<int>(detail::parse_int("l_max", *v));
  if (auto* v = get("loglog")) cfg.loglog = detail::parse_bool("loglog", *v);
  if (auto* v = get("eps")) cfg.eps = detail::parse_double("eps", *v);
  if (auto* v = get("max_level")) cfg.max_level = static_cast<int>(detail::parse_int("max_level", *v));
  if (auto* v = get("surrogate_levels"))
    cfg.surrogate_levels = static_cast<int>(detail::parse_int("surrogate_levels", *v));
  if (auto* v = get("p")) cfg.p = detail::parse_double("p", *v);
  if (auto* v = get("profile")) cfg.profile = *v;
  if (auto* v = get("sample_constant")) cfg.sample_constant = detail::parse_double("sample_constant", *v);
  if (auto* v = get("threshold")) cfg.threshold = detail::parse_double("threshold", *v);
  if (auto* v = get("max_attempts")) cfg.max_attempts = static_cast<int>(detail::parse_int("max_attempts", *v));
  if (auto* v = get("budget_factor")) cfg.budget_factor = static_cast<int>(detail::parse_int("budget_factor", *v));
  if (auto* v = get("target_head_floor"))
    cfg.target_head_floor = detail::parse_double("target_head_floor", *v);
  if (auto* v = get("target_full_cap"))
    cfg.target_full_cap = detail::parse_double("target_full_cap", *v);
  if (auto* v = get("out_dir")) cfg.out_dir = *v;
  if (auto* v = get("quiet")) cfg.quiet = detail::parse_bool("quiet", *v);

  if (auto* v = get("m_list")) {
    cfg.m_list.clear();
    for (const std::string& part : detail::split_list(*v))
      cfg.m_list.push_back(static_cast<Index>(detail::parse_int("m_list", part)));
  }
  if (auto* v = get("n_list")) {
    cfg.n_list.clear();
    for (const std::string& part : detail::split_list(*v))
      cfg.n_list.push_back(static_cast<Index>(detail::parse_int("n_list", part)));
  }
  if (auto* v = get("seeds")) {
    cfg.seeds.clear();
    for (const std::string& part : detail::split_list(*v))
      cfg.seeds.push_back(detail::parse_u64("seeds", part));
  }
  return cfg;
}

// Structural range checks; model constructors enforce their own parameter
// domains on top of these.
inline void validate_config(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& msg) { throw invalid_config("config: " + msg); };
  if (cfg.seeds.empty() || cfg.seeds.size() > 256) fail("seeds must list 1..256 entries");
  if (cfg.out_dir.empty()) fail("out_dir must be nonempty");

  if (cfg.mode == RunMode::adversary) {
    if (cfg.n_list.empty() || cfg.n_list.size() > 64) fail("n_list must list 1..64 entries");
    for (Index n : cfg.n_list)
      if (n < 1 || n > 1000000) fail("n_list entries must be in [1, 1e6]");
    if (!cfg.loglog && !(cfg.beta > 1.0)) fail("haar power variant needs beta > 1");
    if (cfg.l_max < 1 || cfg.l_max > 1000) fail("l_max must be in [1, 1000]");
    if (cfg.loglog && !(cfg.eps > 0.0 && cfg.eps < 1.0)) fail("eps must be in (0,1)");
    if (cfg.max_level < 1 || cfg.max_level > 10000000) fail("max_level must be in [1, 1e7]");
    return;
  }

  if (cfg.m_list.empty() || cfg.m_list.size() > 64) fail("m_list must list 1..64 entries");
  for (Index m : cfg.m_list)
    if (m < 1) fail("m_list entries must be positive");
  if (cfg.mode == RunMode::rate && cfg.m_list.size() < 3)
    fail("rate mode needs at least 3 entries in m_list");
  if (!(cfg.sample_constant > 0.0 && cfg.sample_constant <= 1e6))
    fail("sample_constant must be in (0, 1e6]");
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) fail("threshold must be in (0,1)");
  if (cfg.max_attempts < 1 || cfg.max_attempts > 10000) fail("max_attempts must be in [1, 10000]");
  if (cfg.budget_factor < 1 || cfg.budget_factor > 43200)
    fail("budget_factor must be in [1, 43200]");
  if (!(cfg.target_head_floor > 0.0)) fail("target_head_floor must be positive");
  if (!(cfg.target_full_cap > cfg.target_head_floor))
    fail("target_full_cap must exceed target_head_floor");

  if (cfg.model == "fourier_sobolev" || cfg.model == "tensor") {
    if (cfg.m_trunc < 1 || cfg.m_trunc > 1024) fail("m_trunc must be in [1, 1024]");
  }
  if (cfg.model == "fourier_sobolev") {
    if (cfg.grid != 0 && (cfg.grid < 2 * cfg.m_trunc || cfg.grid > (Index(1) << 20)))
      fail("grid must be in [2 m_trunc, 2^20]");
  }
  if (cfg.model == "finite_rank") {
    if (cfg.rank < 1 || cfg.rank > 1024) fail("rank must be in [1, 1024]");
    if (cfg.grid != 0 && (cfg.grid < 2 * cfg.rank || cfg.grid > (Index(1) << 20)))
      fail("grid must be in [2 rank, 2^20]");
  }
  if (cfg.model == "tensor") {
    if (cfg.d < 1 || cfg.d > 3) fail("d must be in {1,2,3}");
    if (cfg.base_len != 0 && cfg.base_len < 1) fail("base_len must be positive");
    if (!(cfg.base_alpha > 0.0)) fail("base_alpha must be positive");
  }
  if (cfg.model == "surrogate") {
    if (cfg.surrogate_levels < 1 || cfg.surrogate_levels > 12)
      fail("surrogate_levels must be in [1, 12]");
    if (cfg.profile != "power" && cfg.profile != "boundary")
      fail("profile must be power or boundary");
  }
}

}  // namespace samplerec
