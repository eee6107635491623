#pragma once
//
// samplerec/harness.hpp
//
// Batch experiment orchestration behind the CLI. Pipeline-style modes run
// one cell per (m, seed) through draw -> concentrate -> reduce -> pad ->
// sparsify -> certify -> plan -> analyze; adversary mode runs one cell per
// (n, seed). Cells execute concurrently and are merged in config order, so
// identical configs produce byte-identical results.csv and report.json.
//

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <utility>
#include <vector>

#include "samplerec/analysis.hpp"
#include "samplerec/config.hpp"
#include "samplerec/density.hpp"
#include "samplerec/errors.hpp"
#include "samplerec/haar.hpp"
#include "samplerec/models.hpp"
#include "samplerec/recovery.hpp"
#include "samplerec/rng.hpp"
#include "samplerec/subsample.hpp"

namespace samplerec {

inline constexpr const char* kReportSchema = "samplerec-report/1";

inline SpectralModel build_model(const ExperimentConfig& cfg) {
  if (cfg.model == "fourier_sobolev") {
    const Index grid = cfg.grid > 0 ? cfg.grid : 2 * cfg.m_trunc;
    return fourier_sobolev(cfg.alpha, cfg.beta_log, cfg.m_trunc, grid);
  }
  if (cfg.model == "finite_rank") {
    const Index grid = cfg.grid > 0 ? cfg.grid : 4 * cfg.rank;
    return make_finite_rank(cfg.rank, grid, cfg.alpha);
  }
  if (cfg.model == "tensor") {
    const Index len = cfg.base_len > 0 ? cfg.base_len : cfg.m_trunc;
    Eigen::VectorXd base(len);
    for (Index k = 0; k < len; ++k)
      base(k) = std::pow(static_cast<double>(k + 1), -cfg.base_alpha);
    return tensor_product_model(base, cfg.d, cfg.m_trunc);
  }
  if (cfg.model == "surrogate") {
    auto [grid, spaces] = dyadic_pw_constant_spaces(cfg.surrogate_levels);
    const SurrogateProfile profile =
        cfg.profile == "boundary" ? SurrogateProfile::boundary : SurrogateProfile::power;
    return surrogate_rkhs(grid, spaces, cfg.alpha, cfg.p, profile);
  }
  throw invalid_config("config: unknown model '" + cfg.model + "'");
}

namespace detail {

// Meta columns (alpha, beta) of the CSV are the two defining parameters of
// the selected model family.
inline std::pair<double, double> report_alpha_beta(const ExperimentConfig& cfg) {
  if (cfg.model == "fourier_sobolev") return {cfg.alpha, cfg.beta_log};
  if (cfg.model == "finite_rank") return {cfg.alpha, 0.0};
  if (cfg.model == "tensor") return {cfg.base_alpha, static_cast<double>(cfg.d)};
  if (cfg.model == "surrogate") return {cfg.alpha, cfg.p};
  return {0.0, 0.0};
}

}  // namespace detail

struct PipelineCell {
  Index m = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::string message;
  bool ok = false;
  bool have_report = false;
  bool have_certificate = false;
  Index n_initial = 0;
  int attempts = 0;
  ErrorReport report;
  SubsampleCertificate certificate;
  std::vector<Index> points;
  double g_pinv_norm = 0.0;
  double g_pinv_bound = 0.0;
  double phi_norm = 0.0;
  double phi_norm_bound = 0.0;
  bool pinv_bound_ok = false;
  bool phi_bound_ok = false;
};

inline PipelineCell run_pipeline_cell(const SpectralModel& model, const ExperimentConfig& cfg,
                                      Index m, std::uint64_t seed, bool enforce_spline) {
  PipelineCell cell;
  cell.m = m;
  cell.seed = seed;
  try {
    const std::uint64_t cell_seed = derive_seed(seed, static_cast<std::uint64_t>(m));
    cell.n_initial = default_sample_count(cfg.sample_constant, m);
    const SampleBatch batch = resample_until_concentrated(model, m, cell.n_initial, cfg.threshold,
                                                          cfg.max_attempts, cell_seed);
    cell.attempts = batch.attempts;
    const FiniteReduction red = reduce_to_finite(batch);
    const PaddedSystem sys = pad_identity(red, batch.n(), m);
    const int budget = cfg.budget_factor * static_cast<int>(m);
    SubsampleCertificate picked;
    try {
      picked = greedy_sparsify(sys, m, budget, cfg.target_head_floor, cfg.target_full_cap);
    } catch (const sparsify_failure& e) {
      cell.certificate = e.partial;
      cell.have_certificate = true;
      throw;
    }
    cell.certificate =
        certify(batch, picked.selected, m, budget, cfg.target_head_floor, cfg.target_full_cap);
    cell.have_certificate = true;
    if (std::abs(cell.certificate.head_floor - picked.head_floor) > 1e-8 ||
        std::abs(cell.certificate.full_cap - picked.full_cap) > 1e-8)
      throw plan_failure(
          "certificate eigenvalues disagree between reduced and original coordinates");
    const RecoveryPlan plan = build_plan(model, batch, cell.certificate);
    cell.points = plan.points;
    cell.g_pinv_norm = plan.g_pinv_norm;
    cell.g_pinv_bound = plan.g_pinv_bound;
    cell.phi_norm = plan.phi_norm;
    cell.phi_norm_bound = plan.phi_norm_bound;
    cell.pinv_bound_ok = plan.pinv_bound_ok;
    cell.phi_bound_ok = plan.phi_bound_ok;
    const auto [meta_alpha, meta_beta] = detail::report_alpha_beta(cfg);
    cell.report =
        make_error_report(model, plan, cell.n_initial, batch.attempts, seed, meta_alpha, meta_beta);
    cell.have_report = true;
    if (!cell.report.local_bound_ok) {
      cell.status = "bound_violation";
      cell.message = "g_emp_ls^2 exceeds the certified local bound";
    } else if (enforce_spline && !cell.report.spline_order_ok) {
      cell.status = "spline_violation";
      cell.message = "spline error exceeds the least-squares error";
    } else {
      cell.ok = true;
    }
  } catch (const concentration_failure& e) {
    cell.status = "concentration_failure";
    cell.message = e.what();
    cell.attempts = e.attempts;
  } catch (const sparsify_failure& e) {
    cell.status = "sparsify_failure";
    cell.message = e.what();
  } catch (const plan_failure& e) {
    cell.status = "plan_failure";
    cell.message = e.what();
  } catch (const std::exception& e) {
    cell.status = "error";
    cell.message = e.what();
  }
  return cell;
}

struct AdversaryCell {
  Index n = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::string message;
  bool ok = false;
  Index n_distinct = 0;
  int level_lo = 0;
  int level_hi = 0;
  double h = 0.0;
  double l2_norm = 0.0;
  double normalized = 0.0;  // l2_norm * n^{1/2} (log n)^{beta-1}; l2_norm itself for loglog
  double lower_bound = 0.0;
  double vanish_max = 0.0;
  double integral_f = 0.0;
  bool budget_ok = false;
};

inline AdversaryCell run_adversary_cell(const ExperimentConfig& cfg, Index n,
                                        std::uint64_t seed) {
  AdversaryCell cell;
  cell.n = n;
  cell.seed = seed;
  try {
    SeededRng rng(derive_seed(seed, static_cast<std::uint64_t>(n)));
    std::vector<double> pts(static_cast<std::size_t>(n));
    for (double& x : pts) x = rng.uniform01();

    HaarClassSpec spec;
    spec.beta = cfg.beta;
    spec.loglog = cfg.loglog;
    spec.l_max = cfg.l_max;
    spec.max_level = cfg.max_level;
    spec.eps = cfg.eps;
    const HaarAdversary adv = haar_adversary(spec, pts);

    cell.n_distinct = static_cast<Index>(adv.point_nums.size());
    cell.level_lo = adv.level_lo;
    cell.level_hi = adv.level_hi;
    cell.h = adv.h;
    cell.l2_norm = adv.l2_norm;
    cell.lower_bound = adv.lower_bound;
    cell.integral_f = adv.integral_f;
    const double nd = static_cast<double>(n);
    cell.normalized = cfg.loglog
                          ? adv.l2_norm
                          : adv.l2_norm * std::sqrt(nd) * std::pow(std::log(nd), cfg.beta - 1.0);
    double vmax = 0.0;
    for (double x : pts) vmax = std::max(vmax, std::abs(adv.eval(x)));
    cell.vanish_max = vmax;
    cell.budget_ok = true;
    for (const HaarBudget& b : haar_budget_check(adv))
      if (b.used_sq > b.budget_sq * (1.0 + 1e-12)) cell.budget_ok = false;

    if (cell.vanish_max > 1e-12) {
      cell.status = "vanish_violation";
      cell.message = "constructed f does not vanish at the points";
    } else if (!cell.budget_ok) {
      cell.status = "budget_violation";
      cell.message = "per-level coefficient budget exceeded";
    } else if (cfg.loglog && cell.lower_bound < 1.0 - cfg.eps - 1e-12) {
      cell.status = "lower_bound_violation";
      cell.message = "certified lower bound fell below 1 - eps";
    } else {
      cell.ok = true;
    }
  } catch (const adversary_scope_exceeded& e) {
    cell.status = "adversary_scope_exceeded";
    cell.message = e.what();
  } catch (const std::exception& e) {
    cell.status = "error";
    cell.message = e.what();
  }
  return cell;
}

struct RunOutcome {
  RunMode mode = RunMode::pipeline;
  std::vector<PipelineCell> cells;
  std::vector<AdversaryCell> adversary;
  bool have_fit = false;
  RateFit fit;
  std::vector<std::pair<double, double>> fit_series;  // (m, median g_emp_ls)
  std::string csv;
  nlohmann::ordered_json report;
  int exit_code = 0;
};

namespace detail {

inline constexpr std::size_t kCellWave = 8;  // concurrent cells per wave

inline nlohmann::ordered_json certificate_json(const SubsampleCertificate& c) {
  nlohmann::ordered_json j;
  j["size"] = c.selected.size();
  j["n_source"] = c.n_source;
  j["head_floor"] = c.head_floor;
  j["full_cap"] = c.full_cap;
  j["tail_cap"] = c.tail_cap;
  j["budget"] = c.budget;
  j["target_head_floor"] = c.target_head_floor;
  j["target_full_cap"] = c.target_full_cap;
  j["practical_ok"] = c.practical_ok;
  j["envelope"] = {{"size_ok", c.envelope_size_ok},
                   {"head_ok", c.envelope_head_ok},
                   {"cap_ok", c.envelope_cap_ok}};
  j["J"] = c.selected;
  return j;
}

inline nlohmann::ordered_json report_json(const ErrorReport& r) {
  nlohmann::ordered_json j;
  j["g_emp_ls"] = r.g_emp_ls;
  j["g_emp_spline"] = r.g_emp_spline;
  j["d_m"] = r.d_m;
  j["bound_main"] = r.bound_main;
  j["bound_local"] = r.bound_local;
  j["bound_local_effective"] = r.bound_local_effective;
  j["bound_coarse_sq"] = r.bound_coarse_sq;
  j["ratio_main"] = r.ratio_main;
  j["ratio_local"] = r.ratio_local;
  j["head_floor"] = r.head_floor;
  j["full_cap"] = r.full_cap;
  j["neglected_tail_term"] = r.neglected_tail_term;
  j["exact_rank_path"] = r.exact_rank_path;
  j["envelope_ok"] = r.envelope_ok;
  j["local_bound_ok"] = r.local_bound_ok;
  j["spline_order_ok"] = r.spline_order_ok;
  return j;
}

inline nlohmann::ordered_json pipeline_cell_json(const PipelineCell& cell) {
  nlohmann::ordered_json j;
  j["m"] = cell.m;
  j["seed"] = cell.seed;
  j["status"] = cell.status;
  if (!cell.message.empty()) j["message"] = cell.message;
  j["n_initial"] = cell.n_initial;
  j["attempts"] = cell.attempts;
  if (cell.have_report) j["report"] = report_json(cell.report);
  if (cell.have_certificate) j["certificate"] = certificate_json(cell.certificate);
  if (!cell.points.empty()) {
    nlohmann::ordered_json plan;
    plan["n"] = cell.points.size();
    plan["g_pinv_norm"] = cell.g_pinv_norm;
    plan["g_pinv_bound"] = cell.g_pinv_bound;
    plan["phi_norm"] = cell.phi_norm;
    plan["phi_norm_bound"] = cell.phi_norm_bound;
    plan["pinv_bound_ok"] = cell.pinv_bound_ok;
    plan["phi_bound_ok"] = cell.phi_bound_ok;
    plan["points"] = cell.points;
    j["plan"] = plan;
  }
  return j;
}

inline nlohmann::ordered_json adversary_cell_json(const AdversaryCell& cell) {
  nlohmann::ordered_json j;
  j["n"] = cell.n;
  j["seed"] = cell.seed;
  j["status"] = cell.status;
  if (!cell.message.empty()) j["message"] = cell.message;
  j["n_distinct"] = cell.n_distinct;
  j["level_lo"] = cell.level_lo;
  j["level_hi"] = cell.level_hi;
  j["h"] = cell.h;
  j["l2_norm"] = cell.l2_norm;
  j["normalized"] = cell.normalized;
  j["lower_bound"] = cell.lower_bound;
  j["vanish_max"] = cell.vanish_max;
  j["integral_f"] = cell.integral_f;
  j["budget_ok"] = cell.budget_ok;
  return j;
}

inline nlohmann::ordered_json parameters_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json p;
  p["model"] = cfg.mode == RunMode::adversary ? "haar" : cfg.model;
  if (cfg.mode == RunMode::adversary) {
    p["beta"] = cfg.beta;
    p["loglog"] = cfg.loglog;
    p["l_max"] = cfg.l_max;
    p["max_level"] = cfg.max_level;
    if (cfg.loglog) p["eps"] = cfg.eps;
    p["n_list"] = cfg.n_list;
  } else {
    if (cfg.model == "fourier_sobolev") {
      p["alpha"] = cfg.alpha;
      p["beta_log"] = cfg.beta_log;
      p["m_trunc"] = cfg.m_trunc;
      p["grid"] = cfg.grid;
    } else if (cfg.model == "finite_rank") {
      p["rank"] = cfg.rank;
      p["grid"] = cfg.grid;
      p["alpha"] = cfg.alpha;
    } else if (cfg.model == "tensor") {
      p["base_alpha"] = cfg.base_alpha;
      p["base_len"] = cfg.base_len;
      p["d"] = cfg.d;
      p["m_trunc"] = cfg.m_trunc;
    } else if (cfg.model == "surrogate") {
      p["alpha"] = cfg.alpha;
      p["p"] = cfg.p;
      p["profile"] = cfg.profile;
      p["surrogate_levels"] = cfg.surrogate_levels;
    }
    p["m_list"] = cfg.m_list;
    p["sample_constant"] = cfg.sample_constant;
    p["threshold"] = cfg.threshold;
    p["max_attempts"] = cfg.max_attempts;
    p["budget_factor"] = cfg.budget_factor;
    p["target_head_floor"] = cfg.target_head_floor;
    p["target_full_cap"] = cfg.target_full_cap;
  }
  p["seeds"] = cfg.seeds;
  return p;
}

}  // namespace detail

inline RunOutcome run_pipeline_like(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const SpectralModel model = build_model(cfg);
  for (Index m : cfg.m_list) {
    if (m > model.m_trunc())
      throw invalid_config("config: m_list entry " + std::to_string(m) + " exceeds M_trunc = " +
                           std::to_string(model.m_trunc()));
    if (m == model.m_trunc() && !model.rank_exact())
      throw invalid_config("config: m = M_trunc requires an exactly finite-rank model");
  }

  RunOutcome out;
  out.mode = cfg.mode;
  const bool enforce_spline = cfg.mode == RunMode::spline_compare;
  std::vector<std::pair<Index, std::uint64_t>> grid;
  for (Index m : cfg.m_list)
    for (std::uint64_t seed : cfg.seeds) grid.emplace_back(m, seed);

  out.cells.resize(grid.size());
  for (std::size_t base = 0; base < grid.size(); base += detail::kCellWave) {
    const std::size_t end = std::min(base + detail::kCellWave, grid.size());
    std::vector<std::future<PipelineCell>> wave;
    for (std::size_t i = base; i < end; ++i)
      wave.push_back(std::async(std::launch::async, [&model, &cfg, &grid, i, enforce_spline] {
        return run_pipeline_cell(model, cfg, grid[i].first, grid[i].second, enforce_spline);
      }));
    for (std::size_t i = base; i < end; ++i) out.cells[i] = wave[i - base].get();
  }

  bool all_ok = true;
  std::string csv = csv_header() + "\n";
  for (const PipelineCell& cell : out.cells) {
    all_ok = all_ok && cell.ok;
    if (cell.have_report) csv += csv_row(cell.report) + "\n";
  }
  out.csv = std::move(csv);
  out.exit_code = all_ok ? 0 : 2;

  if (cfg.mode == RunMode::rate && all_ok) {
    for (Index m : cfg.m_list) {
      std::vector<double> vals;
      for (const PipelineCell& cell : out.cells)
        if (cell.m == m && cell.have_report) vals.push_back(cell.report.g_emp_ls);
      std::sort(vals.begin(), vals.end());
      const std::size_t k = vals.size();
      const double median =
          k % 2 == 1 ? vals[k / 2] : 0.5 * (vals[k / 2 - 1] + vals[k / 2]);
      out.fit_series.emplace_back(static_cast<double>(m), median);
    }
    bool positive = true;
    for (const auto& [x, y] : out.fit_series) positive = positive && y > 0.0;
    if (positive && out.fit_series.size() >= 3) {
      out.fit = rate_fit(out.fit_series);
      out.have_fit = true;
    }
  }

  nlohmann::ordered_json rep;
  rep["schema"] = kReportSchema;
  rep["mode"] = to_string(cfg.mode);
  rep["rng"] = kRngAlgorithm;
  rep["parameters"] = detail::parameters_json(cfg);
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const PipelineCell& cell : out.cells) cells.push_back(detail::pipeline_cell_json(cell));
  rep["cells"] = std::move(cells);
  if (out.have_fit) {
    nlohmann::ordered_json fit;
    fit["slope"] = out.fit.slope;
    fit["intercept"] = out.fit.intercept;
    fit["residual_rms"] = out.fit.residual_rms;
    fit["count"] = out.fit.count;
    nlohmann::ordered_json series = nlohmann::ordered_json::array();
    for (const auto& [x, y] : out.fit_series) series.push_back({{"m", x}, {"median_g_emp_ls", y}});
    fit["series"] = std::move(series);
    rep["fit"] = std::move(fit);
  }
  std::size_t failed = 0;
  for (const PipelineCell& cell : out.cells)
    if (!cell.ok) ++failed;
  rep["summary"] = {{"cells", out.cells.size()}, {"failed", failed}, {"exit_code", out.exit_code}};
  out.report = std::move(rep);
  return out;
}

inline RunOutcome run_pipeline(const ExperimentConfig& cfg) {
  if (cfg.mode != RunMode::pipeline && cfg.mode != RunMode::rate)
    throw invalid_config("run_pipeline: config mode mismatch");
  return run_pipeline_like(cfg);
}

inline RunOutcome run_spline_compare(const ExperimentConfig& cfg) {
  if (cfg.mode != RunMode::spline_compare)
    throw invalid_config("run_spline_compare: config mode mismatch");
  return run_pipeline_like(cfg);
}

inline RunOutcome run_rate(const ExperimentConfig& cfg) {
  if (cfg.mode != RunMode::rate) throw invalid_config("run_rate: config mode mismatch");
  return run_pipeline_like(cfg);
}

inline std::string adversary_csv_header() {
  return "n,seed,n_distinct,level_lo,level_hi,h,l2_norm,normalized,lower_bound,vanish_max";
}

inline std::string adversary_csv_row(const AdversaryCell& c) {
  std::string row = std::to_string(c.n);
  row += "," + std::to_string(c.seed);
  row += "," + std::to_string(c.n_distinct);
  row += "," + std::to_string(c.level_lo);
  row += "," + std::to_string(c.level_hi);
  for (double v : {c.h, c.l2_norm, c.normalized, c.lower_bound, c.vanish_max})
    row += "," + detail::format_g17(v);
  return row;
}

inline RunOutcome run_adversary(const ExperimentConfig& cfg) {
  if (cfg.mode != RunMode::adversary) throw invalid_config("run_adversary: config mode mismatch");
  validate_config(cfg);

  RunOutcome out;
  out.mode = cfg.mode;
  std::vector<std::pair<Index, std::uint64_t>> grid;
  for (Index n : cfg.n_list)
    for (std::uint64_t seed : cfg.seeds) grid.emplace_back(n, seed);

  out.adversary.resize(grid.size());
  for (std::size_t base = 0; base < grid.size(); base += detail::kCellWave) {
    const std::size_t end = std::min(base + detail::kCellWave, grid.size());
    std::vector<std::future<AdversaryCell>> wave;
    for (std::size_t i = base; i < end; ++i)
      wave.push_back(std::async(std::launch::async, [&cfg, &grid, i] {
        return run_adversary_cell(cfg, grid[i].first, grid[i].second);
      }));
    for (std::size_t i = base; i < end; ++i) out.adversary[i] = wave[i - base].get();
  }

  bool all_ok = true;
  std::string csv = adversary_csv_header() + "\n";
  for (const AdversaryCell& cell : out.adversary) {
    all_ok = all_ok && cell.ok;
    if (cell.status != "adversary_scope_exceeded" && cell.status != "error")
      csv += adversary_csv_row(cell) + "\n";
  }
  out.csv = std::move(csv);
  out.exit_code = all_ok ? 0 : 2;

  nlohmann::ordered_json rep;
  rep["schema"] = kReportSchema;
  rep["mode"] = to_string(cfg.mode);
  rep["rng"] = kRngAlgorithm;
  rep["parameters"] = detail::parameters_json(cfg);
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const AdversaryCell& cell : out.adversary)
    cells.push_back(detail::adversary_cell_json(cell));
  rep["cells"] = std::move(cells);
  std::size_t failed = 0;
  for (const AdversaryCell& cell : out.adversary)
    if (!cell.ok) ++failed;
  rep["summary"] = {{"cells", out.adversary.size()},
                    {"failed", failed},
                    {"exit_code", out.exit_code}};
  out.report = std::move(rep);
  return out;
}

inline RunOutcome run_mode(const ExperimentConfig& cfg) {
  switch (cfg.mode) {
    case RunMode::adversary: return run_adversary(cfg);
    case RunMode::spline_compare: return run_spline_compare(cfg);
    case RunMode::pipeline:
    case RunMode::rate: return run_pipeline_like(cfg);
  }
  throw invalid_config("config: unknown mode");
}

// Writes results.csv and report.json under out_dir, creating it if needed.
inline std::pair<std::string, std::string> write_outputs(const std::string& out_dir,
                                                         const RunOutcome& out) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string csv_path = (fs::path(out_dir) / "results.csv").string();
  const std::string json_path = (fs::path(out_dir) / "report.json").string();
  {
    std::ofstream f(csv_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + csv_path);
    f << out.csv;
  }
  {
    std::ofstream f(json_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + json_path);
    f << out.report.dump(2) << "\n";
  }
  return {csv_path, json_path};
}

}  // namespace samplerec
