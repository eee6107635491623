//
// samplerec command line harness.
//
// Subcommands: pipeline, adversary, spline-compare, rate. Each reads a flat
// key=value config (--config), optionally overrides the output directory
// (--out) and seed list (--seeds), runs the batch, and writes results.csv
// plus report.json. Exit codes: 0 full success, 2 any cell failed, 3
// invalid configuration or usage.
//

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "samplerec/config.hpp"
#include "samplerec/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw samplerec::invalid_config("cannot read config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void print_pipeline_cells(const samplerec::RunOutcome& out) {
  for (const samplerec::PipelineCell& c : out.cells) {
    if (c.have_report) {
      std::printf("m=%-4lld seed=%-4llu %-22s n_sub=%-5lld g_ls=%-12.6g g_spline=%-12.6g ratio_main=%.3g\n",
                  static_cast<long long>(c.m), static_cast<unsigned long long>(c.seed),
                  c.status.c_str(), static_cast<long long>(c.report.n_sub), c.report.g_emp_ls,
                  c.report.g_emp_spline, c.report.ratio_main);
    } else {
      std::printf("m=%-4lld seed=%-4llu %-22s %s\n", static_cast<long long>(c.m),
                  static_cast<unsigned long long>(c.seed), c.status.c_str(), c.message.c_str());
    }
  }
  if (out.have_fit)
    std::printf("fit: slope=%.4f intercept=%.4f residual_rms=%.3g over %d points\n",
                out.fit.slope, out.fit.intercept, out.fit.residual_rms, out.fit.count);
}

void print_adversary_cells(const samplerec::RunOutcome& out) {
  for (const samplerec::AdversaryCell& c : out.adversary) {
    if (c.status == "adversary_scope_exceeded" || c.status == "error") {
      std::printf("n=%-6lld seed=%-4llu %-24s %s\n", static_cast<long long>(c.n),
                  static_cast<unsigned long long>(c.seed), c.status.c_str(), c.message.c_str());
    } else {
      std::printf("n=%-6lld seed=%-4llu %-24s l2=%-12.6g normalized=%-12.6g lower=%-12.6g vanish=%.3g\n",
                  static_cast<long long>(c.n), static_cast<unsigned long long>(c.seed),
                  c.status.c_str(), c.l2_norm, c.normalized, c.lower_bound, c.vanish_max);
    }
  }
}

int run(const std::string& mode_name, const std::string& config_path, const std::string& out_dir,
        const std::string& seeds, bool quiet) {
  using namespace samplerec;
  ExperimentConfig cfg = parse_config_text(read_file(config_path));
  if (to_string(cfg.mode) != mode_name)
    throw invalid_config("config mode '" + to_string(cfg.mode) + "' does not match subcommand '" +
                         mode_name + "'");
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (!seeds.empty()) {
    cfg.seeds.clear();
    for (const std::string& part : detail::split_list(seeds))
      cfg.seeds.push_back(detail::parse_u64("seeds", part));
  }
  if (quiet) cfg.quiet = true;
  validate_config(cfg);

  const RunOutcome out = run_mode(cfg);
  const auto [csv_path, json_path] = write_outputs(cfg.out_dir, out);
  if (!cfg.quiet) {
    if (cfg.mode == RunMode::adversary)
      print_adversary_cells(out);
    else
      print_pipeline_cells(out);
    std::printf("results: %s\nreport: %s\n", csv_path.c_str(), json_path.c_str());
    if (out.exit_code != 0) std::printf("status: %d cell(s) failed\n", [&] {
      int k = 0;
      for (const auto& c : out.cells)
        if (!c.ok) ++k;
      for (const auto& c : out.adversary)
        if (!c.ok) ++k;
      return k;
    }());
  }
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"samplerec: weighted least-squares sampling recovery experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seeds;
  bool quiet = false;

  const std::pair<const char*, const char*> modes[] = {
      {"pipeline", "full sampling/subsampling/recovery pipeline over (m, seed) cells"},
      {"adversary", "Haar-class adversarial lower bounds over (n, seed) cells"},
      {"spline-compare", "pipeline with the spline-vs-least-squares ordering enforced per row"},
      {"rate", "pipeline over m_list plus a log-log rate fit of median errors"},
  };
  for (const auto& [name, desc] : modes) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "flat key=value config file")->required();
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--seeds", seeds, "comma-separated seed list override");
    sub->add_flag("--quiet", quiet, "suppress per-cell console output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  const std::string mode_name = app.get_subcommands().at(0)->get_name();
  try {
    return run(mode_name, config_path, out_dir, seeds, quiet);
  } catch (const samplerec::invalid_config& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
