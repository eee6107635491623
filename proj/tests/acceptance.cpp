// Acceptance gate: nine criteria, one line each, exit code = number of
// failures. Tolerances are pinned in the checks themselves.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "samplerec/analysis.hpp"
#include "samplerec/config.hpp"
#include "samplerec/density.hpp"
#include "samplerec/haar.hpp"
#include "samplerec/harness.hpp"
#include "samplerec/models.hpp"
#include "samplerec/recovery.hpp"
#include "samplerec/rng.hpp"
#include "samplerec/subsample.hpp"

using namespace samplerec;

namespace {

int g_failures = 0;

class Criterion {
 public:
  Criterion(const char* id, const char* desc, double budget_s)
      : id_(id), desc_(desc), budget_s_(budget_s), start_(std::chrono::steady_clock::now()) {}

  void expect(bool cond, const std::string& what) {
    if (cond || !ok_) return;
    ok_ = false;
    first_failure_ = what;
  }

  void note(const std::string& text) { note_ = text; }

  void finish() {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (ok_ && budget_s_ > 0.0 && elapsed > budget_s_) {
      ok_ = false;
      char buf[96];
      std::snprintf(buf, sizeof(buf), "runtime %.1fs exceeds budget %.0fs", elapsed, budget_s_);
      first_failure_ = buf;
    }
    std::string line = ok_ ? "[PASS] " : "[FAIL] ";
    line += id_;
    line += " ";
    line += desc_;
    if (!note_.empty()) line += " (" + note_ + ")";
    char tbuf[32];
    std::snprintf(tbuf, sizeof(tbuf), " [%.1fs]", elapsed);
    line += tbuf;
    if (!ok_) {
      line += " -- ";
      line += first_failure_;
      ++g_failures;
    }
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
  }

 private:
  const char* id_;
  const char* desc_;
  double budget_s_;
  bool ok_ = true;
  std::string first_failure_;
  std::string note_;
  std::chrono::steady_clock::time_point start_;
};

std::string cell_tag(const PipelineCell& cell) {
  return "m=" + std::to_string(cell.m) + " seed=" + std::to_string(cell.seed);
}

ExperimentConfig main_config(const char* mode, const char* m_list) {
  std::string text = std::string("mode = ") + mode +
                     "\n"
                     "model = fourier_sobolev\n"
                     "alpha = 1\n"
                     "m_trunc = 256\n"
                     "grid = 512\n"
                     "m_list = " +
                     m_list +
                     "\n"
                     "seeds = 1,2,3\n"
                     "quiet = true\n";
  ExperimentConfig cfg = parse_config_text(text);
  validate_config(cfg);
  return cfg;
}

// Random tiny batch with unit head targets and tail targets in (0, 1].
SampleBatch random_tiny_batch(SeededRng& rng, Index mt, Index m, Index n) {
  SampleBatch batch;
  batch.m = m;
  batch.info.resize(mt, n);
  for (Index k = 0; k < mt; ++k)
    for (Index i = 0; i < n; ++i)
      batch.info(k, i) = std::complex<double>(2.0 * rng.uniform01() - 1.0,
                                              2.0 * rng.uniform01() - 1.0);
  batch.target_diag.resize(mt);
  for (Index k = 0; k < mt; ++k)
    batch.target_diag(k) = k < m ? 1.0 : 0.05 + 0.95 * rng.uniform01();
  batch.residual = concentration_residual(batch.info, batch.target_diag);
  return batch;
}

}  // namespace

int main() {
  // Shared pipeline runs for criteria 1 through 3; the run itself is timed
  // against the first criterion's budget.
  const ExperimentConfig cfg_main = main_config("pipeline", "4,8,16");
  const SpectralModel model_main = build_model(cfg_main);
  RunOutcome main_run;

  {
    Criterion c("C1", "local worst-case error bound holds on every pipeline cell", 120.0);
    main_run = run_pipeline(cfg_main);
    c.expect(main_run.exit_code == 0, "pipeline exit code " + std::to_string(main_run.exit_code));
    c.expect(main_run.cells.size() == 9, "expected 9 cells");
    for (const PipelineCell& cell : main_run.cells) {
      c.expect(cell.ok && cell.have_report, "cell failed: " + cell_tag(cell) + " " + cell.message);
      if (!cell.have_report) continue;
      const TailStats ts = make_tail_stats(model_main, cell.m);
      const double g = cell.report.g_emp_ls;
      const double md = static_cast<double>(cell.m);
      const SubsampleCertificate& cert = cell.certificate;
      const bool envelope = static_cast<double>(cert.selected.size()) <= 43200.0 * md &&
                            cert.head_floor >= 50.0 && cert.full_cap <= 21600.0;
      const double constant = envelope ? 433.0 : 1.0 + cert.full_cap / cert.head_floor;
      c.expect(g * g <= constant * ts.max_branch + 1e-10,
               "g^2 above the certified bound at " + cell_tag(cell));
      c.expect(cell.report.local_bound_ok, "report flag disagrees at " + cell_tag(cell));
    }
    c.finish();
  }

  {
    Criterion c("C2", "coarse-tail ratio stays below sqrt(866)", 120.0);
    double worst = 0.0;
    for (const PipelineCell& cell : main_run.cells) {
      if (!cell.have_report) continue;
      const double denom =
          std::sqrt(tail_sum(model_main, (cell.m + 1) / 2) / static_cast<double>(cell.m));
      const double ratio = cell.report.g_emp_ls / denom;
      worst = std::max(worst, ratio);
      c.expect(ratio <= std::sqrt(866.0), "ratio " + std::to_string(ratio) + " at " + cell_tag(cell));
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "max ratio %.3f", worst);
    c.note(buf);
    c.finish();
  }

  {
    Criterion c("C3", "subsample sizes within budget and certificates reproduced", 120.0);
    for (const PipelineCell& cell : main_run.cells) {
      if (!cell.have_certificate) continue;
      const double md = static_cast<double>(cell.m);
      const SubsampleCertificate& cert = cell.certificate;
      c.expect(static_cast<double>(cert.selected.size()) <= 60.0 * md,
               "|J| over 60m at " + cell_tag(cell));
      c.expect(static_cast<double>(cert.selected.size()) <= 43200.0 * md,
               "|J| over 43200m at " + cell_tag(cell));

      // Independent dense eigensolve on the regenerated batch.
      const SampleBatch batch = resample_until_concentrated(
          model_main, cell.m, cell.n_initial, cfg_main.threshold, cfg_main.max_attempts,
          derive_seed(cell.seed, static_cast<std::uint64_t>(cell.m)));
      const Index mt = batch.info.rows();
      Matrix s = Matrix::Zero(mt, mt);
      for (Index j : cert.selected) s += batch.info.col(j) * batch.info.col(j).adjoint();
      Eigen::SelfAdjointEigenSolver<Matrix> es_full(s);
      Eigen::SelfAdjointEigenSolver<Matrix> es_head(Matrix(s.topLeftCorner(cell.m, cell.m)));
      Eigen::SelfAdjointEigenSolver<Matrix> es_tail(
          Matrix(s.bottomRightCorner(mt - cell.m, mt - cell.m)));
      const double head_floor = es_head.eigenvalues().minCoeff() / md;
      const double full_cap = es_full.eigenvalues().maxCoeff() / md;
      const double tail_cap = es_tail.eigenvalues().maxCoeff() / md;
      c.expect(std::abs(head_floor - cert.head_floor) <= 1e-10,
               "head_floor drifts at " + cell_tag(cell));
      c.expect(std::abs(full_cap - cert.full_cap) <= 1e-10, "full_cap drifts at " + cell_tag(cell));
      c.expect(std::abs(tail_cap - cert.tail_cap) <= 1e-10, "tail_cap drifts at " + cell_tag(cell));
    }
    c.finish();
  }

  {
    Criterion c("C4", "finite-rank model recovers exactly from rank-many points", 1.0);
    const SpectralModel fr = make_finite_rank(5, 20);
    const RecoveryPlan plan = make_plan_for_points(fr, 5, {0, 4, 8, 12, 16});
    const ErrorReport rep = make_error_report(fr, plan, 5, 1, 0);
    c.expect(rep.g_emp_ls <= 1e-9, "g_emp_ls = " + std::to_string(rep.g_emp_ls));
    c.expect(rep.g_emp_spline <= 1e-9, "g_emp_spline = " + std::to_string(rep.g_emp_spline));
    c.expect(rep.exact_rank_path && rep.local_bound_ok, "exact-rank flags not set");
    c.finish();
  }

  {
    Criterion c("C5", "spline never loses to least squares on random point sets", 60.0);
    const SpectralModel model = fourier_sobolev(1.0, 0.0, 64, 128);
    SeededRng rng(777);
    for (int trial = 0; trial < 20; ++trial) {
      std::set<Index> picked;
      while (picked.size() < 24)
        picked.insert(static_cast<Index>(rng.next_u64() % 128));
      const std::vector<Index> nodes(picked.begin(), picked.end());
      const RecoveryPlan plan = make_plan_for_points(model, 8, nodes);
      const double ls = worst_case_error_ls(model, plan);
      const double sp = worst_case_error_spline(model, nodes);
      c.expect(sp <= ls + 1e-10,
               "spline above least squares on trial " + std::to_string(trial));
    }
    c.finish();
  }

  {
    Criterion c("C6", "median error rate over m fits slope -1 within 0.2", 300.0);
    const ExperimentConfig cfg = main_config("rate", "4,8,16,32");
    const RunOutcome out = run_rate(cfg);
    c.expect(out.exit_code == 0, "rate exit code " + std::to_string(out.exit_code));
    c.expect(out.have_fit, "no fit produced");
    if (out.have_fit) {
      c.expect(std::abs(out.fit.slope - (-1.0)) <= 0.2,
               "slope " + std::to_string(out.fit.slope));
      char buf[48];
      std::snprintf(buf, sizeof(buf), "slope %.4f", out.fit.slope);
      c.note(buf);
    }
    c.finish();
  }

  {
    Criterion c("C7", "reduction, padding, and partition verified on 100 tiny instances", 60.0);
    SeededRng rng(4242);
    int partitions_verified = 0;
    for (int inst = 0; inst < 100; ++inst) {
      const Index mt = 2 + static_cast<Index>(rng.next_u64() % 5);  // 2..6
      const Index m = 1 + static_cast<Index>(rng.next_u64() % mt);  // 1..mt
      const Index lo = std::max<Index>(mt - m, 4);
      const Index n = lo + static_cast<Index>(rng.next_u64() % 3);  // 4..10, full tail rank
      const SampleBatch batch = random_tiny_batch(rng, mt, m, n);

      const FiniteReduction red = reduce_to_finite(batch);
      c.expect(std::abs(red.deviation - batch.residual) <= 1e-10,
               "isometry defect on instance " + std::to_string(inst));
      c.expect(red.max_norm_defect <= 1e-10,
               "column norm defect on instance " + std::to_string(inst));

      const PaddedSystem sys = pad_identity(red, n, m);
      Matrix dev = sys.z_all * sys.z_all.adjoint() / static_cast<double>(n) -
                   Matrix::Identity(sys.p, sys.p);
      Eigen::SelfAdjointEigenSolver<Matrix> es(dev);
      const double dev_norm = std::max(std::abs(es.eigenvalues().minCoeff()),
                                       std::abs(es.eigenvalues().maxCoeff()));
      c.expect(std::abs(dev_norm - sys.deviation_identity) <= 1e-10,
               "padding deviation drifts on instance " + std::to_string(inst));

      if (sys.q > 10) continue;  // keep the exhaustive search cheap
      Matrix s = sys.z_all * sys.z_all.adjoint();
      const auto [a, b] = hermitian_extremes(s);
      if (!(a > 1e-12)) continue;
      const PartitionResult res = partition_oracle(sys, a / 150.0, a, std::max(a, b));
      if (!res.found) continue;
      const double slack = 1e-9 * std::max(1.0, res.upper);
      std::vector<Index> covered;
      for (const auto& part : res.parts) {
        Matrix sp = Matrix::Zero(sys.p, sys.p);
        for (Index i : part) {
          sp += sys.z_all.col(i) * sys.z_all.col(i).adjoint();
          covered.push_back(i);
        }
        const auto [lo_p, hi_p] = hermitian_extremes(sp);
        c.expect(lo_p >= res.lower - slack, "partition floor on instance " + std::to_string(inst));
        c.expect(hi_p <= res.upper + slack, "partition cap on instance " + std::to_string(inst));
      }
      std::sort(covered.begin(), covered.end());
      bool exact_cover = static_cast<Index>(covered.size()) == sys.q;
      for (Index i = 0; exact_cover && i < sys.q; ++i)
        exact_cover = covered[static_cast<std::size_t>(i)] == i;
      c.expect(exact_cover, "partition is not a cover on instance " + std::to_string(inst));
      ++partitions_verified;
    }
    c.expect(partitions_verified >= 10, "too few partition instances verified");
    c.note(std::to_string(partitions_verified) + " partitions verified");
    c.finish();
  }

  {
    Criterion c("C8", "adversary vanishes at the points and resists normalization decay", 30.0);
    HaarClassSpec spec;
    spec.beta = 2.0;
    spec.l_max = 40;
    double lo_norm = 0.0, hi_norm = 0.0;
    bool first = true;
    for (Index n : {8, 16, 32, 64}) {
      std::vector<double> pts(static_cast<std::size_t>(n));
      for (Index k = 0; k < n; ++k)
        pts[static_cast<std::size_t>(k)] = static_cast<double>(k) / static_cast<double>(n);
      const HaarAdversary adv = haar_adversary(spec, pts);
      double vanish = 0.0;
      for (double x : pts) vanish = std::max(vanish, std::abs(adv.eval(x)));
      c.expect(vanish <= 1e-12, "nonzero value at a point for n = " + std::to_string(n));
      const double nd = static_cast<double>(n);
      const double normalized =
          adv.l2_norm * std::sqrt(nd) * std::pow(std::log(nd), spec.beta - 1.0);
      c.expect(normalized > 0.0, "normalized norm vanished at n = " + std::to_string(n));
      if (first) {
        lo_norm = hi_norm = normalized;
        first = false;
      } else {
        lo_norm = std::min(lo_norm, normalized);
        hi_norm = std::max(hi_norm, normalized);
      }
    }
    c.expect(lo_norm >= hi_norm / 2.0, "normalized norm decays by more than factor 2");

    HaarClassSpec ll;
    ll.loglog = true;
    ll.eps = 0.1;
    const HaarAdversary adv = haar_adversary(ll, {0.0, 0.5});
    c.expect(adv.lower_bound >= 0.9 - 1e-12,
             "loglog lower bound " + std::to_string(adv.lower_bound));
    c.finish();
  }

  {
    Criterion c("C9", "density normalizes, vectors stay bounded, residual shrinks", 120.0);
    const SpectralModel model = fourier_sobolev(1.0, 0.0, 64, 128);
    for (Index m : {1, 4, 32}) {
      const Eigen::VectorXd rho = density_all(model, m);
      double mass = 0.0;
      for (Index i = 0; i < rho.size(); ++i) mass += model.grid().weights()(i) * rho(i);
      c.expect(std::abs(mass - 1.0) <= 1e-10, "density mass off at m = " + std::to_string(m));
    }

    const SampleBatch batch = draw_points(model, 8, 200, 9001);
    c.expect(batch.target_diag.maxCoeff() == 1.0, "||E|| is not exactly 1");
    for (Index i = 0; i < batch.n(); ++i) {
      const double nsq = batch.info.col(i).squaredNorm();
      c.expect(nsq <= 16.0 * (1.0 + 1e-12), "||y||^2 above 2m at column " + std::to_string(i));
    }

    const SpectralModel small = fourier_sobolev(1.0, 0.0, 32, 64);
    double prev_median = 0.0;
    bool have_prev = false;
    for (Index n : {100, 1000, 10000}) {
      std::vector<double> residuals;
      for (std::uint64_t seed = 1; seed <= 11; ++seed) {
        const SampleBatch b = draw_points(small, 4, n, seed);
        residuals.push_back(b.residual);
      }
      std::sort(residuals.begin(), residuals.end());
      const double median = residuals[residuals.size() / 2];
      if (have_prev)
        c.expect(median < prev_median, "median residual did not shrink at n = " + std::to_string(n));
      prev_median = median;
      have_prev = true;
    }
    c.finish();
  }

  std::printf("%d of 9 criteria failed\n", g_failures);
  return g_failures;
}
