#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "samplerec/analysis.hpp"
#include "samplerec/density.hpp"
#include "samplerec/models.hpp"
#include "samplerec/recovery.hpp"
#include "samplerec/rng.hpp"
#include "samplerec/subsample.hpp"

using namespace samplerec;

namespace {

SpectralModel three_mode_model() {
  const DomainGrid grid = DomainGrid::uniform01(3);
  Eigen::VectorXd sigma(3);
  sigma << 1.0, 0.5, 0.25;
  Matrix basis = std::sqrt(3.0) * Matrix::Identity(3, 3);
  return SpectralModel(grid, sigma, basis, true);
}

RecoveryPlan certified_fourier_plan(SpectralModel& model_out) {
  model_out = fourier_sobolev(1.0, 0.0, 64, 128);
  const Index m = 4;
  const Index n = default_sample_count(8.0, m);
  SampleBatch batch = resample_until_concentrated(model_out, m, n, 0.5, 50, 11);
  const FiniteReduction red = reduce_to_finite(batch);
  const PaddedSystem sys = pad_identity(red, n, m);
  const SubsampleCertificate picked = greedy_sparsify(sys, m, 60 * static_cast<int>(m));
  const SubsampleCertificate cert = certify(batch, picked.selected, m, picked.budget);
  return build_plan(model_out, batch, cert);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

TEST_CASE("benchmark bounds on frozen models", "[analysis]") {
  const SpectralModel tiny = three_mode_model();
  const TheoremBounds tb1 = theorem_bounds(tiny, 1);
  // tail_sum(1) = 1/4 + 1/16 = 0.3125 for sigma = (1, 1/2, 1/4).
  CHECK_THAT(tb1.bound_main, Catch::Matchers::WithinRel(std::sqrt(0.3125), 1e-14));
  CHECK_THAT(tb1.bound_local, Catch::Matchers::WithinRel(433.0 * 0.3125, 1e-14));
  CHECK_THAT(tb1.bound_coarse_sq, Catch::Matchers::WithinRel(866.0 * 0.3125, 1e-14));

  const SpectralModel fs = fourier_sobolev(1.0, 0.0, 512, 1024);
  const TheoremBounds tb4 = theorem_bounds(fs, 4);
  // Independent summation of the alpha = 1 Fourier widths, M = 512.
  CHECK_THAT(tb4.bound_main, Catch::Matchers::WithinRel(0.2341856831896357, 1e-12));
  CHECK_THAT(tb4.bound_local, Catch::Matchers::WithinRel(23.74699051336145, 1e-12));
  CHECK_THAT(tb4.bound_coarse_sq, Catch::Matchers::WithinRel(85.08078658227845, 1e-12));
  const TheoremBounds tb8 = theorem_bounds(fs, 8);
  CHECK_THAT(tb8.bound_main, Catch::Matchers::WithinRel(0.12018776757687415, 1e-12));
  CHECK_THAT(tb8.bound_local, Catch::Matchers::WithinRel(6.2547280727238075, 1e-12));
  CHECK_THAT(tb8.bound_coarse_sq, Catch::Matchers::WithinRel(23.74699051336145, 1e-12));

  CHECK_THROWS_AS(theorem_bounds(tiny, 0), std::invalid_argument);
  CHECK_THROWS_AS(theorem_bounds(tiny, 3), std::invalid_argument);
}

TEST_CASE("worst case error dominates the unit ball", "[analysis]") {
  const SpectralModel model = fourier_sobolev(1.0, 0.0, 16, 32);
  const Index m = 4;
  const std::vector<Index> nodes = {1, 5, 9, 13, 17, 21, 25, 29};
  const RecoveryPlan plan = make_plan_for_points(model, m, nodes);

  const double g_ls = worst_case_error_ls(model, plan);
  const double g_sp = worst_case_error_spline(model, nodes);
  REQUIRE(g_ls > 0.0);
  REQUIRE(g_sp > 0.0);
  CHECK(g_sp <= g_ls + 1e-10);

  SeededRng rng(2024);
  const Index mt = model.m_trunc();
  for (int trial = 0; trial < 200; ++trial) {
    Vector c(mt);
    for (Index k = 0; k < mt; ++k)
      c(k) = std::complex<double>(rng.uniform01() - 0.5, rng.uniform01() - 0.5);
    c /= c.norm();  // unit ball boundary of H
    Vector f = Vector::Zero(model.grid().size());
    for (Index k = 0; k < mt; ++k) f += c(k) * model.sigma(k) * model.basis().col(k);

    const Vector coeffs = recover(plan, sample_at(plan, f));
    const double err_ls = model.l2_norm(f - head_function(model, coeffs));
    CHECK(err_ls <= g_ls + 1e-10);

    const SplineResult sr = spline_interpolant(model, nodes, sample_at(plan, f));
    const double err_sp = model.l2_norm(f - sr.values);
    CHECK(err_sp <= g_sp + 1e-10);
  }

  // Zero algorithm on no points: worst case is the top width.
  const RecoveryPlan empty = plan_from_nodes(model, m, {}, Eigen::VectorXd(0),
                                             SubsampleCertificate{}, gamma_m(model, m).value);
  CHECK_THAT(worst_case_error_ls(model, empty), Catch::Matchers::WithinRel(model.sigma(0), 1e-12));
  CHECK_THAT(worst_case_error_spline(model, {}), Catch::Matchers::WithinRel(model.sigma(0), 1e-12));
}

TEST_CASE("kernel certificate reproduces the plan eigenvalues", "[analysis]") {
  SpectralModel model = fourier_sobolev(1.0, 0.0, 64, 128);
  const RecoveryPlan plan = certified_fourier_plan(model);

  const KernelCertificate kc = kernel_certificate(model, plan);
  CHECK_THAT(kc.head_floor, Catch::Matchers::WithinRel(plan.certificate.head_floor, 1e-8));
  CHECK_THAT(kc.tail_cap, Catch::Matchers::WithinRel(plan.certificate.tail_cap, 1e-8));

  // The kernel Gram and the factored Gram are the same matrix.
  const Index n = plan.n();
  Matrix gg(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double s = 1.0 / std::sqrt(plan.rho_vals(i) * plan.rho_vals(j));
      gg(i, j) = s * kernel_eval(model, plan.points[static_cast<std::size_t>(i)],
                                 plan.points[static_cast<std::size_t>(j)], KernelPart::head,
                                 plan.m);
    }
  const Matrix factored = plan.g * plan.g.adjoint();
  CHECK((gg - factored).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("rate fit recovers exact power laws", "[analysis]") {
  std::vector<std::pair<double, double>> series;
  for (double n : {4.0, 8.0, 16.0, 32.0, 64.0}) series.push_back({n, 3.5 / n});
  const RateFit fit = rate_fit(series);
  CHECK(fit.count == 5);
  CHECK_THAT(fit.slope, Catch::Matchers::WithinAbs(-1.0, 1e-12));
  CHECK_THAT(fit.intercept, Catch::Matchers::WithinAbs(std::log(3.5), 1e-12));
  CHECK(fit.residual_rms <= 1e-13);

  std::vector<std::pair<double, double>> flat = {{4.0, 2.0}, {8.0, 2.0}, {16.0, 2.0}};
  CHECK_THAT(rate_fit(flat).slope, Catch::Matchers::WithinAbs(0.0, 1e-13));

  CHECK_THROWS_AS(rate_fit({{4.0, 1.0}, {8.0, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(rate_fit({{4.0, 1.0}, {8.0, 0.5}, {16.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(rate_fit({{4.0, 1.0}, {4.0, 0.5}, {4.0, 0.25}}), std::invalid_argument);
}

TEST_CASE("error reports carry the certified chain", "[analysis]") {
  SpectralModel model = fourier_sobolev(1.0, 0.0, 64, 128);
  const RecoveryPlan plan = certified_fourier_plan(model);
  const Index n_initial = default_sample_count(8.0, 4);
  const ErrorReport rep = make_error_report(model, plan, n_initial, 2, 11, 1.0, 0.0);

  CHECK(rep.model == model.name());
  CHECK(rep.m == 4);
  CHECK(rep.n_initial == n_initial);
  CHECK(rep.n_sub == plan.n());
  CHECK(rep.seed == 11);
  CHECK(rep.attempts == 2);
  CHECK(rep.d_m == model.sigma(4));
  CHECK(rep.neglected_tail_term == std::sqrt(model.neglected_tail()));

  CHECK_THAT(rep.g_emp_ls, Catch::Matchers::WithinRel(worst_case_error_ls(model, plan), 1e-12));
  CHECK_THAT(rep.g_emp_spline,
             Catch::Matchers::WithinRel(worst_case_error_spline(model, plan.points), 1e-12));

  const TheoremBounds tb = theorem_bounds(model, 4);
  CHECK(rep.bound_main == tb.bound_main);
  CHECK(rep.bound_local == tb.bound_local);
  CHECK_THAT(rep.bound_coarse_sq, Catch::Matchers::WithinRel(tb.bound_coarse_sq, 1e-14));

  const TailStats ts = make_tail_stats(model, 4);
  const double c_plan = 1.0 + rep.full_cap / rep.head_floor;
  CHECK_THAT(rep.bound_local_effective,
             Catch::Matchers::WithinRel(c_plan * ts.max_branch, 1e-12));
  CHECK(rep.local_bound_ok == (rep.g_emp_ls * rep.g_emp_ls <= rep.bound_local_effective + 1e-10));
  CHECK(rep.local_bound_ok);
  CHECK_THAT(rep.ratio_main,
             Catch::Matchers::WithinRel(rep.g_emp_ls / std::sqrt(rep.bound_coarse_sq / 866.0),
                                        1e-12));
  CHECK(rep.spline_order_ok == (rep.g_emp_spline <= rep.g_emp_ls + 1e-10));
  CHECK_FALSE(rep.exact_rank_path);
  CHECK(rep.head_floor == plan.certificate.head_floor);
  CHECK(rep.full_cap == plan.certificate.full_cap);
}

TEST_CASE("exact rank cut reports an exact recovery", "[analysis]") {
  const SpectralModel model = make_finite_rank(5, 20);
  const std::vector<Index> nodes = {0, 4, 8, 12, 16};
  const RecoveryPlan plan = make_plan_for_points(model, 5, nodes);
  const ErrorReport rep = make_error_report(model, plan, 5, 1, 0);
  CHECK(rep.exact_rank_path);
  CHECK(rep.g_emp_ls <= 1e-9);
  CHECK(rep.g_emp_spline <= 1e-9);
  CHECK(rep.local_bound_ok);
  CHECK(rep.d_m == 0.0);
}

TEST_CASE("csv rows round trip at full precision", "[analysis]") {
  SpectralModel model = fourier_sobolev(1.0, 0.0, 64, 128);
  const RecoveryPlan plan = certified_fourier_plan(model);
  ErrorReport rep = make_error_report(model, plan, 52, 2, 11, 1.0, 0.0);
  rep.bound_main = 0.1;  // awkward decimals on purpose
  rep.ratio_local = 1.0 / 3.0;
  rep.full_cap = 1e-300;

  const std::vector<std::string> head = split_csv(csv_header());
  const std::vector<std::string> row = split_csv(csv_row(rep));
  REQUIRE(head.size() == 17);
  REQUIRE(row.size() == head.size());
  CHECK(row[0] == rep.model);

  auto field = [&](const char* name) {
    for (std::size_t i = 0; i < head.size(); ++i)
      if (head[i] == name) return std::strtod(row[i].c_str(), nullptr);
    FAIL(std::string("missing column ") + name);
    return 0.0;
  };
  CHECK(field("g_emp_ls") == rep.g_emp_ls);
  CHECK(field("bound_main") == rep.bound_main);
  CHECK(field("ratio_local") == rep.ratio_local);
  CHECK(field("full_cap") == rep.full_cap);
  CHECK(field("head_floor") == rep.head_floor);
  CHECK(field("m") == 4.0);
  CHECK(field("seed") == 11.0);
}
