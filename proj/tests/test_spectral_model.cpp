#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "samplerec/models.hpp"
#include "samplerec/spectral_model.hpp"

using namespace samplerec;

namespace {

// Three delta functions on a three-node grid: exactly orthonormal.
SpectralModel three_mode_model(bool rank_exact) {
  const DomainGrid grid = DomainGrid::uniform01(3);
  Eigen::VectorXd sigma(3);
  sigma << 1.0, 0.5, 0.25;
  Matrix basis = Matrix::Zero(3, 3);
  const double s = std::sqrt(3.0);
  for (Index k = 0; k < 3; ++k) basis(k, k) = s;
  return SpectralModel(grid, sigma, basis, rank_exact);
}

// b_0 = 1, b_1 = sqrt(2) cos(2 pi x) on the uniform 8-point grid.
SpectralModel cosine_model() {
  const DomainGrid grid = DomainGrid::uniform01(8);
  Eigen::VectorXd sigma(2);
  sigma << 1.0, 0.5;
  Matrix basis(8, 2);
  for (Index i = 0; i < 8; ++i) {
    const double x = grid.coords()(i, 0);
    basis(i, 0) = 1.0;
    basis(i, 1) = std::sqrt(2.0) * std::cos(2.0 * M_PI * x);
  }
  return SpectralModel(grid, sigma, basis, true);
}

}  // namespace

TEST_CASE("construction validates shape, monotonicity and orthonormality", "[spectral]") {
  const DomainGrid grid = DomainGrid::uniform01(8);
  Eigen::VectorXd sigma(2);
  sigma << 1.0, 0.5;
  Matrix basis = Matrix::Zero(8, 2);
  for (Index i = 0; i < 8; ++i) {
    basis(i, 0) = 1.0;
    basis(i, 1) = std::cos(2.0 * M_PI * grid.coords()(i, 0));  // not normalized
  }
  CHECK_THROWS_AS(SpectralModel(grid, sigma, basis), std::invalid_argument);

  Eigen::VectorXd increasing(2);
  increasing << 0.5, 1.0;
  Matrix ok(8, 2);
  for (Index i = 0; i < 8; ++i) {
    ok(i, 0) = 1.0;
    ok(i, 1) = std::sqrt(2.0) * std::cos(2.0 * M_PI * grid.coords()(i, 0));
  }
  CHECK_THROWS_AS(SpectralModel(grid, increasing, ok), std::invalid_argument);

  Eigen::VectorXd with_zero(2);
  with_zero << 1.0, 0.0;
  CHECK_THROWS_AS(SpectralModel(grid, with_zero, ok), std::invalid_argument);

  const SpectralModel model = cosine_model();
  CHECK(model.m_trunc() == 2);
  CHECK(model.orth_residual() <= 1e-14);
}

TEST_CASE("tail_sum sums the squared tail exactly", "[spectral]") {
  const SpectralModel model = three_mode_model(true);
  CHECK(tail_sum(model, 1) == 0.3125);
  CHECK(tail_sum(model, 2) == 0.0625);
  CHECK(tail_sum(model, 3) == 0.0);
  CHECK(tail_sum(model, 0) == 1.3125);
  CHECK_THROWS_AS(tail_sum(model, 4), std::invalid_argument);
}

TEST_CASE("tail stats pick the dominant branch", "[spectral]") {
  const SpectralModel model = three_mode_model(true);

  const TailStats t1 = make_tail_stats(model, 1);
  CHECK(t1.sigma_m == 0.5);
  CHECK(t1.tail_sq == 0.3125);
  CHECK_FALSE(t1.head_branch);
  CHECK_THAT(t1.gamma, Catch::Matchers::WithinAbs(0.5590169943749475, 1e-15));
  CHECK(t1.bound_main == t1.gamma);  // tail branch: both are sqrt(tail/m)
  CHECK_THAT(t1.bound_local, Catch::Matchers::WithinRel(433.0 * 0.3125, 1e-15));

  const TailStats t2 = make_tail_stats(model, 2);
  CHECK(t2.head_branch);
  CHECK(t2.gamma == 0.25);
  CHECK_THAT(t2.bound_main, Catch::Matchers::WithinAbs(0.1767766952966369, 1e-15));
  CHECK_THAT(t2.bound_local, Catch::Matchers::WithinRel(433.0 * 0.0625, 1e-15));

  const Gamma g1 = gamma_m(model, 1);
  CHECK(g1.value == t1.gamma);
  CHECK(g1.head_branch == t1.head_branch);
}

TEST_CASE("the exact rank cut degenerates and non-exact models reject it", "[spectral]") {
  const SpectralModel exact = three_mode_model(true);
  const TailStats ts = make_tail_stats(exact, 3);
  CHECK(ts.gamma == 0.0);
  CHECK(ts.tail_sq == 0.0);
  CHECK(ts.bound_local == 0.0);
  CHECK_THROWS_AS(gamma_m(exact, 3), finite_rank_signal);

  const SpectralModel truncated = three_mode_model(false);
  CHECK_THROWS_AS(make_tail_stats(truncated, 3), std::invalid_argument);
}

TEST_CASE("fourier tail statistics match direct summation", "[spectral]") {
  // sigma_k = (k+1)^{-1}, M_trunc = 512; reference values from an
  // independent compensated summation.
  const SpectralModel model = fourier_sobolev(1.0, 0.0, 512, 1024);

  const TailStats t4 = make_tail_stats(model, 4);
  CHECK_THAT(t4.tail_sq, Catch::Matchers::WithinRel(0.21937173684398567, 1e-12));
  CHECK_THAT(t4.bound_main, Catch::Matchers::WithinRel(0.2341856831896357, 1e-12));
  CHECK_THAT(t4.gamma, Catch::Matchers::WithinRel(0.2341856831896357, 1e-12));
  CHECK_FALSE(t4.head_branch);

  const TailStats t8 = make_tail_stats(model, 8);
  CHECK_THAT(t8.tail_sq, Catch::Matchers::WithinRel(0.11556079580090176, 1e-12));
  CHECK_THAT(t8.bound_main, Catch::Matchers::WithinRel(0.12018776757687415, 1e-12));
  CHECK_THAT(t8.bound_local, Catch::Matchers::WithinRel(6.2547280727238075, 1e-12));
}

TEST_CASE("kernel evaluation splits into head and tail", "[spectral]") {
  const SpectralModel model = cosine_model();
  // K(0,0) = 1 + (1/4) * 2, head at m=1 is the unweighted |b_0|^2.
  CHECK_THAT(kernel_eval(model, 0, 0).real(), Catch::Matchers::WithinAbs(1.5, 1e-15));
  CHECK_THAT(kernel_eval(model, 0, 0, KernelPart::head, 1).real(),
             Catch::Matchers::WithinAbs(1.0, 1e-15));
  CHECK_THAT(kernel_eval(model, 0, 0, KernelPart::tail, 1).real(),
             Catch::Matchers::WithinAbs(0.5, 1e-15));
  CHECK(std::abs(kernel_eval(model, 0, 0).imag()) <= 1e-15);

  // full = sigma-weighted head + tail at every split and node pair
  for (Index m = 0; m <= 2; ++m) {
    for (Index x : {0, 3, 5}) {
      for (Index y : {1, 6}) {
        Complex weighted_head(0.0, 0.0);
        for (Index k = 0; k < m; ++k)
          weighted_head += model.sigma(k) * model.sigma(k) * model.basis(x, k) *
                           std::conj(model.basis(y, k));
        const Complex sum = weighted_head + kernel_eval(model, x, y, KernelPart::tail, m);
        const Complex full = kernel_eval(model, x, y);
        CHECK(std::abs(sum - full) <= 1e-14);
      }
    }
  }
}

TEST_CASE("grid inner products and the projection tail norm", "[spectral]") {
  const SpectralModel model = cosine_model();
  const Vector b0 = model.basis().col(0);
  const Vector b1 = model.basis().col(1);
  CHECK_THAT(std::abs(model.dot(b1, b1)), Catch::Matchers::WithinAbs(1.0, 1e-14));
  CHECK(std::abs(model.dot(b1, b0)) <= 1e-14);
  CHECK_THAT(model.l2_norm(b1), Catch::Matchers::WithinAbs(1.0, 1e-14));

  // f = sigma_1 b_1 has tail H norm 1 at m=1 and 0 at m=2.
  const Vector f = model.sigma(1) * b1;
  const HTailNorm h1 = projection_tail_h_norm(model, f, 1);
  CHECK_THAT(h1.h_norm, Catch::Matchers::WithinAbs(1.0, 1e-13));
  CHECK(h1.span_residual <= 1e-13);
  CHECK(projection_tail_h_norm(model, f, 2).h_norm <= 1e-13);

  // a pure sine lies outside the span and is reported, not measured
  Vector sine(8);
  for (Index i = 0; i < 8; ++i)
    sine(i) = std::sin(2.0 * M_PI * model.grid().coords()(i, 0));
  const HTailNorm hs = projection_tail_h_norm(model, sine, 0);
  CHECK(hs.h_norm <= 1e-13);
  CHECK_THAT(hs.span_residual, Catch::Matchers::WithinAbs(std::sqrt(0.5), 1e-13));
}
