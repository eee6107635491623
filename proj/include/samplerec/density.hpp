#pragma once
//
// samplerec/density.hpp
//
// Sampling density, point drawing and matrix concentration. The density at
// head dimension m mixes the normalized head spectral function with the
// sigma-weighted tail,
//
//   rho_m(x) = 1/2 * ( (1/m) sum_{k<m} |b_k(x)|^2
//                      + sum_{k>=m} sigma_k^2 |b_k(x)|^2 / sum_{k>=m} sigma_k^2 ),
//
// and each drawn point x_i carries an information vector with the two-branch
// weight rule
//
//   (y_i)_k = rho_m(x_i)^{-1/2} b_k(x_i)                      for k < m,
//   (y_i)_k = rho_m(x_i)^{-1/2} gamma_m^{-1} sigma_k b_k(x_i) for k >= m,
//
// so that (1/n) sum y_i y_i^* concentrates around the diagonal target
// E = diag(1, ..., 1, sigma_k^2/gamma_m^2, ...) with unit spectral norm.
// The normalization gives ||y_i||^2 <= 2m identically. On a rank-exact
// model cut at its full rank the tail branch is empty: the density is the
// head term alone and E = I_m.
//

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "samplerec/errors.hpp"
#include "samplerec/linalg.hpp"
#include "samplerec/rng.hpp"
#include "samplerec/spectral_model.hpp"

namespace samplerec {

struct SampleBatch {
  Index m = 0;
  std::vector<Index> points;     // grid node index per sample
  Eigen::VectorXd density_vals;  // rho_m at each drawn node
  Matrix info;                   // M_trunc x n, column i = y_i
  Eigen::VectorXd target_diag;   // diagonal of E
  double gamma = 0.0;            // gamma_m used for the tail branch (0 on the head-only path)
  bool head_only = false;        // rank-exact model cut at m = M_trunc
  double residual = 0.0;         // ||(1/n) sum y y^* - E||
  double threshold = 0.0;        // threshold the residual was last checked against
  std::uint64_t seed = 0;
  int attempts = 0;
  std::string rng_algorithm = kRngAlgorithm;

  Index n() const { return info.cols(); }
};

// Density values at every grid node. Head-only on the finite-rank path.
inline Eigen::VectorXd density_all(const SpectralModel& model, Index m) {
  const Index mt = model.m_trunc();
  if (m < 1 || m > mt) throw std::invalid_argument("density: m out of range");
  const bool head_only = (m == mt);
  if (head_only && !model.rank_exact())
    throw std::invalid_argument("density: m = M_trunc requires a rank-exact model");
  const Eigen::VectorXd head =
      model.basis().leftCols(m).cwiseAbs2().rowwise().sum() / static_cast<double>(m);
  Eigen::VectorXd rho;
  if (head_only) {
    rho = head;
  } else {
    const double tail_sq = tail_sum(model, m);
    if (!(tail_sq > 0.0)) throw degenerate_density("density: tail mass vanished below M_trunc");
    Eigen::VectorXd st(mt - m);
    for (Index k = m; k < mt; ++k) st(k - m) = model.sigma(k) * model.sigma(k);
    const Eigen::VectorXd tail = (model.basis().rightCols(mt - m).cwiseAbs2() * st) / tail_sq;
    rho = 0.5 * (head + tail);
  }
  if (!rho.allFinite() || rho.minCoeff() < 0.0)
    throw degenerate_density("density: non-finite or negative value");
  const double quad = rho.dot(model.grid().weights());
  if (!(std::abs(quad - 1.0) <= model.eps_orth() + 1e-12))
    throw degenerate_density("density: grid quadrature " + std::to_string(quad) +
                             " deviates from 1 beyond tolerance");
  return rho;
}

inline double density_eval(const SpectralModel& model, Index m, Index node) {
  if (node < 0 || node >= model.grid().size())
    throw std::invalid_argument("density: node out of range");
  return density_all(model, m)(node);
}

// Diagonal of the concentration target E for head dimension m.
inline Eigen::VectorXd concentration_target(const SpectralModel& model, Index m, double gamma,
                                            bool head_only) {
  const Index mt = model.m_trunc();
  Eigen::VectorXd e = Eigen::VectorXd::Ones(head_only ? m : mt);
  if (!head_only) {
    for (Index k = m; k < mt; ++k) {
      const double r = model.sigma(k) / gamma;
      e(k) = r * r;
    }
  }
  return e;
}

// ||(1/n) sum y y^* - diag(e)|| by dense Hermitian eigensolve.
inline double concentration_residual(const Matrix& info, const Eigen::VectorXd& target_diag) {
  const Index n = info.cols();
  if (n == 0) throw std::invalid_argument("concentration: empty batch");
  Matrix dev = (info * info.adjoint()) / static_cast<double>(n);
  dev -= Matrix(target_diag.cast<Complex>().asDiagonal());
  return spectral_norm_hermitian(dev);
}

struct ConcentrationReport {
  double residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

inline ConcentrationReport concentration_check(const SampleBatch& batch, double t) {
  ConcentrationReport rep;
  rep.threshold = t;
  rep.residual = concentration_residual(batch.info, batch.target_diag);
  rep.pass = rep.residual <= t;
  return rep;
}

// Default sample count ceil(C * m * log(m+1)).
inline Index default_sample_count(double c, Index m) {
  return static_cast<Index>(std::ceil(c * static_cast<double>(m) * std::log(static_cast<double>(m) + 1.0)));
}

namespace detail {

// One i.i.d. draw of n points by inverse CDF over the grid mass rho * w.
inline SampleBatch draw_with_engine_seed(const SpectralModel& model, Index m, Index n,
                                         std::uint64_t engine_seed, std::uint64_t seed_record) {
  if (n < 1) throw std::invalid_argument("draw_points: n must be positive");
  const Index mt = model.m_trunc();
  const bool head_only = (m == mt);
  const Eigen::VectorXd rho = density_all(model, m);
  const Eigen::VectorXd mass = rho.cwiseProduct(model.grid().weights());
  const double total = mass.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw degenerate_density("draw_points: zero or non-finite total mass");
  std::vector<double> cdf(static_cast<std::size_t>(mass.size()));
  double acc = 0.0;
  for (Index i = 0; i < mass.size(); ++i) {
    acc += mass(i);
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  cdf.back() = total;

  SampleBatch batch;
  batch.m = m;
  batch.head_only = head_only;
  batch.seed = seed_record;
  batch.attempts = 1;
  if (!head_only) batch.gamma = make_tail_stats(model, m).gamma;
  batch.target_diag = concentration_target(model, m, batch.gamma, head_only);

  SeededRng rng(engine_seed);
  batch.points.resize(static_cast<std::size_t>(n));
  batch.density_vals.resize(n);
  const Index dim = head_only ? m : mt;
  batch.info.resize(dim, n);
  for (Index i = 0; i < n; ++i) {
    const double u = rng.uniform01() * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    Index node = static_cast<Index>(it - cdf.begin());
    if (node >= mass.size()) node = mass.size() - 1;
    const double r = rho(node);
    if (!(r > 0.0)) throw degenerate_density("draw_points: drew a node with zero density");
    batch.points[static_cast<std::size_t>(i)] = node;
    batch.density_vals(i) = r;
    const double s = 1.0 / std::sqrt(r);
    for (Index k = 0; k < m; ++k) batch.info(k, i) = s * model.basis(node, k);
    for (Index k = m; k < dim; ++k)
      batch.info(k, i) = s * (model.sigma(k) / batch.gamma) * model.basis(node, k);
  }
  batch.residual = concentration_residual(batch.info, batch.target_diag);
  return batch;
}

}  // namespace detail

// Single batch draw; the engine is seeded with splitmix64(seed).
inline SampleBatch draw_points(const SpectralModel& model, Index m, Index n, std::uint64_t seed) {
  return detail::draw_with_engine_seed(model, m, n, derive_seed(seed, 0), seed);
}

// Redraws with derived per-attempt streams until the concentration residual
// meets t. Throws concentration_failure with the best residual seen.
inline SampleBatch resample_until_concentrated(const SpectralModel& model, Index m, Index n,
                                               double t, int max_attempts, std::uint64_t seed) {
  if (max_attempts < 1) throw std::invalid_argument("resample: max_attempts must be >= 1");
  double best = -1.0;
  for (int a = 0; a < max_attempts; ++a) {
    SampleBatch batch = detail::draw_with_engine_seed(
        model, m, n, derive_seed(seed, static_cast<std::uint64_t>(a)), seed);
    batch.attempts = a + 1;
    batch.threshold = t;
    if (batch.residual <= t) return batch;
    if (best < 0.0 || batch.residual < best) best = batch.residual;
  }
  throw concentration_failure(best, max_attempts,
                              "resample: residual stayed above threshold after " +
                                  std::to_string(max_attempts) + " attempts (best " +
                                  std::to_string(best) + ")");
}

}  // namespace samplerec
