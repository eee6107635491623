#pragma once
//
// samplerec/spectral_model.hpp
//
// A separable RKHS represented by its singular value decomposition against
// the grid L2 inner product: positive non-increasing singular values sigma_k
// and basis functions b_k that are orthonormal on the grid. The functions
// sigma_k b_k form an orthonormal basis of the Hilbert space H, so the k-th
// approximation width of the unit ball equals sigma_k.
//

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "samplerec/errors.hpp"
#include "samplerec/grid.hpp"
#include "samplerec/linalg.hpp"

namespace samplerec {

class SpectralModel {
 public:
  // basis(i, k) = b_k evaluated at grid node i. Orthonormality of the
  // columns under the grid weights is asserted at construction within
  // eps_orth. rank_exact marks a genuinely finite-rank model (sigma_k = 0
  // for k >= M_trunc exactly); otherwise neglected_tail declares the
  // truncated mass sum_{k >= M_trunc} sigma_k^2.
  SpectralModel(DomainGrid grid, Eigen::VectorXd sigma, Matrix basis, bool rank_exact = false,
                double neglected_tail = 0.0, double eps_orth = 1e-8, std::string name = "custom")
      : grid_(std::move(grid)),
        sigma_(std::move(sigma)),
        basis_(std::move(basis)),
        rank_exact_(rank_exact),
        neglected_tail_(neglected_tail),
        eps_orth_(eps_orth),
        name_(std::move(name)) {
    const Index m_trunc = sigma_.size();
    if (m_trunc < 1) throw std::invalid_argument("model: empty sigma");
    if (basis_.rows() != grid_.size() || basis_.cols() != m_trunc)
      throw std::invalid_argument("model: basis shape mismatch");
    if (grid_.size() < m_trunc)
      throw std::invalid_argument("model: node count below truncation dimension");
    if (!(neglected_tail_ >= 0.0))
      throw std::invalid_argument("model: negative neglected tail");
    if (rank_exact_ && neglected_tail_ != 0.0)
      throw std::invalid_argument("model: rank-exact model cannot neglect a tail");
    for (Index k = 0; k < m_trunc; ++k) {
      if (!(sigma_(k) > 0.0) || !std::isfinite(sigma_(k)))
        throw std::invalid_argument("model: sigma must be positive and finite");
      if (k > 0 && sigma_(k) > sigma_(k - 1) * (1.0 + 1e-12))
        throw std::invalid_argument("model: sigma must be non-increasing");
    }
    const Matrix gram =
        basis_.adjoint() * (grid_.weights().asDiagonal() * basis_);
    orth_residual_ = (gram - Matrix::Identity(m_trunc, m_trunc)).cwiseAbs().maxCoeff();
    if (!(orth_residual_ <= eps_orth_))
      throw std::invalid_argument("model: basis not orthonormal on the grid (residual " +
                                  std::to_string(orth_residual_) + ")");
  }

  Index m_trunc() const { return sigma_.size(); }
  const Eigen::VectorXd& sigma() const { return sigma_; }
  double sigma(Index k) const { return sigma_(k); }
  const Matrix& basis() const { return basis_; }
  Complex basis(Index node, Index k) const { return basis_(node, k); }
  const DomainGrid& grid() const { return grid_; }
  bool rank_exact() const { return rank_exact_; }
  double neglected_tail() const { return neglected_tail_; }
  double eps_orth() const { return eps_orth_; }
  double orth_residual() const { return orth_residual_; }
  const std::string& name() const { return name_; }

  // Grid L2 inner product, linear in the first argument.
  Complex dot(const Vector& f, const Vector& g) const {
    return (g.conjugate().cwiseProduct(f).cwiseProduct(grid_.weights().cast<Complex>())).sum();
  }
  double l2_norm(const Vector& f) const {
    return std::sqrt(std::max(0.0, (f.cwiseAbs2().cwiseProduct(grid_.weights())).sum()));
  }

 private:
  DomainGrid grid_;
  Eigen::VectorXd sigma_;
  Matrix basis_;
  bool rank_exact_;
  double neglected_tail_;
  double eps_orth_;
  std::string name_;
  double orth_residual_ = 0.0;
};

// sum_{k >= m} sigma_k^2 by compensated summation, smallest terms first.
inline double tail_sum(const SpectralModel& model, Index m) {
  const Index mt = model.m_trunc();
  if (m < 0 || m > mt) throw std::invalid_argument("tail_sum: m out of range");
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(mt - m));
  for (Index k = mt - 1; k >= m; --k) terms.push_back(model.sigma(k) * model.sigma(k));
  return kahan_sum(terms);
}

// Tail statistics at head dimension m. gamma is the larger of sigma_m and
// sqrt(tail_sq/m); head_branch records which branch won. bound_main and
// bound_local are the benchmark quantities sqrt(tail_sq/m) and
// 433 * max(sigma_m^2, tail_sq/m).
struct TailStats {
  Index m = 0;
  double sigma_m = 0.0;
  double tail_sq = 0.0;
  double gamma = 0.0;
  bool head_branch = false;
  double max_branch = 0.0;  // max(sigma_m^2, tail_sq/m) = gamma^2
  double bound_main = 0.0;
  double bound_local = 0.0;
};

// Constant relating the local error bound to max(sigma_m^2, tail_sq/m)
// under the envelope subsample certificate.
inline constexpr double kLocalBoundConstant = 433.0;

inline TailStats make_tail_stats(const SpectralModel& model, Index m) {
  const Index mt = model.m_trunc();
  if (m < 1 || m > mt) throw std::invalid_argument("tail_stats: m out of range");
  TailStats ts;
  ts.m = m;
  if (m == mt) {
    if (!model.rank_exact())
      throw std::invalid_argument("tail_stats: m = M_trunc requires a rank-exact model");
    // Exact finite-rank cut: no tail, gamma degenerates to 0 and callers
    // must route to the exact-recovery path.
    ts.head_branch = true;
    return ts;
  }
  ts.sigma_m = model.sigma(m);
  ts.tail_sq = tail_sum(model, m);
  if (!(ts.tail_sq > 0.0))
    throw finite_rank_signal("tail_stats: zero tail below the truncation dimension");
  const double tail_branch = ts.tail_sq / static_cast<double>(m);
  ts.head_branch = ts.sigma_m * ts.sigma_m >= tail_branch;
  ts.max_branch = std::max(ts.sigma_m * ts.sigma_m, tail_branch);
  ts.gamma = std::sqrt(ts.max_branch);
  ts.bound_main = std::sqrt(tail_branch);
  ts.bound_local = kLocalBoundConstant * ts.max_branch;
  return ts;
}

struct Gamma {
  double value = 0.0;
  bool head_branch = false;
};

// gamma_m = max(sigma_m, sqrt(tail_sum(m)/m)). Throws finite_rank_signal
// when a rank-exact model has no tail left at m; callers should then take
// the exact finite-rank recovery path.
inline Gamma gamma_m(const SpectralModel& model, Index m) {
  const Index mt = model.m_trunc();
  if (m < 1 || m > mt) throw std::invalid_argument("gamma_m: m out of range");
  if (m == mt) {
    if (model.rank_exact()) throw finite_rank_signal("gamma_m: no tail at or beyond the model rank");
    throw std::invalid_argument("gamma_m: m = M_trunc requires a rank-exact model");
  }
  const TailStats ts = make_tail_stats(model, m);
  return Gamma{ts.gamma, ts.head_branch};
}

enum class KernelPart { full, head, tail };

// Kernel sums at a pair of grid nodes:
//   full: K(x,y)   = sum_k sigma_k^2 b_k(x) conj(b_k(y))
//   head: K_m(x,y) = sum_{k<m} b_k(x) conj(b_k(y))      (unweighted)
//   tail: R_m(x,y) = sum_{k>=m} sigma_k^2 b_k(x) conj(b_k(y))
inline Complex kernel_eval(const SpectralModel& model, Index x, Index y,
                           KernelPart part = KernelPart::full, Index m = 0) {
  const Index mt = model.m_trunc();
  if (x < 0 || x >= model.grid().size() || y < 0 || y >= model.grid().size())
    throw std::invalid_argument("kernel_eval: node out of range");
  if (part != KernelPart::full && (m < 0 || m > mt))
    throw std::invalid_argument("kernel_eval: split index out of range");
  Index k_begin = 0, k_end = mt;
  if (part == KernelPart::head) k_end = m;
  if (part == KernelPart::tail) k_begin = m;
  Complex sum(0.0, 0.0);
  for (Index k = k_end - 1; k >= k_begin; --k) {  // smallest sigma first
    const double w = (part == KernelPart::head) ? 1.0 : model.sigma(k) * model.sigma(k);
    sum += w * model.basis(x, k) * std::conj(model.basis(y, k));
  }
  return sum;
}

struct HTailNorm {
  double h_norm = 0.0;        // || f - P_m f ||_H over the spanned part
  double span_residual = 0.0;  // grid L2 mass of f outside span(b_0..b_{M-1})
};

// H norm of the projection tail of a grid function: coefficients c_k =
// <f, b_k> are taken against the grid inner product and the tail part
// k >= m is measured in H, i.e. sum |c_k/sigma_k|^2. The component of f
// outside the truncated span is reported, not included.
inline HTailNorm projection_tail_h_norm(const SpectralModel& model, const Vector& f, Index m) {
  if (f.size() != model.grid().size()) throw std::invalid_argument("tail_h_norm: grid size mismatch");
  if (m < 0 || m > model.m_trunc()) throw std::invalid_argument("tail_h_norm: m out of range");
  const Vector wf = f.cwiseProduct(model.grid().weights().cast<Complex>());
  const Vector coeff = model.basis().adjoint() * wf;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(model.m_trunc() - m));
  for (Index k = model.m_trunc() - 1; k >= m; --k) {
    const double c = std::abs(coeff(k)) / model.sigma(k);
    terms.push_back(c * c);
  }
  HTailNorm out;
  out.h_norm = std::sqrt(kahan_sum(terms));
  const Vector recon = model.basis() * coeff;
  out.span_residual = model.l2_norm(f - recon);
  return out;
}

}  // namespace samplerec
