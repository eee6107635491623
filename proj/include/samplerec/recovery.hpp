#pragma once
//
// samplerec/recovery.hpp
//
// Weighted least squares recovery on the head space V_m from a certified
// point set, plus the minimal-norm (spline) interpolant on the same
// points. The estimator is
//
//   A_n(f) = sum_{k<m} (G^+ N f)_k b_k,   N f = (f(x_i)/sqrt(rho_m(x_i)))_i,
//
// with G the density-weighted design matrix. The spline is the smallest
// H-norm interpolant, computed through the kernel Gram matrix.
//

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "samplerec/density.hpp"
#include "samplerec/errors.hpp"
#include "samplerec/linalg.hpp"
#include "samplerec/spectral_model.hpp"
#include "samplerec/subsample.hpp"

namespace samplerec {

inline constexpr double kPinvCutoff = 1e-12;

struct RecoveryPlan {
  Index m = 0;
  std::vector<Index> points;    // grid node indices, one per selected sample
  Eigen::VectorXd rho_vals;     // rho_m at the points
  Matrix g;                     // n x m, entries rho^{-1/2} b_k(x_i)
  Matrix phi;                   // n x (M_trunc - m), entries rho^{-1/2} sigma_k b_k(x_i)
  Matrix g_pinv;                // m x n Moore-Penrose inverse
  int g_rank = 0;
  double g_pinv_norm = 0.0;     // ||G^+|| = 1/s_min(G)
  double g_pinv_bound = 0.0;    // (head_floor * m)^{-1/2}
  double phi_norm = 0.0;        // ||Phi||
  double phi_norm_bound = 0.0;  // sqrt(full_cap * m) * gamma
  double gamma = 0.0;           // gamma_m of the model (0 on the exact finite-rank cut)
  bool pinv_bound_ok = false;
  bool phi_bound_ok = false;
  SubsampleCertificate certificate;

  Index n() const { return static_cast<Index>(points.size()); }
};

// Core assembly from explicit nodes and density values. An empty node list
// yields the degenerate plan of the zero algorithm (A == 0); a nonempty one
// must produce a full-column-rank G.
inline RecoveryPlan plan_from_nodes(const SpectralModel& model, Index m,
                                    const std::vector<Index>& nodes,
                                    const Eigen::VectorXd& rho_vals, SubsampleCertificate cert,
                                    double gamma) {
  const Index mt = model.m_trunc();
  if (m < 1 || m > mt) throw std::invalid_argument("plan: head dimension out of range");
  const Index n = static_cast<Index>(nodes.size());
  if (rho_vals.size() != n) throw std::invalid_argument("plan: density values mismatch");

  RecoveryPlan plan;
  plan.m = m;
  plan.points = nodes;
  plan.rho_vals = rho_vals;
  plan.gamma = gamma;
  plan.certificate = std::move(cert);

  plan.g.resize(n, m);
  plan.phi.resize(n, mt - m);
  for (Index i = 0; i < n; ++i) {
    const Index node = nodes[static_cast<std::size_t>(i)];
    if (node < 0 || node >= model.grid().size())
      throw std::invalid_argument("plan: node out of range");
    const double r = rho_vals(i);
    if (!(r > 0.0) || !std::isfinite(r)) throw degenerate_density("plan: nonpositive density value");
    const double s = 1.0 / std::sqrt(r);
    for (Index k = 0; k < m; ++k) plan.g(i, k) = s * model.basis(node, k);
    for (Index k = m; k < mt; ++k) plan.phi(i, k - m) = s * model.sigma(k) * model.basis(node, k);
  }

  const double md = static_cast<double>(m);
  plan.g_pinv_bound = plan.certificate.head_floor > 0.0
                          ? 1.0 / std::sqrt(plan.certificate.head_floor * md)
                          : 0.0;
  plan.phi_norm_bound = std::sqrt(std::max(0.0, plan.certificate.full_cap * md)) * gamma;

  if (n == 0) {
    plan.g_pinv = Matrix::Zero(m, 0);
    return plan;
  }

  SvdPinv gp = svd_pinv(plan.g, kPinvCutoff);
  if (gp.rank < m)
    throw plan_failure("plan: G is rank deficient (rank " + std::to_string(gp.rank) + " of " +
                       std::to_string(m) + "), certificate/assembly mismatch");
  plan.g_pinv = std::move(gp.pinv);
  plan.g_rank = gp.rank;
  plan.g_pinv_norm = 1.0 / gp.smin;
  if (plan.phi.cols() > 0) plan.phi_norm = top_singular_value(plan.phi);

  plan.pinv_bound_ok =
      plan.g_pinv_bound == 0.0 || plan.g_pinv_norm <= plan.g_pinv_bound + 1e-10;
  plan.phi_bound_ok =
      plan.phi_norm_bound == 0.0 || plan.phi_norm <= plan.phi_norm_bound + 1e-10;
  if (plan.certificate.head_floor > 0.0 && plan.g_pinv_norm > plan.g_pinv_bound * (1.0 + 1e-6))
    throw plan_failure("plan: ||G^+|| exceeds the certificate bound, assembly mismatch");
  return plan;
}

// Restricts a concentration-certified batch to the subsampled indices and
// assembles the plan from the model itself.
inline RecoveryPlan build_plan(const SpectralModel& model, const SampleBatch& batch,
                               const SubsampleCertificate& cert) {
  if (cert.m != batch.m) throw std::invalid_argument("plan: certificate/batch head mismatch");
  if (!(cert.head_floor > 0.0)) throw plan_failure("plan: certificate head floor is zero");
  std::vector<Index> nodes;
  Eigen::VectorXd rho(static_cast<Index>(cert.selected.size()));
  nodes.reserve(cert.selected.size());
  for (std::size_t i = 0; i < cert.selected.size(); ++i) {
    const Index j = cert.selected[i];
    if (j < 0 || j >= batch.n()) throw std::invalid_argument("plan: certificate index out of range");
    nodes.push_back(batch.points[static_cast<std::size_t>(j)]);
    rho(static_cast<Index>(i)) = batch.density_vals(j);
  }
  return plan_from_nodes(model, batch.m, nodes, rho, cert, batch.gamma);
}

// Plan for an arbitrary node list: density values are evaluated from the
// model and the certificate eigenvalues are computed directly from G and
// Phi, so downstream bounds remain literal.
inline RecoveryPlan make_plan_for_points(const SpectralModel& model, Index m,
                                         const std::vector<Index>& nodes) {
  const Index mt = model.m_trunc();
  if (m < 1 || m > mt) throw std::invalid_argument("plan: head dimension out of range");
  const Eigen::VectorXd rho_all = density_all(model, m);
  const Index n = static_cast<Index>(nodes.size());
  Eigen::VectorXd rho(n);
  for (Index i = 0; i < n; ++i) {
    const Index node = nodes[static_cast<std::size_t>(i)];
    if (node < 0 || node >= model.grid().size())
      throw std::invalid_argument("plan: node out of range");
    rho(i) = rho_all(node);
  }
  double gamma = 0.0;
  if (m < mt) gamma = gamma_m(model, m).value;

  SubsampleCertificate cert;
  cert.m = m;
  cert.n_source = n;
  cert.budget = static_cast<int>(n);
  if (n > 0) {
    // Same Gram blocks the certify() route produces, assembled from the
    // plan matrices: head block = conj(G^* G), tail block = conj(Phi^* Phi)/gamma^2.
    Matrix g(n, m);
    Matrix phi(n, mt - m);
    for (Index i = 0; i < n; ++i) {
      const Index node = nodes[static_cast<std::size_t>(i)];
      const double s = 1.0 / std::sqrt(rho(i));
      for (Index k = 0; k < m; ++k) g(i, k) = s * model.basis(node, k);
      for (Index k = m; k < mt; ++k) phi(i, k - m) = s * model.sigma(k) * model.basis(node, k);
    }
    const double md = static_cast<double>(m);
    const Matrix gram_g = g.adjoint() * g;
    cert.head_floor = std::max(0.0, hermitian_extremes(gram_g).first) / md;
    double tail_top = 0.0;
    if (mt > m && gamma > 0.0) {
      const Matrix gram_phi = phi.adjoint() * phi;
      tail_top = std::max(0.0, hermitian_extremes(gram_phi).second) / (gamma * gamma);
      cert.tail_cap = tail_top / md;
    }
    // Full cap from the combined information Gram (head + tail/gamma^2).
    Matrix y(mt, n);
    y.topRows(m) = g.transpose();
    if (mt > m)
      y.bottomRows(mt - m) = (gamma > 0.0 ? (1.0 / gamma) : 0.0) * phi.transpose();
    cert.full_cap = std::max(0.0, hermitian_extremes(Matrix(y * y.adjoint())).second) / md;
    cert.selected.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) cert.selected[static_cast<std::size_t>(i)] = i;
    detail::fill_certificate_flags(cert);
  }
  return plan_from_nodes(model, m, nodes, rho, cert, gamma);
}

// A_n(f) as head coefficients: g_hat = G^+ (f(x_i)/sqrt(rho_m(x_i)))_i.
inline Vector recover(const RecoveryPlan& plan, const Vector& samples) {
  if (samples.size() != plan.n()) throw std::invalid_argument("recover: sample count mismatch");
  Vector weighted(plan.n());
  for (Index i = 0; i < plan.n(); ++i) weighted(i) = samples(i) / std::sqrt(plan.rho_vals(i));
  return plan.g_pinv * weighted;
}

// Samples a grid function at the plan's nodes.
inline Vector sample_at(const RecoveryPlan& plan, const Vector& f) {
  Vector s(plan.n());
  for (Index i = 0; i < plan.n(); ++i) s(i) = f(plan.points[static_cast<std::size_t>(i)]);
  return s;
}

// Grid values of the recovered head-space function.
inline Vector head_function(const SpectralModel& model, const Vector& coeffs) {
  if (coeffs.size() > model.m_trunc()) throw std::invalid_argument("head_function: too many coefficients");
  return model.basis().leftCols(coeffs.size()) * coeffs;
}

struct SplineResult {
  Vector h_coeffs;       // a with S = sum_k a_k sigma_k b_k
  Vector values;         // S on the grid
  double h_norm = 0.0;   // ||S||_H = ||a||_2
  double residue = 0.0;  // max_i |S(x_i) - f(x_i)|
  int gram_rank = 0;
  double gram_cutoff = 0.0;
};

// Minimal norm interpolant: a = W^dagger (W W^dagger)^+ s with
// W_{ik} = sigma_k b_k(x_i); the Gram W W^dagger is the kernel matrix
// K(x_i, x_j). A singular Gram is handled by the pseudo-inverse and shows
// up as gram_rank < n together with a nonzero residue.
inline SplineResult spline_interpolant(const SpectralModel& model, const std::vector<Index>& points,
                                       const Vector& samples) {
  const Index mt = model.m_trunc();
  const Index n = static_cast<Index>(points.size());
  if (samples.size() != n) throw std::invalid_argument("spline: sample count mismatch");
  SplineResult out;
  if (n == 0) {
    out.h_coeffs = Vector::Zero(mt);
    out.values = Vector::Zero(model.grid().size());
    return out;
  }
  Matrix w(n, mt);
  for (Index i = 0; i < n; ++i) {
    const Index node = points[static_cast<std::size_t>(i)];
    if (node < 0 || node >= model.grid().size())
      throw std::invalid_argument("spline: node out of range");
    for (Index k = 0; k < mt; ++k) w(i, k) = model.sigma(k) * model.basis(node, k);
  }
  const Matrix gram = w * w.adjoint();
  HermitianPinv hp = hermitian_psd_pinv(gram, kPinvCutoff);
  out.gram_rank = hp.rank;
  out.gram_cutoff = hp.cutoff;
  out.h_coeffs = w.adjoint() * (hp.pinv * samples);
  out.h_norm = out.h_coeffs.norm();
  const Vector at_points = w * out.h_coeffs;
  out.residue = (at_points - samples).cwiseAbs().maxCoeff();
  out.values = model.basis() * out.h_coeffs.cwiseProduct(model.sigma().cast<Complex>());
  return out;
}

}  // namespace samplerec
