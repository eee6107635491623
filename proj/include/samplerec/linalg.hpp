#pragma once
//
// samplerec/linalg.hpp
//
// Dense Hermitian helpers shared by the pipeline stages: compensated sums,
// spectral norms, pseudo-inverses, rank-revealing orthonormalization, rank
// one eigenvalue updates, and a power iteration bracket used by tests as an
// independent cross check.
//

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "samplerec/rng.hpp"

namespace samplerec {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Kahan compensated summation over a prepared term list.
inline double kahan_sum(const std::vector<double>& terms) {
  double s = 0.0, c = 0.0;
  for (double x : terms) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

// Eigenvalues of the Hermitian part of a, ascending.
inline RealVector hermitian_eigenvalues(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("hermitian_eigenvalues: square matrix required");
  if (a.rows() == 0) return RealVector(0);
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.compute((a + a.adjoint()) * 0.5, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("hermitian eigensolve failed");
  return es.eigenvalues();
}

// Smallest and largest eigenvalue of the Hermitian part of a.
inline std::pair<double, double> hermitian_extremes(const Matrix& a) {
  const RealVector ev = hermitian_eigenvalues(a);
  if (ev.size() == 0) return {0.0, 0.0};
  return {ev(0), ev(ev.size() - 1)};
}

inline double spectral_norm_hermitian(const Matrix& a) {
  const auto [lo, hi] = hermitian_extremes(a);
  return std::max(std::abs(lo), std::abs(hi));
}

// Largest singular value through the Gram matrix of the smaller side.
inline double top_singular_value(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  const Matrix gram = (a.rows() <= a.cols()) ? Matrix(a * a.adjoint()) : Matrix(a.adjoint() * a);
  return std::sqrt(std::max(0.0, hermitian_extremes(gram).second));
}

struct HermitianPinv {
  Matrix pinv;
  int rank = 0;
  double cutoff = 0.0;  // absolute eigenvalue cutoff that was applied
};

// Moore-Penrose inverse of a Hermitian PSD matrix, dropping eigenvalues
// below rel_cutoff times the largest.
inline HermitianPinv hermitian_psd_pinv(const Matrix& a, double rel_cutoff) {
  HermitianPinv out;
  if (a.rows() == 0) {
    out.pinv = a;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es((a + a.adjoint()) * 0.5);
  if (es.info() != Eigen::Success) throw std::runtime_error("hermitian eigensolve failed");
  const RealVector& ev = es.eigenvalues();
  const double lmax = std::max(0.0, ev(ev.size() - 1));
  out.cutoff = rel_cutoff * lmax;
  RealVector inv = RealVector::Zero(ev.size());
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > out.cutoff && ev(i) > 0.0) {
      inv(i) = 1.0 / ev(i);
      ++out.rank;
    }
  }
  out.pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
  return out;
}

struct SvdPinv {
  Matrix pinv;
  int rank = 0;
  double smin = 0.0;  // smallest retained singular value
  double smax = 0.0;
};

// Moore-Penrose inverse via thin SVD with a relative singular value cutoff.
inline SvdPinv svd_pinv(const Matrix& a, double rel_cutoff) {
  SvdPinv out;
  if (a.rows() == 0 || a.cols() == 0) {
    out.pinv = Matrix::Zero(a.cols(), a.rows());
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  out.smax = sv(0);
  const double cut = rel_cutoff * out.smax;
  RealVector inv = RealVector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) {
      inv(i) = 1.0 / sv(i);
      out.smin = sv(i);
      ++out.rank;
    }
  }
  out.pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
  return out;
}

struct OrthoResult {
  Matrix q;          // orthonormal columns
  int rank = 0;
  double drop_tol = 0.0;  // absolute residual norm below which columns were dropped
};

// Rank-revealing orthonormalization by column-pivoted modified Gram-Schmidt
// with one re-orthogonalization pass. Columns whose residual falls below
// rel_tol times the largest initial column norm are treated as dependent.
// Pivot ties resolve to the lowest column index.
inline OrthoResult pivoted_orthonormalize(Matrix a, double rel_tol) {
  OrthoResult out;
  const Index rows = a.rows();
  const Index cols = a.cols();
  if (rows == 0 || cols == 0) {
    out.q = Matrix(rows, 0);
    return out;
  }
  double scale = 0.0;
  for (Index c = 0; c < cols; ++c) scale = std::max(scale, a.col(c).norm());
  out.drop_tol = rel_tol * scale;
  if (scale == 0.0) {
    out.q = Matrix(rows, 0);
    return out;
  }
  const Index max_rank = std::min(rows, cols);
  Matrix q(rows, max_rank);
  std::vector<char> used(static_cast<std::size_t>(cols), 0);
  Index r = 0;
  while (r < max_rank) {
    Index piv = -1;
    double best = out.drop_tol;
    for (Index c = 0; c < cols; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      const double nc = a.col(c).norm();
      if (nc > best) {
        best = nc;
        piv = c;
      }
    }
    if (piv < 0) break;
    Vector v = a.col(piv) / best;
    if (r > 0) {
      v -= q.leftCols(r) * (q.leftCols(r).adjoint() * v);
      const double nv = v.norm();
      if (nv <= rel_tol) {  // dependent after projection
        used[static_cast<std::size_t>(piv)] = 1;
        a.col(piv).setZero();
        continue;
      }
      v /= nv;
    }
    q.col(r) = v;
    ++r;
    used[static_cast<std::size_t>(piv)] = 1;
    for (Index c = 0; c < cols; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      a.col(c) -= v * v.dot(a.col(c));
    }
  }
  out.q = q.leftCols(r);
  out.rank = static_cast<int>(r);
  return out;
}

// In-order Gram-Schmidt without pivoting: columns are processed exactly in
// the given order and dependent columns are skipped. Keeps prefix spans of
// the input intact, which rank pivoting would not.
inline OrthoResult sequential_orthonormalize(const Matrix& a, double rel_tol) {
  OrthoResult out;
  const Index rows = a.rows();
  const Index cols = a.cols();
  out.q = Matrix(rows, std::min(rows, cols));
  Index r = 0;
  for (Index c = 0; c < cols && r < out.q.cols(); ++c) {
    const double n0 = a.col(c).norm();
    if (n0 <= 0.0) continue;
    Vector v = a.col(c);
    for (int pass = 0; pass < 2; ++pass) {
      if (r > 0) v -= out.q.leftCols(r) * (out.q.leftCols(r).adjoint() * v);
    }
    const double nv = v.norm();
    if (nv <= rel_tol * n0) continue;
    out.q.col(r) = v / nv;
    ++r;
  }
  out.q.conservativeResize(rows, r);
  out.rank = static_cast<int>(r);
  out.drop_tol = rel_tol;
  return out;
}

// Largest eigenvalue of diag(lam) + c c^* given lam ascending and the
// squared moduli c2 of the update in that eigenbasis. Bisection on the
// secular equation f(t) = 1 - sum c2_k / (t - lam_k), increasing on
// (lam_max, lam_max + sum c2].
inline double secular_max_eigenvalue(const RealVector& lam, const RealVector& c2) {
  const Index n = lam.size();
  if (n == 0) return 0.0;
  const double lmax = lam(n - 1);
  const double rho = c2.sum();
  if (rho <= 0.0) return lmax;
  double lo = lmax;
  double hi = lmax + rho;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lmax) break;
    double f = 1.0;
    for (Index k = 0; k < n; ++k) f -= c2(k) / (mid - lam(k));
    if (f >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Smallest eigenvalue of diag(lam) + c c^*, lam ascending. The minimum can
// only move within [lam_0, lam_1]; used as a greedy score, not a
// certificate, so gap degeneracies may round down to lam_0.
inline double secular_min_eigenvalue(const RealVector& lam, const RealVector& c2) {
  const Index n = lam.size();
  if (n == 0) return 0.0;
  const double l1 = lam(0);
  if (n == 1) return l1 + c2(0);
  const double l2 = lam(1);
  const double span = l2 - l1;
  if (span <= 1e-14 * std::max(1.0, std::abs(l2))) return l1;
  if (c2(0) <= 0.0) return l1;
  double lo = l1;
  double hi = l2;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= l1 || mid >= l2) break;
    double f = 1.0;
    for (Index k = 0; k < n; ++k) f += c2(k) / (lam(k) - mid);
    if (f < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct PowerBracket {
  double rayleigh = 0.0;  // converged Rayleigh quotient, the estimate
  double residual = 0.0;  // ||A x - rayleigh x||; [rayleigh, rayleigh+residual] contains an eigenvalue
  int iterations = 0;
  bool converged = false;
};

// Power iteration on a Hermitian PSD matrix with a deterministic seeded
// start. The Rayleigh quotient converges to the top eigenvalue for generic
// starts; the residual gives the attained bracket width.
inline PowerBracket power_max_eigenvalue(const Matrix& a, std::uint64_t seed, double tol = 1e-13,
                                         int max_iter = 20000) {
  PowerBracket out;
  const Index n = a.rows();
  if (n == 0) {
    out.converged = true;
    return out;
  }
  SeededRng rng(splitmix64(seed));
  Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = Complex(rng.uniform01() - 0.5, rng.uniform01() - 0.5);
  x.normalize();
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Vector ax = a * x;
    const double ray = ax.dot(x).real();  // x^* A x for unit x
    const double res = (ax - ray * x).norm();
    out.rayleigh = ray;
    out.residual = res;
    out.iterations = it;
    if (res <= tol * std::max(1.0, std::abs(ray)) && std::abs(ray - prev) <= tol * std::max(1.0, std::abs(ray))) {
      out.converged = true;
      return out;
    }
    prev = ray;
    const double nn = ax.norm();
    if (nn == 0.0) {  // x in the kernel; the top eigenvalue of a PSD matrix is 0 only if a = 0
      out.converged = true;
      out.rayleigh = 0.0;
      out.residual = 0.0;
      return out;
    }
    x = ax / nn;
  }
  return out;
}

}  // namespace samplerec
