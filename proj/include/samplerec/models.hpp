#pragma once
//
// samplerec/models.hpp
//
// Concrete model constructors: Fourier-Sobolev models on the circle,
// tensor products by sorted enumeration of the M largest singular value
// products, exact finite-rank models, and the surrogate RKHS built from
// nested approximating subspaces.
//

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "samplerec/errors.hpp"
#include "samplerec/grid.hpp"
#include "samplerec/linalg.hpp"
#include "samplerec/spectral_model.hpp"

namespace samplerec {

// Frequency ordering 0, 1, -1, 2, -2, ...
inline long fourier_frequency(Index k) {
  if (k == 0) return 0;
  return (k % 2 == 1) ? (k + 1) / 2 : -(k / 2);
}

namespace detail {

inline Matrix fourier_columns(Index grid_size, Index m_trunc) {
  Matrix basis(grid_size, m_trunc);
  const double step = 2.0 * M_PI / static_cast<double>(grid_size);
  for (Index k = 0; k < m_trunc; ++k) {
    const double f = static_cast<double>(fourier_frequency(k));
    for (Index j = 0; j < grid_size; ++j)
      basis(j, k) = std::polar(1.0, f * step * static_cast<double>(j));
  }
  return basis;
}

// Rigorous upper bound on sum_{k >= M} sigma_k^2 for the Fourier-Sobolev
// weights, by the integral comparison (the summand is decreasing).
inline double fourier_neglected_tail(double alpha, double beta_log, Index m_trunc) {
  const double m = static_cast<double>(m_trunc);
  if (alpha > 0.5) {
    const double log_factor = std::pow(std::log(m + std::exp(1.0)), -2.0 * beta_log);
    return log_factor * std::pow(m, 1.0 - 2.0 * alpha) / (2.0 * alpha - 1.0);
  }
  // alpha = 1/2, beta_log > 1/2: integral of x^{-1} log(x)^{-2 beta}.
  return std::pow(std::log(m), 1.0 - 2.0 * beta_log) / (2.0 * beta_log - 1.0);
}

}  // namespace detail

// sigma_k = (k+1)^{-alpha} (log(k+e))^{-beta_log} with complex exponentials
// ordered by frequency magnitude. grid_size >= 2 M_trunc keeps the selected
// frequencies alias-free, so grid orthonormality is exact to rounding.
inline SpectralModel fourier_sobolev(double alpha, double beta_log, Index m_trunc,
                                     Index grid_size) {
  if (!(alpha > 0.5 || (alpha == 0.5 && beta_log > 0.5)))
    throw invalid_config("fourier_sobolev: need alpha > 1/2, or alpha = 1/2 with beta_log > 1/2");
  if (!(beta_log >= 0.0))
    throw invalid_config("fourier_sobolev: beta_log < 0 breaks monotonicity of sigma");
  if (m_trunc < 1) throw invalid_config("fourier_sobolev: M_trunc must be positive");
  if (grid_size < 2 * m_trunc)
    throw invalid_config("fourier_sobolev: grid_size must be at least 2 M_trunc");
  Eigen::VectorXd sigma(m_trunc);
  for (Index k = 0; k < m_trunc; ++k)
    sigma(k) = std::pow(static_cast<double>(k + 1), -alpha) *
               std::pow(std::log(static_cast<double>(k) + std::exp(1.0)), -beta_log);
  return SpectralModel(DomainGrid::uniform01(grid_size), sigma,
                       detail::fourier_columns(grid_size, m_trunc), false,
                       detail::fourier_neglected_tail(alpha, beta_log, m_trunc), 1e-10,
                       "fourier_sobolev");
}

// Exactly finite-rank model: sigma_k = (k+1)^{-alpha} for k < rank and zero
// beyond, on the Fourier basis.
inline SpectralModel make_finite_rank(Index rank, Index grid_size, double alpha = 1.0) {
  if (rank < 1) throw invalid_config("finite_rank: rank must be positive");
  if (grid_size < 2 * rank) throw invalid_config("finite_rank: grid_size must be at least 2 rank");
  Eigen::VectorXd sigma(rank);
  for (Index k = 0; k < rank; ++k) sigma(k) = std::pow(static_cast<double>(k + 1), -alpha);
  return SpectralModel(DomainGrid::uniform01(grid_size), sigma,
                       detail::fourier_columns(grid_size, rank), true, 0.0, 1e-10, "finite_rank");
}

struct TensorSigma {
  Eigen::VectorXd sigma;                    // the M largest products, non-increasing
  std::vector<std::vector<Index>> indices;  // multi-index per entry, ties lexicographic
};

// Top-M d-fold products of a non-increasing base sequence by bounded
// max-heap enumeration: popping a multi-index pushes its d coordinate
// successors, so at most d M + 1 candidates ever live.
inline TensorSigma tensor_product_sigma(const Eigen::VectorXd& base, int d, Index m_trunc) {
  if (d < 1 || d > 3) throw invalid_config("tensor: d must be in {1,2,3}");
  if (m_trunc < 1) throw invalid_config("tensor: M_trunc must be positive");
  const Index b = base.size();
  if (b < 1) throw invalid_config("tensor: empty base sequence");
  for (Index k = 0; k < b; ++k) {
    if (!(base(k) > 0.0)) throw invalid_config("tensor: base entries must be positive");
    if (k > 0 && base(k) > base(k - 1) * (1.0 + 1e-12))
      throw invalid_config("tensor: base sequence must be non-increasing");
  }
  const double count_bound = std::pow(static_cast<double>(b), d);
  if (static_cast<double>(m_trunc) > count_bound)
    throw invalid_config("tensor: M_trunc exceeds the number of products");

  using Node = std::pair<double, std::vector<Index>>;
  auto cmp = [](const Node& x, const Node& y) {
    if (x.first != y.first) return x.first < y.first;  // larger value first
    return x.second > y.second;                        // lex smaller first
  };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> heap(cmp);
  std::set<std::vector<Index>> seen;

  auto value_of = [&](const std::vector<Index>& v) {
    double prod = 1.0;
    for (Index i : v) prod *= base(i);
    return prod;
  };

  std::vector<Index> origin(static_cast<std::size_t>(d), 0);
  heap.emplace(value_of(origin), origin);
  seen.insert(origin);

  TensorSigma out;
  out.sigma.resize(m_trunc);
  out.indices.reserve(static_cast<std::size_t>(m_trunc));
  Index filled = 0;
  while (filled < m_trunc) {
    Node top = heap.top();
    heap.pop();
    out.sigma(filled++) = top.first;
    out.indices.push_back(top.second);
    for (int a = 0; a < d; ++a) {
      std::vector<Index> child = top.second;
      if (++child[static_cast<std::size_t>(a)] >= b) continue;
      if (seen.insert(child).second) heap.emplace(value_of(child), child);
    }
  }
  return out;
}

// Tensorized model on the product grid, with per-axis complex exponentials.
// Desk scale only: the dense basis is rejected beyond 2^22 entries; use
// tensor_product_sigma alone for larger width studies.
inline SpectralModel tensor_product_model(const Eigen::VectorXd& base, int d, Index m_trunc) {
  TensorSigma ts = tensor_product_sigma(base, d, m_trunc);
  Index k_max = 0;
  for (const auto& v : ts.indices)
    for (Index i : v) k_max = std::max(k_max, i);
  const Index axis_count = k_max + 1;
  // m_trunc <= axis_count^d, so the doubled axis grid always carries the
  // basis: (2 axis_count)^d >= 2^d m_trunc.
  const Index g_eff = 2 * axis_count;
  const double entries = std::pow(static_cast<double>(g_eff), d) * static_cast<double>(m_trunc);
  if (entries > static_cast<double>(1 << 22))
    throw invalid_config("tensor: model too large to tensorize; use tensor_product_sigma");
  const Index nodes = static_cast<Index>(std::pow(static_cast<double>(g_eff), d) + 0.5);

  Matrix axis_basis = detail::fourier_columns(g_eff, axis_count);
  Matrix basis(nodes, m_trunc);
  for (Index col = 0; col < m_trunc; ++col) {
    const std::vector<Index>& v = ts.indices[static_cast<std::size_t>(col)];
    for (Index node = 0; node < nodes; ++node) {
      Index rest = node;
      Complex prod(1.0, 0.0);
      // First coordinate varies slowest in DomainGrid::uniform01.
      for (int a = d - 1; a >= 0; --a) {
        const Index j = rest % g_eff;
        rest /= g_eff;
        prod *= axis_basis(j, v[static_cast<std::size_t>(a)]);
      }
      basis(node, col) = prod;
    }
  }
  return SpectralModel(DomainGrid::uniform01(g_eff, d), ts.sigma, basis, false, 0.0, 1e-10,
                       "tensor");
}

enum class SurrogateProfile { power, boundary };

// Surrogate RKHS from nested subspace approximants: the supplied bases
// span W_{2^0} <= W_{2^1} <= ... on the grid; concatenating the blocks in
// order and orthonormalizing sequentially yields (b_k) whose prefixes span
// the union spaces. Weights are sigma_k = max{1,k}^{-alpha} (power) or the
// boundary profile k^{-1/2} log^{-s} k clamped to its k = 3 value below
// k = 3.
inline SpectralModel surrogate_rkhs(const DomainGrid& grid, const std::vector<Matrix>& spaces,
                                    double exponent, double p = 1.0,
                                    SurrogateProfile profile = SurrogateProfile::power) {
  if (spaces.empty()) throw invalid_config("surrogate: no spaces supplied");
  if (profile == SurrogateProfile::power) {
    if (!(p > 0.0 && p < 2.0)) throw invalid_config("surrogate: need p in (0,2)");
    if (!(exponent > 0.5 && exponent < 1.0 / p))
      throw invalid_config("surrogate: need alpha in (1/2, 1/p)");
  } else {
    if (!(exponent > 0.5)) throw invalid_config("surrogate: boundary profile needs s > 1/2");
  }

  Index total = 0;
  for (std::size_t l = 0; l < spaces.size(); ++l) {
    const Matrix& w = spaces[l];
    if (w.rows() != grid.size()) throw invalid_config("surrogate: space/grid size mismatch");
    if (w.cols() < 1) throw invalid_config("surrogate: empty space");
    if (l > 0 && w.cols() < spaces[l - 1].cols())
      throw invalid_config("surrogate: space dimensions must be non-decreasing");
    total = std::max(total, w.cols());
  }

  // Weighted coordinates so that plain Gram-Schmidt is Gram-Schmidt in the
  // grid inner product: v -> sqrt(w) v columnwise.
  const Eigen::VectorXd root_w = grid.weights().cwiseSqrt();
  Index concat_cols = 0;
  for (const Matrix& w : spaces) concat_cols += w.cols();
  Matrix stacked(grid.size(), concat_cols);
  Index at = 0;
  for (const Matrix& w : spaces) {
    stacked.middleCols(at, w.cols()) = root_w.cast<Complex>().asDiagonal() * w;
    at += w.cols();
  }

  OrthoResult ortho = sequential_orthonormalize(stacked, 1e-10);
  if (ortho.rank < total)
    throw invalid_config("surrogate: input spaces are rank deficient or non-nested (rank " +
                         std::to_string(ortho.rank) + " of " + std::to_string(total) + ")");
  // Nestedness check: the first dim(W_l) surviving directions must span
  // W_l, which holds iff every block's columns are reproduced by the
  // prefix of the orthonormal system built so far.
  {
    Index prefix = 0;
    Index col_at = 0;
    for (const Matrix& w : spaces) {
      prefix = std::max(prefix, w.cols());
      const Matrix block = stacked.middleCols(col_at, w.cols());
      const Matrix q = ortho.q.leftCols(prefix);
      const double defect = (block - q * (q.adjoint() * block)).cwiseAbs().maxCoeff();
      if (defect > 1e-8)
        throw invalid_config("surrogate: spaces are not nested (projection defect " +
                             std::to_string(defect) + ")");
      col_at += w.cols();
    }
  }

  const Index k_count = ortho.rank;
  if (grid.size() < k_count) throw invalid_config("surrogate: grid too small for the union space");
  Matrix basis(grid.size(), k_count);
  for (Index k = 0; k < k_count; ++k)
    basis.col(k) = ortho.q.col(k).cwiseQuotient(root_w.cast<Complex>());

  Eigen::VectorXd sigma(k_count);
  for (Index k = 0; k < k_count; ++k) {
    if (profile == SurrogateProfile::power) {
      sigma(k) = std::pow(std::max(1.0, static_cast<double>(k)), -exponent);
    } else {
      const double kk = std::max(3.0, static_cast<double>(k));
      sigma(k) = std::pow(kk, -0.5) * std::pow(std::log(kk), -exponent);
    }
  }
  return SpectralModel(grid, sigma, basis, false, 0.0, 1e-8,
                       profile == SurrogateProfile::power ? "surrogate" : "surrogate_boundary");
}

// Nested piecewise-constant spaces on dyadic cells of [0,1): W_{2^l} has
// the normalized indicators of the 2^l cells, l = 0..levels.
inline std::pair<DomainGrid, std::vector<Matrix>> dyadic_pw_constant_spaces(int levels) {
  if (levels < 0 || levels > 12) throw invalid_config("dyadic spaces: levels out of range");
  const Index g = Index(1) << levels;
  DomainGrid grid = DomainGrid::uniform01(g);
  std::vector<Matrix> spaces;
  spaces.reserve(static_cast<std::size_t>(levels) + 1);
  for (int l = 0; l <= levels; ++l) {
    const Index cells = Index(1) << l;
    const Index span = g / cells;
    Matrix w = Matrix::Zero(g, cells);
    const double height = std::sqrt(static_cast<double>(cells));
    for (Index c = 0; c < cells; ++c)
      for (Index j = 0; j < span; ++j) w(c * span + j, c) = height;
    spaces.push_back(std::move(w));
  }
  return {std::move(grid), std::move(spaces)};
}

}  // namespace samplerec
