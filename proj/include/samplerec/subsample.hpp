#pragma once
//
// samplerec/subsample.hpp
//
// Reduction of a concentration-certified batch of n = O(m log m)
// information vectors to O(m) vectors whose rank-one sum has two-sided
// spectral bounds:
//
//   1. reduce_to_finite rotates the tail coordinates onto an orthonormal
//      basis of the tail span, giving vectors z_i in dimension p <= m+n
//      with the head block untouched.
//   2. pad_identity adds replicated artificial rank-one factors of
//      I_p - E_hat so the running sum targets the identity.
//   3. greedy_sparsify selects original indices maintaining an upper
//      barrier on lambda_max of the running sum and raising lambda_min of
//      its head block; artificial indices are never selected, which is the
//      constructive stand-in for stripping them from a partition block.
//   4. partition_oracle exhaustively validates the two-sided partition
//      statement on tiny instances.
//   5. certify recomputes certificate eigenvalues from the original batch.
//

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "samplerec/density.hpp"
#include "samplerec/errors.hpp"
#include "samplerec/linalg.hpp"

namespace samplerec {

// Envelope constants of the subsampling guarantee: |J| <= c1 m,
// lambda_min(head) >= c2 m, lambda_max <= c3 m.
inline constexpr double kEnvelopeSizeFactor = 43200.0;
inline constexpr double kEnvelopeHeadFloor = 50.0;
inline constexpr double kEnvelopeFullCap = 21600.0;

// Practical defaults on the same normalized scale.
inline constexpr double kDefaultTargetHeadFloor = 0.2;
inline constexpr double kDefaultTargetFullCap = 4.0;
inline constexpr int kDefaultBudgetFactor = 60;

struct FiniteReduction {
  Index m = 0;
  Index p = 0;        // m + rank of the tail span
  Matrix u0;          // (M_trunc - m) x (p - m), orthonormal columns spanning the tails
  Matrix z;           // p x n, z_i = U^* y_i with U = diag(I_m, u0)
  Matrix e_hat;       // p x p reduced target U^* E U
  double deviation = 0.0;        // ||(1/n) sum z z^* - e_hat||
  double max_norm_defect = 0.0;  // max_i | ||z_i|| - ||y_i|| |
  int tail_rank = 0;
  bool rank_warning = false;  // tails were numerically dependent
};

// Relative singular value tolerance for the tail span basis.
inline constexpr double kTailRankTol = 1e-10;

inline FiniteReduction reduce_to_finite(const SampleBatch& batch) {
  const Index mt = batch.info.rows();
  const Index m = batch.m;
  const Index n = batch.info.cols();
  if (n < 1) throw std::invalid_argument("reduce: empty batch");
  if (m < 1 || m > mt) throw std::invalid_argument("reduce: head dimension out of range");

  FiniteReduction red;
  red.m = m;
  const Index tail_dim = mt - m;
  OrthoResult ortho = pivoted_orthonormalize(batch.info.bottomRows(tail_dim), kTailRankTol);
  red.u0 = ortho.q;
  red.tail_rank = ortho.rank;
  red.rank_warning = ortho.rank < std::min(tail_dim, n);
  red.p = m + ortho.rank;

  red.z.resize(red.p, n);
  red.z.topRows(m) = batch.info.topRows(m);
  if (ortho.rank > 0) red.z.bottomRows(ortho.rank) = red.u0.adjoint() * batch.info.bottomRows(tail_dim);

  red.e_hat = Matrix::Zero(red.p, red.p);
  red.e_hat.topLeftCorner(m, m) = Matrix::Identity(m, m);
  if (ortho.rank > 0) {
    const Eigen::VectorXd tail_target = batch.target_diag.tail(tail_dim);
    red.e_hat.bottomRightCorner(ortho.rank, ortho.rank) =
        red.u0.adjoint() * tail_target.cast<Complex>().asDiagonal() * red.u0;
  }

  Matrix dev = (red.z * red.z.adjoint()) / static_cast<double>(n) - red.e_hat;
  red.deviation = spectral_norm_hermitian(dev);
  for (Index i = 0; i < n; ++i)
    red.max_norm_defect =
        std::max(red.max_norm_defect, std::abs(red.z.col(i).norm() - batch.info.col(i).norm()));
  return red;
}

struct PaddedSystem {
  Index m = 0;
  Index p = 0;
  Index n = 0;  // original count
  Index q = 0;  // total including artificial columns
  Matrix z_all;                    // p x q; columns [0, n) are the originals
  std::vector<bool> origin_mask;   // true for original indices
  Matrix t_vectors;                // p x (number of positive remainder eigenvalues)
  std::vector<int> replication;    // copies n_j per t vector
  double deviation_identity = 0.0;  // ||(1/n) sum_{i<=q} z z^* - I_p||
  bool premise_ok = false;          // n >= 2m held when the count bounds were checked
  bool count_upper_ok = false;      // q <= n p / m
  bool count_lower_ok = false;      // q / p >= n / (4m)
};

// Eigenvalues of I - E_hat in [-1e-12, 0) clip to zero; below -1e-10 the
// reduced target exceeds the unit-norm premise and the input is rejected.
inline constexpr double kPadSkipTol = 1e-12;
inline constexpr double kPadClipTol = 1e-10;

inline PaddedSystem pad_identity(const FiniteReduction& red, Index n, Index m) {
  if (n != red.z.cols()) throw std::invalid_argument("pad: n disagrees with the reduction");
  if (m != red.m) throw std::invalid_argument("pad: m disagrees with the reduction");
  const Index p = red.p;
  PaddedSystem sys;
  sys.m = m;
  sys.p = p;
  sys.n = n;

  // The head block of E_hat is exactly I_m, so the remainder lives in the
  // tail block alone and its factors vanish on the head coordinates by
  // construction.
  const Index r = p - m;
  std::vector<Vector> t_cols;
  std::vector<int> reps;
  if (r > 0) {
    Matrix rem = Matrix::Identity(r, r) - red.e_hat.bottomRightCorner(r, r);
    Eigen::SelfAdjointEigenSolver<Matrix> es((rem + rem.adjoint()) * 0.5);
    if (es.info() != Eigen::Success) throw std::runtime_error("pad: eigensolve failed");
    for (Index j = 0; j < r; ++j) {
      double mu = es.eigenvalues()(j);
      if (mu < -kPadClipTol)
        throw std::invalid_argument("pad: reduced target has an eigenvalue above 1 + " +
                                    std::to_string(kPadClipTol));
      if (mu <= kPadSkipTol) continue;  // zero modes and clipped negatives add nothing
      Vector t = Vector::Zero(p);
      t.tail(r) = std::sqrt(mu) * es.eigenvectors().col(j);
      t_cols.push_back(std::move(t));
      const double count = std::ceil(static_cast<double>(n) / (2.0 * static_cast<double>(m)) * mu);
      reps.push_back(std::max(1, static_cast<int>(count)));
    }
  }

  Index q = n;
  for (int c : reps) q += c;
  sys.q = q;
  sys.z_all.resize(p, q);
  sys.z_all.leftCols(n) = red.z;
  sys.origin_mask.assign(static_cast<std::size_t>(q), false);
  for (Index i = 0; i < n; ++i) sys.origin_mask[static_cast<std::size_t>(i)] = true;
  sys.t_vectors.resize(p, static_cast<Index>(t_cols.size()));
  sys.replication = reps;
  Index col = n;
  for (std::size_t j = 0; j < t_cols.size(); ++j) {
    sys.t_vectors.col(static_cast<Index>(j)) = t_cols[j];
    const double scale = std::sqrt(static_cast<double>(n) / static_cast<double>(reps[j]));
    for (int c = 0; c < reps[j]; ++c) sys.z_all.col(col++) = scale * t_cols[j];
  }

  Matrix dev = (sys.z_all * sys.z_all.adjoint()) / static_cast<double>(n) -
               Matrix::Identity(p, p);
  sys.deviation_identity = spectral_norm_hermitian(dev);

  sys.premise_ok = (n >= 2 * m);
  const double qd = static_cast<double>(q);
  sys.count_upper_ok =
      qd <= static_cast<double>(n) * static_cast<double>(p) / static_cast<double>(m) + 1e-9;
  sys.count_lower_ok = qd / static_cast<double>(p) >=
                       static_cast<double>(n) / (4.0 * static_cast<double>(m)) - 1e-9;
  if (sys.premise_ok && (!sys.count_upper_ok || !sys.count_lower_ok))
    throw std::runtime_error("pad: replication counts violated the cardinality bounds");
  return sys;
}

struct SubsampleCertificate {
  std::vector<Index> selected;  // sorted original indices (0 based) into the batch
  Index m = 0;
  Index n_source = 0;
  double head_floor = 0.0;  // lambda_min of (sum_J y y^*) restricted to the head, / m
  double full_cap = 0.0;    // lambda_max of sum_J y y^*, / m
  double tail_cap = 0.0;    // lambda_max of the tail block, / m
  int budget = 0;
  double target_head_floor = 0.0;
  double target_full_cap = 0.0;
  bool practical_ok = false;
  bool envelope_size_ok = false;
  bool envelope_head_ok = false;
  bool envelope_cap_ok = false;

  bool envelope_ok() const { return envelope_size_ok && envelope_head_ok && envelope_cap_ok; }
};

// Barrier maintenance failed within the budget; carries the best partial
// certificate reached.
struct sparsify_failure : std::runtime_error {
  sparsify_failure(SubsampleCertificate cert, const std::string& msg)
      : std::runtime_error(msg), partial(std::move(cert)) {}
  SubsampleCertificate partial;
};

namespace detail {

inline void fill_certificate_flags(SubsampleCertificate& cert) {
  const double md = static_cast<double>(cert.m);
  cert.practical_ok = static_cast<double>(cert.selected.size()) <= cert.budget &&
                      cert.head_floor >= cert.target_head_floor &&
                      cert.full_cap <= cert.target_full_cap;
  cert.envelope_size_ok = static_cast<double>(cert.selected.size()) <= kEnvelopeSizeFactor * md;
  cert.envelope_head_ok = cert.head_floor >= kEnvelopeHeadFloor;
  cert.envelope_cap_ok = cert.full_cap <= kEnvelopeFullCap;
}

}  // namespace detail

// Recomputes certificate eigenvalues from scratch: dense eigensolves of
// sum_{i in J} y_i y_i^* from the original batch columns.
inline SubsampleCertificate certify(const SampleBatch& batch, const std::vector<Index>& j_set,
                                    Index m, int budget = 0, double target_head_floor = kDefaultTargetHeadFloor,
                                    double target_full_cap = kDefaultTargetFullCap) {
  const Index mt = batch.info.rows();
  const Index n = batch.info.cols();
  if (m < 1 || m > mt) throw std::invalid_argument("certify: head dimension out of range");
  SubsampleCertificate cert;
  cert.selected = j_set;
  std::sort(cert.selected.begin(), cert.selected.end());
  for (std::size_t i = 0; i < cert.selected.size(); ++i) {
    if (cert.selected[i] < 0 || cert.selected[i] >= n)
      throw std::invalid_argument("certify: index outside the batch");
    if (i > 0 && cert.selected[i] == cert.selected[i - 1])
      throw std::invalid_argument("certify: duplicate index");
  }
  cert.m = m;
  cert.n_source = n;
  cert.budget = budget > 0 ? budget : static_cast<int>(cert.selected.size());
  cert.target_head_floor = target_head_floor;
  cert.target_full_cap = target_full_cap;

  Matrix picked(mt, static_cast<Index>(cert.selected.size()));
  for (std::size_t i = 0; i < cert.selected.size(); ++i)
    picked.col(static_cast<Index>(i)) = batch.info.col(cert.selected[i]);
  const Matrix s = picked * picked.adjoint();
  const double md = static_cast<double>(m);
  cert.head_floor = std::max(0.0, hermitian_extremes(s.topLeftCorner(m, m)).first) / md;
  cert.full_cap = std::max(0.0, hermitian_extremes(s).second) / md;
  if (mt > m)
    cert.tail_cap =
        std::max(0.0, hermitian_extremes(s.bottomRightCorner(mt - m, mt - m)).second) / md;
  detail::fill_certificate_flags(cert);
  return cert;
}

// Greedy two-barrier selection on the padded system. Only original columns
// are candidates: artificial vectors vanish on the head block, so they can
// never raise the lower barrier, and dropping them afterwards would only
// shrink the upper one. Scoring is lexicographic: the post-addition
// lambda_min of the head block first, then (while the head is still rank
// deficient or tied) the regularized head leverage of the candidate; final
// ties go to the lowest index.
inline SubsampleCertificate greedy_sparsify(const PaddedSystem& sys, Index m, int budget,
                                            double target_head_floor = kDefaultTargetHeadFloor,
                                            double target_full_cap = kDefaultTargetFullCap) {
  if (m != sys.m) throw std::invalid_argument("sparsify: m disagrees with the system");
  if (budget < 1) throw std::invalid_argument("sparsify: budget must be positive");
  const Index p = sys.p;
  const Index n = sys.n;
  const double md = static_cast<double>(m);
  const double floor_target = target_head_floor * md;
  const double cap_target = target_full_cap * md;
  const double cap_margin = 1e-9 * std::max(1.0, cap_target);

  auto make_cert = [&](const std::vector<Index>& sel) {
    SubsampleCertificate cert;
    cert.selected = sel;
    std::sort(cert.selected.begin(), cert.selected.end());
    cert.m = m;
    cert.n_source = n;
    cert.budget = budget;
    cert.target_head_floor = target_head_floor;
    cert.target_full_cap = target_full_cap;
    Matrix s = Matrix::Zero(p, p);
    for (Index i : cert.selected) s += sys.z_all.col(i) * sys.z_all.col(i).adjoint();
    cert.head_floor = std::max(0.0, hermitian_extremes(s.topLeftCorner(m, m)).first) / md;
    cert.full_cap = std::max(0.0, hermitian_extremes(s).second) / md;
    if (p > m)
      cert.tail_cap =
          std::max(0.0, hermitian_extremes(s.bottomRightCorner(p - m, p - m)).second) / md;
    detail::fill_certificate_flags(cert);
    return cert;
  };

  // No-op path: everything already admissible within budget.
  if (n <= budget) {
    std::vector<Index> all(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    SubsampleCertificate cert = make_cert(all);
    if (cert.practical_ok) return cert;
  }

  Matrix s = Matrix::Zero(p, p);
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  std::vector<Index> selected;
  selected.reserve(static_cast<std::size_t>(std::min<Index>(budget, n)));

  while (static_cast<int>(selected.size()) < budget && static_cast<Index>(selected.size()) < n) {
    Eigen::SelfAdjointEigenSolver<Matrix> es_head(s.topLeftCorner(m, m));
    if (es_head.info() != Eigen::Success) throw std::runtime_error("sparsify: eigensolve failed");
    const RealVector lam_head = es_head.eigenvalues();
    const double head_min = std::max(0.0, lam_head(0));
    if (head_min >= floor_target) break;

    Eigen::SelfAdjointEigenSolver<Matrix> es_full(s);
    if (es_full.info() != Eigen::Success) throw std::runtime_error("sparsify: eigensolve failed");
    const RealVector lam_full = es_full.eigenvalues();

    const double lev_eps = 1e-9 * std::max(1.0, s.topLeftCorner(m, m).real().trace() / md);

    Index best = -1;
    double best_min = -1.0;
    double best_lev = -1.0;
    for (Index i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      const Vector& z = sys.z_all.col(i);
      // Upper barrier admissibility on the full running sum.
      const RealVector cf = (es_full.eigenvectors().adjoint() * z).cwiseAbs2();
      const double new_max = secular_max_eigenvalue(lam_full, cf);
      if (new_max > cap_target - cap_margin) continue;
      // Lower barrier gain on the head block.
      const RealVector ch = (es_head.eigenvectors().adjoint() * z.head(m)).cwiseAbs2();
      const double new_min = secular_min_eigenvalue(lam_head, ch);
      double lev = 0.0;
      for (Index k = 0; k < m; ++k) lev += ch(k) / (std::max(0.0, lam_head(k)) + lev_eps);
      const bool better = (new_min > best_min + 1e-12) ||
                          (new_min > best_min - 1e-12 && lev > best_lev + 1e-12);
      if (better) {
        best = i;
        best_min = new_min;
        best_lev = lev;
      }
    }
    if (best < 0) break;  // no admissible candidate under the cap
    taken[static_cast<std::size_t>(best)] = 1;
    selected.push_back(best);
    s += sys.z_all.col(best) * sys.z_all.col(best).adjoint();
  }

  SubsampleCertificate cert = make_cert(selected);
  if (!cert.practical_ok)
    throw sparsify_failure(cert, "sparsify: targets not met within budget (head_floor " +
                                     std::to_string(cert.head_floor) + ", full_cap " +
                                     std::to_string(cert.full_cap) + ", selected " +
                                     std::to_string(cert.selected.size()) + ")");
  return cert;
}

struct PartitionResult {
  bool found = false;
  int parts_used = 0;
  std::vector<std::vector<Index>> parts;  // indices into z_all
  double delta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double lower = 0.0;  // 25 delta
  double upper = 0.0;  // 3600 (beta/alpha) delta
};

// Exhaustive search for a partition of all q columns into t in {1,2,3}
// parts with 25 delta I <= sum_{i in part} z z^* <= 3600 (beta/alpha) delta I
// for every part. Enumeration is over canonical assignments (part labels in
// order of first appearance), so each set partition is visited once;
// subtrees whose running part already exceeds the upper bound on a cheap
// lower estimate of lambda_max are pruned. Intended for tiny instances.
inline PartitionResult partition_oracle(const PaddedSystem& sys, double delta, double alpha,
                                        double beta, Index max_q = 14) {
  if (!(delta > 0.0)) throw std::invalid_argument("partition: delta must be positive");
  if (!(beta >= alpha)) throw std::invalid_argument("partition: beta must be >= alpha");
  if (!(alpha > 100.0 * delta))
    throw std::invalid_argument("partition: premise alpha > 100 delta violated");
  const Index q = sys.q;
  if (q > max_q)
    throw oracle_scope_exceeded("partition: q = " + std::to_string(q) +
                                " exceeds the enumeration bound " + std::to_string(max_q));
  PartitionResult res;
  res.delta = delta;
  res.alpha = alpha;
  res.beta = beta;
  res.lower = 25.0 * delta;
  res.upper = 3600.0 * (beta / alpha) * delta;

  const Index p = sys.p;
  const double slack = 1e-9 * std::max(1.0, res.upper);

  for (int t = 1; t <= 3 && !res.found; ++t) {
    std::vector<int> assign(static_cast<std::size_t>(q), -1);
    std::vector<Matrix> sums(static_cast<std::size_t>(t), Matrix::Zero(p, p));
    std::vector<double> traces(static_cast<std::size_t>(t), 0.0);
    std::vector<RealVector> diags(static_cast<std::size_t>(t), RealVector::Zero(p));

    auto leaf_check = [&]() {
      for (int s = 0; s < t; ++s) {
        const auto [lo, hi] = hermitian_extremes(sums[static_cast<std::size_t>(s)]);
        if (lo < res.lower - slack || hi > res.upper + slack) return false;
      }
      return true;
    };

    // DFS over items; a new part label may only follow all previous ones.
    auto dfs = [&](auto&& self, Index item, int used) -> bool {
      if (item == q) {
        if (used != t) return false;
        if (!leaf_check()) return false;
        res.found = true;
        res.parts_used = t;
        res.parts.assign(static_cast<std::size_t>(t), {});
        for (Index i = 0; i < q; ++i)
          res.parts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])].push_back(i);
        return true;
      }
      const int limit = std::min(used + 1, t);
      // Remaining items must still be able to populate unopened parts.
      if (t - used > static_cast<int>(q - item)) return false;
      const Vector z = sys.z_all.col(item);
      const RealVector zd = z.cwiseAbs2();
      const double zt = zd.sum();
      for (int s = 0; s < limit; ++s) {
        const std::size_t su = static_cast<std::size_t>(s);
        // lambda_max >= max diagonal entry and >= trace/p: prune early.
        double max_diag = 0.0;
        for (Index r = 0; r < p; ++r) max_diag = std::max(max_diag, diags[su](r) + zd(r));
        const double tr = traces[su] + zt;
        if (std::max(max_diag, tr / static_cast<double>(p)) > res.upper + slack) continue;
        assign[static_cast<std::size_t>(item)] = s;
        sums[su] += z * z.adjoint();
        traces[su] = tr;
        diags[su] += zd;
        if (self(self, item + 1, std::max(used, s + 1))) return true;
        sums[su] -= z * z.adjoint();
        traces[su] -= zt;
        diags[su] -= zd;
        assign[static_cast<std::size_t>(item)] = -1;
      }
      return false;
    };
    dfs(dfs, 0, 0);
  }
  return res;
}

}  // namespace samplerec
