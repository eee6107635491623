#pragma once
//
// samplerec/haar.hpp
//
// Adversarial piecewise-constant functions on dyadic intervals of [0,1)
// that vanish at a given point set. Two variants:
//
//   power:  per-level budget (l+1)^{-2 beta},          f = h - f_L
//   loglog: per-level budget (l+1)^{-2} log(l+e)^{-2}, f = 1 - f_L / h
//
// with f_L supported on the dyadic cells containing points and h the
// common value of the raw level sum at any input point. All quantities
// (point values, L2 norm, integral) are computed from the dyadic structure
// without quadrature. Points are 53-bit dyadic rationals num/2^53: a cell
// index at level l <= 53 is num >> (53-l), and for l > 53 a cell contains
// a point iff the evaluation point equals it, so levels of any depth cost
// nothing. Point values vanish bit-exactly because h and the evaluation
// sum accumulate the same doubles in the same order.
//

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "samplerec/errors.hpp"
#include "samplerec/linalg.hpp"

namespace samplerec {

struct HaarClassSpec {
  double beta = 2.0;       // power-variant exponent, > 1
  bool loglog = false;     // select the loglog variant
  int l_max = 40;          // finest level of the power variant
  int max_level = 100000;  // level cap of the loglog variant's h search
  double eps = 0.1;        // loglog integral slack
};

struct HaarLevel {
  int ell = 0;
  double a = 0.0;  // raw coefficient |J_l|^{-1/2} w_l
  Index count = 0;
  std::vector<std::uint64_t> cells;  // sorted; empty for ell > 53
};

inline constexpr double kDyadicScale = 9007199254740992.0;  // 2^53

inline std::uint64_t to_dyadic53(double x) {
  if (!(x >= 0.0 && x < 1.0)) throw std::invalid_argument("haar: point outside [0,1)");
  const double scaled = x * kDyadicScale;
  const double integral = std::floor(scaled);
  if (scaled != integral)
    throw std::invalid_argument("haar: point is not a 53-bit dyadic rational");
  return static_cast<std::uint64_t>(integral);
}

struct HaarAdversary {
  HaarClassSpec spec;
  Index n_points = 0;                     // input count, duplicates included
  std::vector<std::uint64_t> point_nums;  // sorted distinct numerators
  int level_lo = 0;
  int level_hi = 0;
  std::vector<HaarLevel> levels;
  double h = 0.0;              // raw level sum at any input point
  double integral_f_l = 0.0;   // integral of the raw f_L
  double norm_f_l_sq = 0.0;    // squared L2 norm of the raw f_L
  double l2_norm = 0.0;        // || f ||_2
  double integral_f = 0.0;
  double lower_bound = 0.0;    // h - |int f_L| resp. 1 - |int f_L|/h

  // f(x) for a 53-bit dyadic x. The raw level sum runs over ascending
  // levels, matching the order that produced h.
  double eval(double x) const {
    const std::uint64_t num = to_dyadic53(x);
    double raw = 0.0;
    for (const HaarLevel& lv : levels) {
      bool member;
      if (lv.ell <= 53) {
        const std::uint64_t cell = num >> (53 - lv.ell);
        member = std::binary_search(lv.cells.begin(), lv.cells.end(), cell);
      } else {
        member = std::binary_search(point_nums.begin(), point_nums.end(), num);
      }
      if (member) raw += lv.a;
    }
    if (spec.loglog) return 1.0 - raw / h;
    return h - raw;
  }
};

namespace detail {

inline double haar_level_weight(const HaarClassSpec& spec, int ell) {
  const double l1 = static_cast<double>(ell) + 1.0;
  if (spec.loglog)
    return 1.0 / (l1 * std::log(static_cast<double>(ell) + std::exp(1.0)));
  return std::pow(l1, -spec.beta);
}

inline Index haar_cells_at_level(const std::vector<std::uint64_t>& nums, int ell,
                                 std::vector<std::uint64_t>* cells) {
  if (ell > 53) {
    if (cells) cells->clear();
    return static_cast<Index>(nums.size());
  }
  Index count = 0;
  std::uint64_t prev = 0;
  if (cells) cells->clear();
  for (std::size_t i = 0; i < nums.size(); ++i) {
    const std::uint64_t cell = nums[i] >> (53 - ell);
    if (i == 0 || cell != prev) {
      ++count;
      if (cells) cells->push_back(cell);
    }
    prev = cell;
  }
  return count;
}

}  // namespace detail

inline HaarAdversary haar_adversary(const HaarClassSpec& spec, const std::vector<double>& points) {
  HaarAdversary adv;
  adv.spec = spec;
  adv.n_points = static_cast<Index>(points.size());
  if (points.empty()) throw std::invalid_argument("haar: empty point set");

  adv.point_nums.reserve(points.size());
  for (double x : points) adv.point_nums.push_back(to_dyadic53(x));
  std::sort(adv.point_nums.begin(), adv.point_nums.end());
  adv.point_nums.erase(std::unique(adv.point_nums.begin(), adv.point_nums.end()),
                       adv.point_nums.end());

  const double n = static_cast<double>(adv.n_points);
  if (!spec.loglog) {
    if (!(spec.beta > 1.0)) throw invalid_config("haar: power variant needs beta > 1");
    if (spec.l_max < 1) throw invalid_config("haar: l_max must be positive");
    if (n >= std::ldexp(1.0, spec.l_max))
      throw adversary_scope_exceeded("haar: n >= 2^l_max leaves no usable levels");
    int big_l = 0;
    while (std::ldexp(1.0, big_l) < 4.0 * n) ++big_l;  // L = ceil(log2(4n))
    adv.level_lo = big_l + 1;
    adv.level_hi = spec.l_max;
    if (adv.level_lo > adv.level_hi)
      throw adversary_scope_exceeded("haar: no active levels between L+1 = " +
                                     std::to_string(adv.level_lo) + " and l_max = " +
                                     std::to_string(adv.level_hi));
  } else {
    if (!(spec.eps > 0.0 && spec.eps < 1.0)) throw invalid_config("haar: eps must be in (0,1)");
    // Smallest L with sum_{l>L} 2^{-l/2} w_l <= eps; the series decays
    // geometrically so a fixed horizon saturates it.
    int big_l = 0;
    for (;; ++big_l) {
      double tail = 0.0;
      for (int ell = big_l + 400; ell > big_l; --ell)
        tail += std::exp2(-0.5 * ell) * detail::haar_level_weight(spec, ell);
      if (tail <= spec.eps) break;
      if (big_l > 1000) throw invalid_config("haar: eps too small to realize");
    }
    adv.level_lo = big_l + 1;
    adv.level_hi = 0;  // grown below until h >= 1
  }

  // Level data and h. The loglog variant extends the level range until the
  // raw sum reaches 1.
  double h = 0.0;
  std::vector<std::uint64_t> cells;
  const Index n_distinct = static_cast<Index>(adv.point_nums.size());
  for (int ell = adv.level_lo;; ++ell) {
    if (!spec.loglog && ell > adv.level_hi) break;
    if (spec.loglog && h >= 1.0) {
      adv.level_hi = ell - 1;
      break;
    }
    if (spec.loglog && ell > spec.max_level)
      throw adversary_scope_exceeded(
          "haar: level cap " + std::to_string(spec.max_level) +
          " reached before h >= 1; the loglog variant is feasible only for very few points (" +
          std::to_string(n_distinct) + " given)");
    HaarLevel lv;
    lv.ell = ell;
    lv.count = detail::haar_cells_at_level(adv.point_nums, ell, &cells);
    lv.cells = cells;
    lv.a = detail::haar_level_weight(spec, ell) / std::sqrt(static_cast<double>(lv.count));
    h += lv.a;
    adv.levels.push_back(std::move(lv));
  }
  adv.h = h;
  if (!spec.loglog && h > 1.0)
    throw adversary_scope_exceeded(
        "haar: constant part h > 1 violates the level-0 budget at this n and beta");

  // Exact overlap structure: selected cells at the deeper of two levels
  // nest inside selected cells of the shallower one, so
  // int S_l S_l' = |J_max| 2^{-max} and prefix sums give the norm.
  double integral = 0.0;
  double norm_sq = 0.0;
  double prefix_a = 0.0;
  for (const HaarLevel& lv : adv.levels) {
    const double mass = static_cast<double>(lv.count) * std::ldexp(1.0, -lv.ell);
    integral += lv.a * mass;
    norm_sq += lv.a * lv.a * mass + 2.0 * lv.a * mass * prefix_a;
    prefix_a += lv.a;
  }
  adv.integral_f_l = integral;
  adv.norm_f_l_sq = norm_sq;

  if (!spec.loglog) {
    adv.integral_f = h - integral;
    adv.lower_bound = h - std::abs(integral);
    adv.l2_norm = std::sqrt(std::max(0.0, h * h - 2.0 * h * integral + norm_sq));
  } else {
    adv.integral_f = 1.0 - integral / h;
    adv.lower_bound = 1.0 - std::abs(integral) / h;
    adv.l2_norm = std::sqrt(std::max(0.0, 1.0 - 2.0 * integral / h + norm_sq / (h * h)));
  }
  return adv;
}

struct HaarBudget {
  int ell = 0;
  double used_sq = 0.0;
  double budget_sq = 0.0;
  bool active = false;
};

// Per-level class budgets of the constructed function: the constant part
// occupies level 0 and every active level l carries |J_l| coefficients of
// common magnitude a_l (divided by h in the loglog variant).
inline std::vector<HaarBudget> haar_budget_check(const HaarAdversary& adv) {
  std::vector<HaarBudget> out;
  const double scale = adv.spec.loglog ? adv.h : 1.0;
  const double constant = adv.spec.loglog ? 1.0 : adv.h;
  HaarBudget zero;
  zero.ell = 0;
  const double w0 = detail::haar_level_weight(adv.spec, 0);
  zero.budget_sq = w0 * w0;
  zero.used_sq = constant * constant;
  zero.active = true;
  out.push_back(zero);
  for (const HaarLevel& lv : adv.levels) {
    HaarBudget b;
    b.ell = lv.ell;
    const double w = detail::haar_level_weight(adv.spec, lv.ell);
    b.budget_sq = w * w;
    const double c = lv.a / scale;
    b.used_sq = static_cast<double>(lv.count) * c * c;
    b.active = true;
    out.push_back(b);
  }
  return out;
}

}  // namespace samplerec
