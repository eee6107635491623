#pragma once
//
// samplerec/grid.hpp
//
// Discrete evaluation domain. Basis functions, densities and recovered
// functions all live on a fixed finite node set with quadrature weights;
// the weights define every L2 inner product in the library.
//

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace samplerec {

class DomainGrid {
 public:
  // coords: one row per node, one column per coordinate dimension.
  // weights: nonnegative quadrature mass per node.
  DomainGrid(Eigen::MatrixXd coords, Eigen::VectorXd weights)
      : coords_(std::move(coords)), weights_(std::move(weights)) {
    if (coords_.rows() != weights_.size())
      throw std::invalid_argument("grid: node and weight counts differ");
    if (coords_.rows() == 0) throw std::invalid_argument("grid: empty");
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
      if (!(weights_(i) >= 0.0) || !std::isfinite(weights_(i)))
        throw std::invalid_argument("grid: negative or non-finite weight");
    }
  }

  Eigen::Index size() const { return weights_.size(); }
  Eigen::Index dim() const { return coords_.cols(); }
  const Eigen::MatrixXd& coords() const { return coords_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double weight(Eigen::Index i) const { return weights_(i); }
  double total_mass() const { return weights_.sum(); }

  // Uniform grid of g^d nodes on [0,1)^d, left endpoints, weight g^{-d}
  // each. For d > 1 the first coordinate varies slowest.
  static DomainGrid uniform01(Eigen::Index g, int d = 1) {
    if (g < 1 || d < 1) throw std::invalid_argument("grid: need g >= 1, d >= 1");
    Eigen::Index total = 1;
    for (int j = 0; j < d; ++j) {
      if (total > (1 << 24) / g) throw std::invalid_argument("grid: node count too large");
      total *= g;
    }
    Eigen::MatrixXd coords(total, d);
    for (Eigen::Index i = 0; i < total; ++i) {
      Eigen::Index rest = i;
      for (int j = d - 1; j >= 0; --j) {
        coords(i, j) = static_cast<double>(rest % g) / static_cast<double>(g);
        rest /= g;
      }
    }
    const double w = 1.0 / static_cast<double>(total);
    return DomainGrid(std::move(coords), Eigen::VectorXd::Constant(total, w));
  }

 private:
  Eigen::MatrixXd coords_;
  Eigen::VectorXd weights_;
};

}  // namespace samplerec
