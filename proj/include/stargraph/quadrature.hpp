#pragma once

#include <cmath>
#include <type_traits>
#include <utility>

#include "stargraph/common.hpp"

namespace stargraph {

/// Gauss-Legendre rule mapped to the reference interval [0, 1].
class GaussLegendre {
 public:
  explicit GaussLegendre(int order = 32);

  /// Shared immutable rule of the given order, built once per process.
  static const GaussLegendre& cached(int order);

  int order() const noexcept { return static_cast<int>(nodes_.size()); }
  const VectorXd& nodes() const noexcept { return nodes_; }
  const VectorXd& weights() const noexcept { return weights_; }

  /// \int_a^b f(x) dx. The result type follows f.
  template <typename F>
  auto integrate(F&& f, double a, double b) const {
    using R = std::decay_t<decltype(f(a))>;
    R sum{0};
    const double len = b - a;
    for (Eigen::Index q = 0; q < nodes_.size(); ++q)
      sum += weights_[q] * f(a + len * nodes_[q]);
    return sum * len;
  }

 private:
  VectorXd nodes_;
  VectorXd weights_;
};

/// Runs `compute(rule)` at order q and 2q and throws QuadratureNotConverged when the two
/// disagree by more than `rel_tol` relative to max(|value|, abs_floor).
template <typename Compute>
auto with_order_doubling(const GaussLegendre& rule, Compute&& compute,
                         const char* what, double rel_tol = tol::quadrature,
                         double abs_floor = 0.0) {
  auto coarse = compute(rule);
  const GaussLegendre& fine = GaussLegendre::cached(2 * rule.order());
  auto refined = compute(fine);
  using std::abs;
  const double scale = std::max(static_cast<double>(abs(refined)), abs_floor);
  const double diff = static_cast<double>(abs(refined - coarse));
  if (diff > rel_tol * scale && diff > 0.0) {
    throw QuadratureNotConverged(std::string(what) + ": order " +
                                 std::to_string(rule.order()) + " vs " +
                                 std::to_string(fine.order()) + " differ by " +
                                 std::to_string(diff));
  }
  return refined;
}

}  // namespace stargraph
