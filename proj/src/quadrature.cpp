#include "stargraph/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace stargraph {

GaussLegendre::GaussLegendre(int order) : nodes_(order), weights_(order) {
  if (order < 1) throw ConfigError("quadrature order must be positive");
  // Newton iteration on P_n from the Tricomi initial guess.
  const int n = order;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // map [-1,1] -> [0,1]
    nodes_[i] = 0.5 * (1.0 - x);
    nodes_[n - 1 - i] = 0.5 * (1.0 + x);
    weights_[i] = 0.5 * w;
    weights_[n - 1 - i] = 0.5 * w;
  }
}

const GaussLegendre& GaussLegendre::cached(int order) {
  static std::mutex guard;
  static std::map<int, std::unique_ptr<const GaussLegendre>> rules;
  const std::lock_guard<std::mutex> lock(guard);
  auto& slot = rules[order];
  if (!slot) slot = std::make_unique<const GaussLegendre>(order);
  return *slot;
}

}  // namespace stargraph
