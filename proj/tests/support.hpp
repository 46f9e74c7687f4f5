#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "stargraph/coupling.hpp"
#include "stargraph/potential.hpp"

namespace testsupport {

using namespace stargraph;

/// V*: n = 3, edges +1, -1, 0 on [0, 1].
inline StarPotential vstar() {
  return StarPotential({constant_profile(1.0), constant_profile(-1.0), constant_profile(0.0)});
}

inline StarPotential zero_potential(int n) { return StarPotential(std::vector<EdgeProfile>(n)); }

inline ScalingFunction vstar_resonant(double lambda1) {
  return ScalingFunction::resonant(lambda1, constant_A(vstar()));
}

/// Fixed-seed generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  /// Random theta with entries pairwise separated by at least `gap`.
  VectorXd distinct_theta(int n, double gap = 1e-3) {
    VectorXd t(n);
    for (;;) {
      for (int i = 0; i < n; ++i) t[i] = uniform(-2.0, 2.0);
      bool ok = true;
      for (int i = 0; i < n && ok; ++i)
        for (int j = i + 1; j < n && ok; ++j) ok = std::abs(t[i] - t[j]) >= gap;
      if (ok) return t;
    }
  }

  /// Random nonzero beta of either sign, magnitude in [0.05, 5].
  double beta() {
    const double mag = uniform(0.05, 5.0);
    return integer(0, 1) ? mag : -mag;
  }

  /// Random piecewise cubic potential on n edges with zero total mean.
  StarPotential potential(int n) {
    std::vector<EdgeProfile> edges;
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      const int pieces = integer(1, 3);
      std::vector<double> cuts{0.0};
      for (int p = 1; p < pieces; ++p) cuts.push_back(uniform(0.1, 0.9));
      std::sort(cuts.begin(), cuts.end());
      cuts.push_back(uniform(0.95, 1.0));
      std::vector<PolynomialPiece> ps;
      for (int p = 0; p < pieces; ++p) {
        VectorXd c(integer(1, 4));
        for (Eigen::Index d = 0; d < c.size(); ++d) c[d] = uniform(-1.0, 1.0);
        ps.push_back({cuts[p], cuts[p + 1], Polynomial(c)});
      }
      edges.emplace_back(std::move(ps));
      mean += edges.back().moment(0);
    }
    // cancel the mean with a constant shift on the last edge's first piece
    auto pieces = edges.back().pieces();
    const double len = pieces.front().to - pieces.front().from;
    VectorXd c = pieces.front().poly.coeffs();
    c[0] -= mean / len;
    pieces.front().poly = Polynomial(c);
    edges.back() = EdgeProfile(pieces);
    return StarPotential(std::move(edges));
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace testsupport
