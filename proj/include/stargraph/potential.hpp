#pragma once

#include <vector>

#include "stargraph/common.hpp"

namespace stargraph {

/// Position on the star graph: edge index (0-based) and arc length from the vertex.
struct EdgeCoordinate {
  int edge = 0;
  double x = 0.0;
};

/// Polynomial sum_d c[d] x^d in the global edge coordinate.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(VectorXd coeffs) : c_(std::move(coeffs)) {}

  const VectorXd& coeffs() const noexcept { return c_; }
  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }

  double operator()(double x) const noexcept {
    double acc = 0.0;
    for (Eigen::Index d = c_.size() - 1; d >= 0; --d) acc = acc * x + c_[d];
    return acc;
  }

  Polynomial antiderivative() const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator*(double s) const { return Polynomial(c_ * s); }
  /// x -> x * p(x)
  Polynomial shifted_up() const;

  /// Exact \int_a^b p(x) dx.
  double integral(double a, double b) const;

 private:
  VectorXd c_;
};

/// One polynomial piece of an edge profile, supported on [from, to).
struct PolynomialPiece {
  double from = 0.0;
  double to = 0.0;
  Polynomial poly;
};

/// Piecewise polynomial profile of one edge; zero outside its pieces.
class EdgeProfile {
 public:
  EdgeProfile() = default;
  explicit EdgeProfile(std::vector<PolynomialPiece> pieces);

  const std::vector<PolynomialPiece>& pieces() const noexcept { return pieces_; }
  bool empty() const noexcept { return pieces_.empty(); }

  /// Value at x; at a breakpoint returns the mean of the one-sided limits.
  double operator()(double x) const noexcept;

  /// \int x^power V(x) dx over the support, in closed form.
  double moment(int power) const;

  /// Breakpoints of the profile, sorted and deduplicated.
  std::vector<double> breakpoints() const;

 private:
  std::vector<PolynomialPiece> pieces_;
};

/// Potential profile on the n edges of the star graph. Support lies in [0, 1]
/// once validate_potential has accepted it.
class StarPotential {
 public:
  explicit StarPotential(std::vector<EdgeProfile> profiles);

  int edges() const noexcept { return static_cast<int>(profiles_.size()); }
  const EdgeProfile& profile(int edge) const { return profiles_.at(edge); }
  const std::vector<EdgeProfile>& profiles() const noexcept { return profiles_; }

  double operator()(int edge, double x) const { return profiles_.at(edge)(x); }

  /// sum_i \int V_i, closed form.
  double total_mean() const;

  /// Union of the breakpoints of all edges, always including 0 and 1.
  std::vector<double> breakpoints() const;

  bool is_zero() const noexcept;

 private:
  std::vector<EdgeProfile> profiles_;
};

/// Profile equal to `value` on [from, to).
EdgeProfile constant_profile(double value, double from = 0.0, double to = 1.0);

/// Throws SupportViolation or MeanViolation.
void validate_potential(const StarPotential& V);

/// theta_i = \int x V_i(x) dx.
VectorXd moments_theta(const StarPotential& V);

/// A = -sum_i \iint min(x,y) V_i(x) V_i(y) dx dy.
double constant_A(const StarPotential& V);

}  // namespace stargraph
