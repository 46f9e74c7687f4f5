#include <doctest.h>

#include "stargraph/coupling.hpp"
#include "stargraph/potential.hpp"
#include "stargraph/quadrature.hpp"
#include "support.hpp"

using namespace stargraph;
using testsupport::vstar;

namespace {

EdgeProfile poly_profile(std::initializer_list<double> coeffs, double from = 0.0, double to = 1.0) {
  VectorXd c(static_cast<Eigen::Index>(coeffs.size()));
  Eigen::Index i = 0;
  for (double v : coeffs) c[i++] = v;
  return EdgeProfile({{from, to, Polynomial(c)}});
}

/// Midpoint Riemann sum of x V_i(x) with `points` cells.
double riemann_theta(const StarPotential& V, int edge, int points) {
  double sum = 0.0;
  const double h = 1.0 / points;
  for (int m = 0; m < points; ++m) {
    const double x = (m + 0.5) * h;
    sum += x * V(edge, x);
  }
  return sum * h;
}

/// -sum_i \iint min(x,y) V_i V_i on a cells x cells midpoint grid.
double riemann_A(const StarPotential& V, int cells) {
  const double h = 1.0 / cells;
  double total = 0.0;
  for (int i = 0; i < V.edges(); ++i) {
    std::vector<double> v(cells);
    for (int m = 0; m < cells; ++m) v[m] = V(i, (m + 0.5) * h);
    // min of the midpoints (a + 1/2) h and (b + 1/2) h
    for (int a = 0; a < cells; ++a)
      for (int b = 0; b < cells; ++b) total += (std::min(a, b) + 0.5) * h * v[a] * v[b];
  }
  return -total * h * h;
}

}  // namespace

TEST_SUITE("graph-core") {
  TEST_CASE("validate_potential examples") {
    CHECK_NOTHROW(validate_potential(vstar()));
    const StarPotential bad({constant_profile(1.0), constant_profile(0.0)});
    try {
      validate_potential(bad);
      FAIL("expected MeanViolation");
    } catch (const MeanViolation& e) {
      CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
    const StarPotential odd({poly_profile({-0.5, 1.0}), EdgeProfile(), EdgeProfile()});
    CHECK_NOTHROW(validate_potential(odd));
    const StarPotential outside({poly_profile({1.0}, 0.5, 1.5), poly_profile({-1.0}, 0.0, 1.0)});
    CHECK_THROWS_AS(validate_potential(outside), SupportViolation);
  }

  TEST_CASE("edge profile rejects malformed pieces") {
    CHECK_THROWS_AS(poly_profile({1.0, 0.0, 0.0, 0.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(poly_profile({1.0}, 0.6, 0.4), ConfigError);
    CHECK_THROWS_AS(EdgeProfile({{0.0, 0.6, Polynomial(VectorXd::Ones(1))},
                                 {0.5, 1.0, Polynomial(VectorXd::Ones(1))}}),
                    ConfigError);
    CHECK_THROWS_AS(StarPotential({constant_profile(1.0)}), ConfigError);
  }

  TEST_CASE("theta for V* matches closed form and a 1e6-point Riemann oracle") {
    const VectorXd theta = moments_theta(vstar());
    CHECK(theta[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(theta[1] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(std::abs(theta[2]) <= 1e-12);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(riemann_theta(vstar(), i, 1000000) - theta[i]) <= 1e-10);
  }

  TEST_CASE("theta for the odd profile and zero edges") {
    const StarPotential odd({poly_profile({-0.5, 1.0}), EdgeProfile(), EdgeProfile()});
    const VectorXd theta = moments_theta(odd);
    CHECK(std::abs(theta[0] - 1.0 / 12.0) <= 1e-14);
    CHECK(theta[1] == 0.0);
    CHECK(theta[2] == 0.0);
  }

  TEST_CASE("A for V* and edge locality") {
    CHECK(std::abs(constant_A(vstar()) + 2.0 / 3.0) <= 1e-12);
    // 1000 x 1000 midpoint grid; the constant profile makes the rule exact up to O(h^2)
    CHECK(std::abs(riemann_A(vstar(), 1000) + 2.0 / 3.0) <= 1e-5);
    CHECK(constant_A(testsupport::zero_potential(3)) == 0.0);
    const StarPotential two({constant_profile(1.0), constant_profile(-1.0)});
    CHECK(std::abs(constant_A(two) + 2.0 / 3.0) <= 1e-12);
  }

  TEST_CASE("A for a cubic piece against the Riemann oracle") {
    const StarPotential V({poly_profile({0.3, -1.2, 0.4, 0.9}, 0.0, 0.7), poly_profile({-0.2, 0.5}, 0.2, 1.0)});
    const double closed = constant_A(V);
    const double coarse = riemann_A(V, 400);
    const double fine = riemann_A(V, 800);
    CHECK(std::abs((4.0 * fine - coarse) / 3.0 - closed) <= 1e-6);
  }

  TEST_CASE("B and Pi examples") {
    VectorXd t(3);
    t << 0.5, -0.5, 0.0;
    auto [B, Pi] = constants_B_Pi(t);
    CHECK(std::abs(B + 0.5) <= 1e-15);
    MatrixXd expected(3, 3);
    expected << 0.25, -0.25, 0, -0.25, 0.25, 0, 0, 0, 0;
    CHECK((Pi - expected).cwiseAbs().maxCoeff() <= 1e-15);

    auto [B0, Pi0] = constants_B_Pi(VectorXd::Constant(4, 0.37));
    CHECK(std::abs(B0) <= 1e-15);
    CHECK(Pi0.cwiseAbs().maxCoeff() <= 1e-15);

    VectorXd t2(2);
    t2 << 1.0, 0.0;
    auto [B2, Pi2] = constants_B_Pi(t2);
    CHECK(std::abs(B2 + 0.5) <= 1e-15);
    MatrixXd e2(2, 2);
    e2 << 0.25, -0.25, -0.25, 0.25;
    CHECK((Pi2 - e2).cwiseAbs().maxCoeff() <= 1e-15);
  }

  TEST_CASE("coupling_beta examples") {
    const double A = constant_A(vstar());
    const ScalingFunction neg = ScalingFunction::resonant(-1.0, A);
    CHECK(neg.lambda0() == doctest::Approx(-1.5).epsilon(1e-14));
    CHECK(coupling_beta(neg, A) == doctest::Approx(-9.0 / 4.0).epsilon(1e-14));
    CHECK(coupling_beta(ScalingFunction::resonant(1.0, A), A) == doctest::Approx(9.0 / 4.0).epsilon(1e-14));
    CHECK(coupling_beta(ScalingFunction::off_resonant(-1.0, 2.0), A) == 0.0);
    CHECK_THROWS_AS(ScalingFunction::resonant(1.0, 0.0), ResonantWithZeroA);
  }

  TEST_CASE("scaling function evaluates the series") {
    const ScalingFunction lam = ScalingFunction::off_resonant(2.0, -1.0, {3.0, 0.5});
    const double e = 0.2;
    CHECK(lam(e) == doctest::Approx(2.0 - e + 3.0 * e * e + 0.5 * e * e * e).epsilon(1e-15));
    CHECK_THROWS_AS(ScalingFunction::off_resonant(0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(ScalingFunction::off_resonant(1.0, 0.0), ConfigError);
  }

  TEST_CASE("boundary_matrices example for V*") {
    VectorXd t(3);
    t << 0.5, -0.5, 0.0;
    const BoundaryPair bp = boundary_matrices(t, 0.0);
    MatrixXd A(3, 3);
    A << 0, 0, 0, 1, -1, 0, 2, 0, -2;
    MatrixXd B = MatrixXd::Zero(3, 3);
    B.row(0).setConstant(-1.0);
    CHECK((bp.Amat - A).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((bp.Bmat - B).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(check_selfadjoint(bp));

    const BoundaryPair res = boundary_matrices(t, -9.0 / 4.0);
    CHECK(res.Bmat(1, 0) == doctest::Approx(9.0 / 8.0));
    CHECK(check_selfadjoint(res));

    VectorXd tie(3);
    tie << 0.5, 0.5, 0.0;
    CHECK_THROWS_AS(boundary_matrices(tie, 1.0), DegenerateTheta);
  }

  TEST_CASE("check_selfadjoint examples") {
    CHECK_FALSE(check_selfadjoint({MatrixXd::Zero(3, 3), MatrixXd::Zero(3, 3)}));
    CHECK(check_selfadjoint({MatrixXd::Identity(3, 3), MatrixXd::Zero(3, 3)}));
    MatrixXd asym = MatrixXd::Zero(2, 2);
    asym(0, 1) = 1.0;
    CHECK_FALSE(check_selfadjoint({MatrixXd::Identity(2, 2), asym}));
  }

  TEST_CASE("Gauss-Legendre exactness on monomials") {
    for (int q : {1, 2, 5, 16, 32, 64}) {
      const GaussLegendre rule(q);
      CHECK((rule.weights().array() > 0.0).all());
      for (int d = 0; d <= 2 * q - 1; ++d) {
        const double got = rule.integrate([d](double x) { return std::pow(x, d); }, 0.3, 1.7);
        const double exact = (std::pow(1.7, d + 1) - std::pow(0.3, d + 1)) / (d + 1);
        CHECK(std::abs(got - exact) <= 1e-13 * std::max(1.0, std::abs(exact)));
      }
    }
  }

  TEST_CASE("zero-mean closure by independent quadrature") {
    testsupport::Gen gen(11);
    for (int trial = 0; trial < 50; ++trial) {
      const StarPotential V = gen.potential(gen.integer(2, 5));
      REQUIRE_NOTHROW(validate_potential(V));
      const GaussLegendre rule(8);
      double total = 0.0;
      for (int i = 0; i < V.edges(); ++i)
        for (const auto& p : V.profile(i).pieces())
          total += rule.integrate([&](double x) { return p.poly(x); }, p.from, p.to);
      CHECK(std::abs(total - V.total_mean()) <= 1e-12);
    }
  }
}
