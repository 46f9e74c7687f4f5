#include <doctest.h>

#include "stargraph/coupling.hpp"
#include "stargraph/limit_operator.hpp"
#include "support.hpp"

using namespace stargraph;
using testsupport::vstar;

namespace {

CouplingConstants constants_from(const VectorXd& theta, double beta) {
  CouplingConstants cc;
  cc.theta = theta;
  auto [B, Pi] = constants_B_Pi(theta);
  cc.B = B;
  cc.Pi = Pi;
  cc.A = -1.0;
  cc.beta = beta;
  return cc;
}

CouplingConstants vstar_cc(double lambda1) {
  return coupling_constants(vstar(), testsupport::vstar_resonant(lambda1));
}

double max_abs(const MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("limit-op") {
  TEST_CASE("momentum regimes are enforced") {
    CHECK_THROWS_AS(Momentum::resolvent(cdouble(1.0, 0.0)), ConfigError);
    CHECK_THROWS_AS(Momentum::scattering(-1.0), ConfigError);
    CHECK_THROWS_AS(Momentum::imaginary(0.0), ConfigError);
    CHECK(Momentum::imaginary(2.0).k() == cdouble(0.0, 2.0));
  }

  TEST_CASE("free Green function examples") {
    const Momentum k = Momentum::imaginary(1.0);
    const cdouble g = free_green(k, {0, 0.0}, {1, 0.0}, 2);
    CHECK(std::abs(g - 0.5) <= 1e-15);

    // n = 2 reduces to the free line kernel with u = x_1, v = -y_2
    const Momentum k2 = Momentum::resolvent(cdouble(0.3, 0.8));
    for (double x : {0.0, 0.4, 2.0})
      for (double y : {0.1, 1.3}) {
        const cdouble line = I / (2.0 * k2.k()) * std::exp(I * k2.k() * std::abs(x + y));
        CHECK(std::abs(free_green(k2, {0, x}, {1, y}, 2) - line) <= 1e-14);
        const cdouble same = I / (2.0 * k2.k()) * std::exp(I * k2.k() * std::abs(x - y));
        CHECK(std::abs(free_green(k2, {0, x}, {0, y}, 2) - same) <= 1e-14);
      }

    // Kirchhoff: sum_j d/dx G((j,0),(l,y)) = 0
    for (int l = 0; l < 4; ++l) {
      cdouble sum = 0.0;
      for (int j = 0; j < 4; ++j) sum += free_green_dx(k2, {j, 0.0}, {l, 0.9}, 4);
      CHECK(std::abs(sum) <= 1e-14);
    }
  }

  TEST_CASE("lambda_matrix examples") {
    const CouplingConstants kirchhoff = coupling_constants(vstar(), ScalingFunction::off_resonant(-1.0, 1.0));
    CHECK(max_abs(lambda_matrix(Momentum::imaginary(1.0), kirchhoff)) == 0.0);

    const CouplingConstants cc = vstar_cc(1.0);
    const MatrixXcd L = lambda_matrix(Momentum::imaginary(1.0), cc);
    CHECK(max_abs(L - (18.0 / 17.0) * cc.Pi.cast<cdouble>()) <= 1e-14);

    const BoundaryPair bp = boundary_matrices(cc.theta, cc.beta);
    CHECK(max_abs(lambda_matrix_direct(Momentum::imaginary(1.0), bp, 3) - L) <= 1e-10);

    const BoundaryPair bp0 = boundary_matrices(kirchhoff.theta, 0.0);
    CHECK(max_abs(lambda_matrix_direct(Momentum::imaginary(1.0), bp0, 3)) <= 1e-12);

    // 1 - kappa beta B vanishes at kappa = 8/9 for beta = -9/4
    CHECK_THROWS_AS(lambda_matrix(Momentum::imaginary(8.0 / 9.0), vstar_cc(-1.0)), AtPole);
  }

  TEST_CASE("lambda_matrix_direct matches closed form at k = 2i for random input") {
    testsupport::Gen gen(3);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = gen.integer(2, 6);
      const CouplingConstants cc = constants_from(gen.distinct_theta(n), gen.beta());
      const Momentum k = Momentum::imaginary(2.0);
      if (std::abs(1.0 - 2.0 * cc.beta * cc.B) < 1e-3) continue;
      CHECK(max_abs(lambda_matrix(k, cc) - lambda_matrix_direct(k, boundary_matrices(cc.theta, cc.beta), n)) <=
            1e-10);
    }
  }

  TEST_CASE("limit kernel: beta = 0 gives G, symmetry, vertex conditions") {
    const CouplingConstants kirchhoff = coupling_constants(vstar(), ScalingFunction::off_resonant(-1.0, 1.0));
    const Momentum k = Momentum::imaginary(1.3);
    const KernelEvaluator xi0 = resolvent_kernel_limit(kirchhoff, k);
    CHECK(xi0.kind() == OperatorKind::Limit);
    CHECK(std::abs(xi0({0, 0.3}, {2, 1.1}) - free_green(k, {0, 0.3}, {2, 1.1}, 3)) == 0.0);

    testsupport::Gen gen(5);
    for (int trial = 0; trial < 25; ++trial) {
      const int n = gen.integer(2, 5);
      const CouplingConstants cc = constants_from(gen.distinct_theta(n, 0.05), gen.beta());
      const Momentum km = trial % 2 ? Momentum::imaginary(gen.uniform(0.2, 3.0))
                                    : Momentum::resolvent(cdouble(gen.uniform(-2, 2), gen.uniform(0.2, 2)));
      const KernelEvaluator xi = resolvent_kernel_limit(cc, km);
      const BoundaryPair bp = boundary_matrices(cc.theta, cc.beta);
      const int j = gen.integer(0, n - 1);
      const double y = gen.uniform(0.1, 3.0);
      VectorXcd psi(n);
      VectorXcd dpsi(n);
      for (int i = 0; i < n; ++i) {
        psi[i] = xi({i, 0.0}, {j, y});
        dpsi[i] = limit_kernel_dx(cc, km, {i, 0.0}, {j, y});
      }
      CHECK((bp.Amat.cast<cdouble>() * psi + bp.Bmat.cast<cdouble>() * dpsi).norm() <= 1e-8);
      const double x = gen.uniform(0.0, 3.0);
      const int i = gen.integer(0, n - 1);
      CHECK(std::abs(xi({i, x}, {j, y}) - xi({j, y}, {i, x})) <= 1e-14);
    }
  }

  TEST_CASE("point spectrum and pole") {
    const auto ev = limit_point_spectrum(vstar_cc(-1.0));
    REQUIRE(ev.has_value());
    CHECK(*ev == doctest::Approx(-64.0 / 81.0).epsilon(1e-14));
    CHECK_FALSE(limit_point_spectrum(vstar_cc(1.0)).has_value());
    const CouplingConstants kirchhoff = coupling_constants(vstar(), ScalingFunction::off_resonant(-1.0, 1.0));
    CHECK_FALSE(limit_point_spectrum(kirchhoff).has_value());

    const auto bound = limit_pole(vstar_cc(-1.0));
    REQUIRE(bound.has_value());
    CHECK(bound->kappa == doctest::Approx(8.0 / 9.0).epsilon(1e-14));
    CHECK(bound->kind == PoleKind::Bound);
    CHECK(*ev == doctest::Approx(-bound->kappa * bound->kappa).epsilon(1e-14));
    const auto anti = limit_pole(vstar_cc(1.0));
    REQUIRE(anti.has_value());
    CHECK(anti->kappa == doctest::Approx(-8.0 / 9.0).epsilon(1e-14));
    CHECK(anti->kind == PoleKind::Antibound);
    CHECK_FALSE(limit_pole(kirchhoff).has_value());

    const CouplingConstants flat = constants_from(VectorXd::Constant(3, 0.2), -1.0);
    CHECK_THROWS_AS(limit_point_spectrum(flat), ZeroB);
    CHECK_THROWS_AS(limit_pole(flat), ZeroB);
  }

  TEST_CASE("smatrix_limit examples") {
    const CouplingConstants kirchhoff = coupling_constants(vstar(), ScalingFunction::off_resonant(-1.0, 1.0));
    MatrixXd expected(3, 3);
    expected << -1, 2, 2, 2, -1, 2, 2, 2, -1;
    expected /= 3.0;
    CHECK(max_abs(smatrix_limit(2.0, kirchhoff).entries - expected.cast<cdouble>()) <= 1e-15);
    CHECK(max_abs(kirchhoff_smatrix(3) - expected.cast<cdouble>()) <= 1e-15);

    const CouplingConstants cc = vstar_cc(-1.0);
    CHECK(max_abs(smatrix_limit(1e-8, cc).entries - kirchhoff_smatrix(3)) <= 1e-6);

    VectorXd t(2);
    t << 0.7, -0.2;
    const CouplingConstants two = constants_from(t, 1.5);
    CHECK((smatrix_limit(1e4, two).entries - MatrixXcd::Identity(2, 2)).norm() <= 1e-3);
  }

  TEST_CASE("smatrix_direct examples") {
    const CouplingConstants cc = vstar_cc(-1.0);
    const BoundaryPair bp0 = boundary_matrices(cc.theta, 0.0);
    CHECK(max_abs(smatrix_direct(1.0, bp0).entries - kirchhoff_smatrix(3)) <= 1e-12);
    const BoundaryPair bp = boundary_matrices(cc.theta, cc.beta);
    CHECK(max_abs(smatrix_direct(1.0, bp).entries - smatrix_limit(1.0, cc).entries) <= 1e-10);
    for (double k : {0.1, 1.0, 10.0}) {
      const MatrixXcd S = smatrix_direct(k, bp).entries;
      CHECK((S.adjoint() * S - MatrixXcd::Identity(3, 3)).norm() <= 1e-10);
    }
  }

  TEST_CASE("singular direct systems are reported") {
    CHECK_THROWS_AS(smatrix_direct(1.0, {MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2)}), SingularSystem);
    CHECK_THROWS_AS(lambda_matrix_direct(Momentum::imaginary(1.0), {MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2)}, 2),
                    SingularSystem);
  }
}
