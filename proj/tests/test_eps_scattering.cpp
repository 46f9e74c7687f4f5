#include <doctest.h>

#include <numbers>

#include "stargraph/eps_operator.hpp"
#include "stargraph/eps_scattering.hpp"
#include "stargraph/limit_operator.hpp"
#include "support.hpp"

using namespace stargraph;
using testsupport::vstar;

namespace {

EpsOperator vstar_op(double lambda1, double eps) {
  return EpsOperator(vstar(), testsupport::vstar_resonant(lambda1), eps);
}

double max_abs(const MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("eps-scattering") {
  TEST_CASE("assemble_F examples") {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(assemble_F(3, i, 1.7, {j, 0.0}) - 2.0 / 3.0) <= 1e-15);
    CHECK(std::abs(assemble_F(3, 0, 2.0, {1, 0.4}) - (2.0 / 3.0) * std::exp(I * 0.8)) <= 1e-15);
    CHECK(std::abs(assemble_F(2, 1, std::numbers::pi, {1, 0.5}) - cdouble(0.0, -1.0)) <= 1e-15);
  }

  TEST_CASE("assemble_W vanishes for zero potential and solves its ODE") {
    const EpsOperator zero(testsupport::zero_potential(3), ScalingFunction::off_resonant(1.0, 1.0), 0.1);
    CHECK(std::abs(assemble_W(zero, 1.0, {0, 0.05})) == 0.0);

    testsupport::Gen gen(23);
    const StarPotential V = gen.potential(3);
    const double eps = 0.1;
    const EpsOperator op(V, ScalingFunction::off_resonant(-1.3, 0.7), eps);
    const double k = 1.7;
    const double d = 1e-3 * eps;
    for (int j = 0; j < 3; ++j) {
      for (const auto& piece : V.profile(j).pieces()) {
        const double x = eps * 0.5 * (piece.from + piece.to);
        const cdouble w0 = assemble_W(op, k, {j, x});
        const cdouble wpp = (assemble_W(op, k, {j, x + d}) - 2.0 * w0 + assemble_W(op, k, {j, x - d})) / (d * d);
        const double rhs = op.lambda() / (eps * eps * eps) * piece.poly(x / eps);
        CHECK(std::abs(wpp + k * k * w0 - rhs) <= 1e-5 * std::max(1.0, std::abs(op.lambda()) / (eps * eps * eps)));
      }
    }
    CHECK_THROWS_AS(assemble_W(op, k, {0, 2.0 * eps}), ConfigError);
  }

  TEST_CASE("D by the W route matches the closed double integral") {
    testsupport::Gen gen(29);
    for (int trial = 0; trial < 10; ++trial) {
      const StarPotential V = gen.potential(gen.integer(2, 4));
      const EpsOperator op(V, ScalingFunction::off_resonant(gen.uniform(-2, -0.5), 1.0), gen.uniform(0.01, 0.5));
      const double k = gen.uniform(0.1, 10.0);
      const cdouble dw = compute_ND(op, 0, k).D;
      const cdouble dc = denominator_closed(op, k);
      CHECK(std::abs(dw - dc) <= 1e-10 * std::max(1.0, std::abs(dc)));
    }
  }

  TEST_CASE("N and D asymptotics at eps = 1e-3") {
    const double eps = 1e-3;
    const EpsOperator op = vstar_op(-1.0, eps);
    const CouplingConstants cc = coupling_constants(vstar(), testsupport::vstar_resonant(-1.0));
    for (int i : {0, 1}) {
      const NumeratorDenominator exact = compute_ND(op, i, 1.0);
      const NumeratorDenominator lead = nd_asymptotic(op, cc, i, 1.0);
      CHECK(std::abs(exact.N / lead.N - 1.0) <= 10.0 * eps);
      CHECK(std::abs(exact.D / lead.D - 1.0) <= 10.0 * eps);
    }
    const EpsOperator zero(testsupport::zero_potential(3), ScalingFunction::off_resonant(1.0, 1.0), 0.1);
    const NumeratorDenominator nd = compute_ND(zero, 0, 1.0);
    CHECK(std::abs(nd.N) == 0.0);
    CHECK(std::abs(nd.D) == 0.0);
  }

  TEST_CASE("Fredholm identity and solve_inner") {
    const EpsOperator zero(testsupport::zero_potential(3), ScalingFunction::off_resonant(1.0, 1.0), 0.1);
    CHECK(std::abs(solve_inner(zero, 1, 1.0)) == 0.0);

    testsupport::Gen gen(31);
    for (int trial = 0; trial < 10; ++trial) {
      const EpsOperator op = trial == 0 ? vstar_op(-1.0, 1e-2)
                                        : EpsOperator(gen.potential(3), ScalingFunction::off_resonant(-1.0, 2.0),
                                                      gen.uniform(0.01, 0.3));
      const double k = trial == 0 ? 1.0 : gen.uniform(0.2, 8.0);
      for (int i = 0; i < 3; ++i) {
        const cdouble inner = solve_inner(op, i, k);
        CHECK(std::isfinite(std::abs(inner)));
        const NumeratorDenominator nd = compute_ND(op, i, k);
        CHECK(std::abs(inner * (1.0 - nd.D) - nd.N) <= 1e-12 * std::max(1.0, std::abs(nd.N)));
      }
    }
  }

  TEST_CASE("Fredholm denominator vanishes at the bound state") {
    const ScalingFunction lam = testsupport::vstar_resonant(-1.0);
    const CouplingConstants cc = coupling_constants(vstar(), lam);
    const EpsOperator op(vstar(), lam, 0.05);
    const auto pole = find_pole(op, cc);
    REQUIRE(pole.has_value());
    const cdouble at = fredholm_denominator(op, cdouble(0.0, pole->kappa));
    const cdouble below = fredholm_denominator(op, cdouble(0.0, pole->kappa * 0.9));
    const cdouble above = fredholm_denominator(op, cdouble(0.0, pole->kappa * 1.1));
    CHECK(std::abs(at) <= 1e-8 * std::abs(below));
    CHECK(below.real() * above.real() < 0.0);
    CHECK(std::abs(below.imag()) <= 1e-12 * std::abs(below));
  }

  TEST_CASE("smatrix_eps: Kirchhoff for zero potential, unitary and symmetric") {
    const EpsOperator zero(testsupport::zero_potential(4), ScalingFunction::off_resonant(1.0, 1.0), 0.1);
    CHECK(max_abs(smatrix_eps(zero, 1.3).entries - kirchhoff_smatrix(4)) <= 1e-15);

    testsupport::Gen gen(37);
    for (int trial = 0; trial < 10; ++trial) {
      const int n = gen.integer(2, 5);
      const EpsOperator op(gen.potential(n), ScalingFunction::off_resonant(gen.uniform(-2.0, 2.0), 1.0),
                           gen.uniform(0.01, 1.0));
      const MatrixXcd S = smatrix_eps(op, gen.uniform(0.1, 10.0)).entries;
      CHECK((S.adjoint() * S - MatrixXcd::Identity(n, n)).norm() <= 1e-8);
      CHECK(max_abs(S - S.transpose()) <= 1e-8);
    }
  }

  TEST_CASE("S^eps approaches S at first order for k = 1") {
    const CouplingConstants cc = coupling_constants(vstar(), testsupport::vstar_resonant(-1.0));
    const MatrixXcd S = smatrix_limit(1.0, cc).entries;
    double prev = 0.0;
    for (double e : {0.125, 0.0625, 0.03125, 0.015625}) {
      const double d = (smatrix_eps(vstar_op(-1.0, e), 1.0).entries - S).norm();
      if (prev > 0.0) CHECK(d / prev == doctest::Approx(0.5).epsilon(0.1));
      prev = d;
    }
  }

  TEST_CASE("scattering solutions: plane waves outside, Kirchhoff at the vertex") {
    testsupport::Gen gen(41);
    for (int trial = 0; trial < 6; ++trial) {
      const int n = gen.integer(2, 4);
      const double eps = gen.uniform(0.05, 0.5);
      const EpsOperator op = trial == 0 ? vstar_op(-1.0, 0.1)
                                        : EpsOperator(gen.potential(n), ScalingFunction::off_resonant(-1.0, 1.0), eps);
      const int edges = op.edges();
      const double k = gen.uniform(0.3, 5.0);
      for (const ScatteringSolution& sol : scattering_solutions(op, k)) {
        for (int j = 0; j < edges; ++j) {
          const double x = op.eps() * gen.uniform(1.0, 5.0);
          const cdouble plane = (j == sol.incoming ? std::exp(-I * k * x) : 0.0) + sol.amplitudes[j] * std::exp(I * k * x);
          CHECK(std::abs(scattering_solution_eval(op, sol, {j, x}) - plane) <= 1e-12);
        }
        const cdouble v0 = scattering_solution_eval(op, sol, {0, 0.0});
        cdouble dsum = 0.0;
        for (int j = 0; j < edges; ++j) {
          CHECK(std::abs(scattering_solution_eval(op, sol, {j, 0.0}) - v0) <= 1e-9);
          dsum += scattering_solution_dx(op, sol, {j, 0.0});
        }
        CHECK(std::abs(dsum) <= 1e-9);
      }
    }
  }
}
