#include "stargraph/eps_scattering.hpp"

#include <cmath>
#include <sstream>

#include "stargraph/free_resolvent.hpp"

namespace stargraph {

namespace {

void require_k(double k) {
  if (!(k > 0.0)) throw ConfigError("scattering momentum must be positive");
}

/// Rescaled D by the W route: D = sum_j eps \int W_j(eps u) V_j(u) du with
/// W_j(x) = -(lambda/eps) g_j(x/eps, ik eps).
cdouble denominator_w_route(const EpsOperator& op, cdouble k, const GaussLegendre& rule) {
  const double e = op.eps();
  const cdouble s = I * k * e;
  const StarPotential& V = op.potential();
  cdouble sum{0.0};
  for (int j = 0; j < V.edges(); ++j) {
    sum += integrate_against(
        V, j, 0.0, 1.0, [&](double u) { return applied_free_scaled(V, j, u, s, rule); }, rule);
  }
  return -op.lambda() * sum;
}

/// Edge sums \int_0^1 V_j(u) sin(k eps u) du and sum_l \int_0^1 V_l(u) e^{ik eps u} du.
struct Moments {
  VectorXcd sine;
  cdouble exp_sum;
};

Moments scattering_moments(const EpsOperator& op, double k, const GaussLegendre& rule) {
  const StarPotential& V = op.potential();
  const double ke = k * op.eps();
  Moments m{VectorXcd::Zero(V.edges()), 0.0};
  for (int j = 0; j < V.edges(); ++j) {
    m.sine[j] = integrate_against(V, j, 0.0, 1.0, [&](double u) { return std::sin(ke * u); }, rule);
    m.exp_sum += exp_moment(V, j, cdouble(0.0, ke), rule);
  }
  return m;
}

}  // namespace

cdouble assemble_F(int n, int incoming, double k, const EdgeCoordinate& x) {
  require_k(k);
  const double delta = x.edge == incoming ? 1.0 : 0.0;
  return -2.0 * I * delta * std::sin(k * x.x) + (2.0 / n) * std::exp(I * k * x.x);
}

cdouble assemble_W(const EpsOperator& op, double k, const EdgeCoordinate& x,
                   const GaussLegendre& rule) {
  require_k(k);
  const double e = op.eps();
  if (x.x < 0.0 || x.x > e * (1.0 + 1e-12)) throw ConfigError("W is defined on [0, eps]");
  const cdouble s = I * k * e;
  const cdouble g = with_order_doubling(
      rule,
      [&](const GaussLegendre& r) { return applied_free_scaled(op.potential(), x.edge, x.x / e, s, r); },
      "assemble_W", tol::quadrature, 1e-300);
  return -op.lambda() / e * g;
}

NumeratorDenominator compute_ND(const EpsOperator& op, int incoming, double k,
                                const GaussLegendre& rule) {
  require_k(k);
  const int n = op.edges();
  const double e = op.eps();
  const cdouble D = with_order_doubling(
      rule, [&](const GaussLegendre& r) { return denominator_w_route(op, k, r); }, "compute_ND(D)",
      tol::quadrature, 1e-300);
  const cdouble N = with_order_doubling(
      rule,
      [&](const GaussLegendre& r) {
        const Moments m = scattering_moments(op, k, r);
        return e * (-2.0 * I * m.sine[incoming] + (2.0 / n) * m.exp_sum);
      },
      "compute_ND(N)", tol::quadrature, 1e-300);
  return {N, D};
}

cdouble denominator_closed(const EpsOperator& op, double k, const GaussLegendre& rule) {
  require_k(k);
  const cdouble s = I * k * op.eps();
  const cdouble h = with_order_doubling(
      rule, [&](const GaussLegendre& r) { return free_form_scaled(op.potential(), s, r); },
      "denominator_closed", tol::quadrature, 1e-300);
  return -op.lambda() * h;
}

cdouble fredholm_denominator(const EpsOperator& op, cdouble k, const GaussLegendre& rule) {
  if (k.imag() < 0.0 || k == cdouble(0.0)) throw ConfigError("need Im k >= 0 and k != 0");
  const cdouble D = with_order_doubling(
      rule, [&](const GaussLegendre& r) { return denominator_w_route(op, k, r); },
      "fredholm_denominator", tol::quadrature, 1e-300);
  return 1.0 - D;
}

cdouble solve_inner(const EpsOperator& op, int incoming, double k, const GaussLegendre& rule) {
  const auto [N, D] = compute_ND(op, incoming, k, rule);
  const cdouble den = 1.0 - D;
  if (std::abs(den) <= tol::fredholm * std::max(1.0, std::abs(D))) {
    std::ostringstream msg;
    msg << "1 - D = " << den << " at k = " << k << ", eps = " << op.eps();
    throw FredholmSingular(msg.str());
  }
  return N / den;
}

std::vector<ScatteringSolution> scattering_solutions(const EpsOperator& op, double k,
                                                     const GaussLegendre& rule) {
  require_k(k);
  const int n = op.edges();
  const double e = op.eps();
  const Moments coarse = scattering_moments(op, k, rule);
  const Moments m = scattering_moments(op, k, GaussLegendre::cached(2 * rule.order()));
  const double drift = std::max((m.sine - coarse.sine).cwiseAbs().maxCoeff(),
                                std::abs(m.exp_sum - coarse.exp_sum));
  const double scale = std::max(m.sine.cwiseAbs().maxCoeff(), std::abs(m.exp_sum));
  if (drift > tol::quadrature * scale && drift > 0.0)
    throw QuadratureNotConverged("scattering moments changed by " + std::to_string(drift) +
                                 " under order doubling");
  // prefactor lambda/(k eps^3) times the eps from rescaling each integral
  const double pre = op.lambda() / (k * e * e);
  std::vector<ScatteringSolution> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    ScatteringSolution sol;
    sol.incoming = i;
    sol.k = k;
    sol.eps = e;
    sol.inner = solve_inner(op, i, k, rule);
    sol.amplitudes.resize(n);
    for (int j = 0; j < n; ++j) {
      const cdouble bracket = -m.sine[j] + m.exp_sum / (I * static_cast<double>(n));
      sol.amplitudes[j] = pre * sol.inner * bracket + 2.0 / n - (i == j ? 1.0 : 0.0);
    }
    out.push_back(std::move(sol));
  }
  return out;
}

SMatrix smatrix_eps(const EpsOperator& op, double k, const GaussLegendre& rule) {
  const auto sols = scattering_solutions(op, k, rule);
  const int n = op.edges();
  SMatrix s{k, MatrixXcd(n, n)};
  for (int i = 0; i < n; ++i) s.entries.row(i) = sols[i].amplitudes.transpose();
  return s;
}

cdouble scattering_solution_eval(const EpsOperator& op, const ScatteringSolution& sol,
                                 const EdgeCoordinate& x, const GaussLegendre& rule) {
  const double e = op.eps();
  const double k = sol.k;
  const double delta = x.edge == sol.incoming ? 1.0 : 0.0;
  cdouble psi = delta * std::exp(-I * k * x.x) + sol.amplitudes[x.edge] * std::exp(I * k * x.x);
  if (x.x < e) {
    // -(lambda c/(k eps^3)) \int_x^eps V_eps(y) sin k(x - y) dy, rescaled to [x/eps, 1]
    const double r = x.x / e;
    const double integral = integrate_against(
        op.potential(), x.edge, r, 1.0, [&](double u) { return std::sin(k * (x.x - e * u)); }, rule);
    psi -= op.lambda() * sol.inner / (k * e * e) * integral;
  }
  return psi;
}

cdouble scattering_solution_dx(const EpsOperator& op, const ScatteringSolution& sol,
                               const EdgeCoordinate& x, const GaussLegendre& rule) {
  const double e = op.eps();
  const double k = sol.k;
  const double delta = x.edge == sol.incoming ? 1.0 : 0.0;
  cdouble dpsi = -I * k * delta * std::exp(-I * k * x.x) +
                 I * k * sol.amplitudes[x.edge] * std::exp(I * k * x.x);
  if (x.x < e) {
    const double r = x.x / e;
    const double integral = integrate_against(
        op.potential(), x.edge, r, 1.0, [&](double u) { return std::cos(k * (x.x - e * u)); }, rule);
    dpsi -= op.lambda() * sol.inner / (e * e) * integral;
  }
  return dpsi;
}

NumeratorDenominator nd_asymptotic(const EpsOperator& op, const CouplingConstants& cc,
                                   int incoming, double k) {
  const int n = op.edges();
  const double e = op.eps();
  double weighted = cc.theta.sum() / n - cc.theta[incoming];
  return {2.0 * I * k * e * e * weighted, op.lambda() * (cc.A + I * k * e * cc.B)};
}

}  // namespace stargraph
