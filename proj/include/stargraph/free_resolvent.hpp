#pragma once

// Free-resolvent integrals against the scaled potential V_eps(x) = V(x/eps).
//
// Every integral is rescaled to [0, 1] by x = eps u, so quadrature nodes never depend on
// eps. The rescaled exponent is s = i k eps (s = -kappa eps on the imaginary axis), and
// differences of exponentials are formed with expm1 so that the O(s) and O(s^2) parts that
// survive the zero-mean cancellation keep full relative precision.

#include <algorithm>
#include <cmath>
#include <vector>

#include "stargraph/common.hpp"
#include "stargraph/potential.hpp"
#include "stargraph/quadrature.hpp"

namespace stargraph {

inline double sg_expm1(double x) { return std::expm1(x); }
inline cdouble sg_expm1(cdouble z) { return expm1(z); }

/// \int_lo^hi V_edge(u) f(u) du, panelled on the potential breakpoints.
template <typename F>
auto integrate_against(const StarPotential& V, int edge, double lo, double hi, F&& f,
                       const GaussLegendre& rule) {
  using R = std::decay_t<decltype(f(0.0))>;
  R sum{0};
  const EdgeProfile& prof = V.profile(edge);
  if (prof.empty() || !(hi > lo)) return sum;
  for (const auto& piece : prof.pieces()) {
    const double a = std::max(lo, piece.from);
    const double b = std::min(hi, piece.to);
    if (!(b > a)) continue;
    sum += rule.integrate([&](double u) { return piece.poly(u) * f(u); }, a, b);
  }
  return sum;
}

/// Q_i(s) = \int V_i(u) e^{s u} du, the edge mean added back to the expm1 part.
template <typename Scalar>
Scalar exp_moment(const StarPotential& V, int edge, Scalar s, const GaussLegendre& rule) {
  const Scalar varying =
      integrate_against(V, edge, 0.0, 1.0, [&](double u) { return sg_expm1(s * u); }, rule);
  return varying + V.profile(edge).moment(0);
}

/// h(s) with <G_k V_eps, V_eps> = eps^3 h(i k eps) (bilinear pairing, no conjugation):
///   h(s) = -1/(2s) [ sum_i \iint V_i V_i (e^{s|u-v|} - e^{s(u+v)})
///                    + (2/n) (sum_i Q_i(s))^2 ].
/// The double integral is split along the diagonal u = v.
template <typename Scalar>
Scalar free_form_scaled(const StarPotential& V, Scalar s, const GaussLegendre& rule) {
  const int n = V.edges();
  Scalar diag{0};
  Scalar q{0};
  for (int i = 0; i < n; ++i) {
    if (V.profile(i).empty()) continue;
    q += exp_moment(V, i, s, rule);
    diag += integrate_against(
        V, i, 0.0, 1.0,
        [&](double u) {
          auto inner = [&](double v) {
            const double lo = std::min(u, v);
            return -std::exp(s * std::abs(u - v)) * sg_expm1(2.0 * s * lo);
          };
          return integrate_against(V, i, 0.0, u, inner, rule) +
                 integrate_against(V, i, u, 1.0, inner, rule);
        },
        rule);
  }
  return -(diag + (2.0 / n) * q * q) / (2.0 * s);
}

/// g_i(r, s) with (G_k V_eps)(x_i) = eps^2 g_i(x/eps, i k eps):
///   g_i(r, s) = -1/(2s) [ \int V_i(u) (e^{s|r-u|} - e^{s(r+u)}) du
///                         + (2/n) e^{s r} sum_j Q_j(s) ].
template <typename Scalar>
Scalar applied_free_scaled(const StarPotential& V, int edge, double r, Scalar s,
                           const GaussLegendre& rule) {
  const int n = V.edges();
  Scalar q{0};
  for (int j = 0; j < n; ++j) q += exp_moment(V, j, s, rule);
  auto local = [&](double u) {
    const double lo = std::min(r, u);
    return -std::exp(s * std::abs(r - u)) * sg_expm1(2.0 * s * lo);
  };
  const double split = std::clamp(r, 0.0, 1.0);
  const Scalar own = integrate_against(V, edge, 0.0, split, local, rule) +
                     integrate_against(V, edge, split, 1.0, local, rule);
  return -(own + (2.0 / n) * std::exp(s * r) * q) / (2.0 * s);
}

}  // namespace stargraph
