#pragma once

#include <vector>

#include "stargraph/common.hpp"
#include "stargraph/eps_operator.hpp"
#include "stargraph/limit_operator.hpp"

namespace stargraph {

/// Scattering solution for an incoming wave e^{-ikx} on edge `incoming`.
struct ScatteringSolution {
  int incoming = 0;
  double k = 0.0;
  double eps = 0.0;
  /// <psi, V_eps>, the unknown of the degenerate Fredholm equation
  cdouble inner{};
  /// row `incoming` of S^eps
  VectorXcd amplitudes;
};

struct NumeratorDenominator {
  cdouble N;
  cdouble D;
};

/// F(x_j) = -2i delta_ij sin(k x_j) + (2/n) e^{i k x_j}.
cdouble assemble_F(int n, int incoming, double k, const EdgeCoordinate& x);

/// Degenerate kernel column W(x_j) for 0 <= x_j <= eps.
cdouble assemble_W(const EpsOperator& op, double k, const EdgeCoordinate& x,
                   const GaussLegendre& rule = GaussLegendre());

/// N = sum_j \int F V_eps and D = sum_j \int W V_eps.
NumeratorDenominator compute_ND(const EpsOperator& op, int incoming, double k,
                                const GaussLegendre& rule = GaussLegendre());

/// D from the closed double-integral form
///   lambda/(2ik eps^3) [sum_j \iint V V e^{ik|x-y|} + sum_{j,l} (2/n - delta) \iint V V e^{ik(x+y)}].
cdouble denominator_closed(const EpsOperator& op, double k,
                           const GaussLegendre& rule = GaussLegendre());

/// 1 - D by the W route for complex k with Im k >= 0. On the imaginary axis this vanishes
/// exactly at the bound state.
cdouble fredholm_denominator(const EpsOperator& op, cdouble k,
                             const GaussLegendre& rule = GaussLegendre());

/// <psi_i, V_eps> = N/(1 - D); throws FredholmSingular when |1 - D| is at rounding level.
cdouble solve_inner(const EpsOperator& op, int incoming, double k,
                    const GaussLegendre& rule = GaussLegendre());

/// All n incoming-edge solutions at momentum k.
std::vector<ScatteringSolution> scattering_solutions(const EpsOperator& op, double k,
                                                     const GaussLegendre& rule = GaussLegendre());

SMatrix smatrix_eps(const EpsOperator& op, double k, const GaussLegendre& rule = GaussLegendre());

/// psi_i(x_j) from the variation-of-constants representation.
cdouble scattering_solution_eval(const EpsOperator& op, const ScatteringSolution& sol,
                                 const EdgeCoordinate& x,
                                 const GaussLegendre& rule = GaussLegendre());

/// d/dx psi_i(x_j).
cdouble scattering_solution_dx(const EpsOperator& op, const ScatteringSolution& sol,
                               const EdgeCoordinate& x,
                               const GaussLegendre& rule = GaussLegendre());

/// Leading-order predictors N ~ 2ik eps^2 sum_j (1/n - delta_ij) theta_j and
/// D ~ lambda(eps)(A + ik eps B).
NumeratorDenominator nd_asymptotic(const EpsOperator& op, const CouplingConstants& cc,
                                   int incoming, double k);

}  // namespace stargraph
