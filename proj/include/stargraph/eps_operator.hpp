#pragma once

#include <optional>
#include <utility>

#include "stargraph/common.hpp"
#include "stargraph/coupling.hpp"
#include "stargraph/limit_operator.hpp"
#include "stargraph/potential.hpp"
#include "stargraph/quadrature.hpp"

namespace stargraph {

/// -d^2/dx^2 + (lambda(eps)/eps^3) V_eps <., V_eps> on the Kirchhoff star.
class EpsOperator {
 public:
  EpsOperator(StarPotential V, ScalingFunction lam, double eps);

  const StarPotential& potential() const noexcept { return V_; }
  const ScalingFunction& scaling() const noexcept { return lam_; }
  double eps() const noexcept { return eps_; }
  double lambda() const noexcept { return lam_(eps_); }
  int edges() const noexcept { return V_.edges(); }

 private:
  StarPotential V_;
  ScalingFunction lam_;
  double eps_;
};

struct PoleResult {
  double kappa;
  double eigenvalue;
  /// value of 1/lambda(eps) + eps^-3 <R0 V_eps, V_eps> at the root
  double residual;
};

/// <(-Delta_0 + kappa^2)^{-1} V_eps, V_eps> from the exact rescaled double integral.
double inner_RV_V(double kappa, const EpsOperator& op, const GaussLegendre& rule = GaussLegendre());

/// zeta_eps = (eps^3/lambda(eps) + <R0 V_eps, V_eps>)^{-1}.
double zeta(const EpsOperator& op, double kappa, const GaussLegendre& rule = GaussLegendre());

/// ((-Delta_0 + kappa^2)^{-1} V_eps)(x_i).
double applied_free_resolvent(const EpsOperator& op, double kappa, const EdgeCoordinate& p,
                              const GaussLegendre& rule = GaussLegendre());

/// Kernel of (-Delta^eps + kappa^2)^{-1}: G_{i kappa} - zeta (R0 V_eps)(x) (R0 V_eps)(y).
KernelEvaluator resolvent_eps_kernel(const EpsOperator& op, double kappa,
                                     const GaussLegendre& rule = GaussLegendre());

/// Pole equation scaled by eps^-3: 1/lambda(eps) + eps^-3 <R0 V_eps, V_eps>.
double pole_function(const EpsOperator& op, double kappa,
                     const GaussLegendre& rule = GaussLegendre());

/// Bracketed root of the pole equation. Throws MultipleSignChanges when sampling finds more
/// than one sign change in the bracket.
std::optional<PoleResult> find_pole(const EpsOperator& op, std::pair<double, double> bracket,
                                    const GaussLegendre& rule = GaussLegendre());

/// Two-term predictor (1/B)((A - 1/lambda0)/eps + lambda1/lambda0^2).
double pole_asymptotic(const EpsOperator& op, const CouplingConstants& cc);

/// [max(tau, p/2), 2p + 1] around a positive predictor p, else the scan range [tau, 10].
std::pair<double, double> default_pole_bracket(const EpsOperator& op, const CouplingConstants& cc);

/// find_pole on the default bracket, falling back to the scan range.
std::optional<PoleResult> find_pole(const EpsOperator& op, const CouplingConstants& cc,
                                    const GaussLegendre& rule = GaussLegendre());

struct HsDistance {
  /// sqrt of the quadrature over [0, L]^2 on every edge pair
  double distance;
  /// same restricted to x, y >= eps (off the potential support)
  double exterior;
  /// upper bound on the squared-norm contribution from outside [0, L]^2
  double tail_bound;
  double truncation;
};

/// Hilbert-Schmidt norm of (-Delta^eps + kappa^2)^{-1} - (-Delta_beta + kappa^2)^{-1},
/// integrated over [0, L]^2 per edge pair. L starts at 1 + 8/kappa and grows in steps of
/// 1/kappa until the tail bound is at most `tail_target`.
HsDistance hs_distance(const EpsOperator& op, const CouplingConstants& cc, double kappa,
                       const GaussLegendre& rule = GaussLegendre(), double tail_target = 1e-8);

}  // namespace stargraph
