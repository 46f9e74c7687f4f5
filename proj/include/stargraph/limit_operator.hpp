#pragma once

#include <functional>
#include <optional>

#include "stargraph/common.hpp"
#include "stargraph/coupling.hpp"
#include "stargraph/potential.hpp"

namespace stargraph {

/// Complex momentum, restricted to Im k > 0 (resolvent) or real k > 0 (scattering).
class Momentum {
 public:
  enum class Regime { Resolvent, Scattering };

  static Momentum resolvent(cdouble k);
  /// k = i kappa
  static Momentum imaginary(double kappa);
  static Momentum scattering(double k);

  cdouble k() const noexcept { return k_; }
  Regime regime() const noexcept { return regime_; }

 private:
  Momentum(cdouble k, Regime r) : k_(k), regime_(r) {}
  cdouble k_;
  Regime regime_;
};

enum class OperatorKind { Free, Limit, Epsilon };

/// Resolvent kernel bound to one momentum.
class KernelEvaluator {
 public:
  using Map = std::function<cdouble(const EdgeCoordinate&, const EdgeCoordinate&)>;

  KernelEvaluator(OperatorKind kind, Momentum k, Map map)
      : kind_(kind), k_(k), map_(std::move(map)) {}

  cdouble operator()(const EdgeCoordinate& p, const EdgeCoordinate& q) const { return map_(p, q); }
  OperatorKind kind() const noexcept { return kind_; }
  const Momentum& momentum() const noexcept { return k_; }

 private:
  OperatorKind kind_;
  Momentum k_;
  Map map_;
};

/// On-shell scattering matrix at real momentum k.
struct SMatrix {
  double k = 0.0;
  MatrixXcd entries;
};

/// Kirchhoff scattering matrix 2/n - delta.
MatrixXcd kirchhoff_smatrix(int n);

/// Free Kirchhoff Green function G_k(p, q) on an n-edge star.
cdouble free_green(const Momentum& k, const EdgeCoordinate& p, const EdgeCoordinate& q, int n);
/// d/dx of free_green in the first argument (one-sided, x -> p.x from the vertex side
/// of the source when p.x == q.x on the same edge).
cdouble free_green_dx(const Momentum& k, const EdgeCoordinate& p, const EdgeCoordinate& q, int n);

/// Closed-form Krein matrix Lambda_ij = beta Pi_ij / (1 + i k beta B).
MatrixXcd lambda_matrix(const Momentum& k, const CouplingConstants& cc);

/// Lambda from the dense solve -(A + ikB)^{-1} B - i/(kn) J.
MatrixXcd lambda_matrix_direct(const Momentum& k, const BoundaryPair& bp, int n);

/// Xi_k = G_k + Lambda_ij e^{ik(x+y)}.
KernelEvaluator resolvent_kernel_limit(const CouplingConstants& cc, const Momentum& k);

/// d/dx of the limit kernel in its first argument.
cdouble limit_kernel_dx(const CouplingConstants& cc, const Momentum& k, const EdgeCoordinate& p,
                        const EdgeCoordinate& q);

/// The single negative eigenvalue -1/(beta B)^2 when beta < 0.
std::optional<double> limit_point_spectrum(const CouplingConstants& cc);

enum class PoleKind { Bound, Antibound };

struct LimitPole {
  double kappa;
  PoleKind kind;
};

/// Zero kappa = 1/(beta B) of 1 - kappa beta B; none when beta = 0.
std::optional<LimitPole> limit_pole(const CouplingConstants& cc);

/// S_ij = 2/n - delta_ij - 2ik beta Pi_ij / (1 + ik beta B).
SMatrix smatrix_limit(double k, const CouplingConstants& cc);

/// S = -(A + ikB)^{-1}(A - ikB) by dense solve.
SMatrix smatrix_direct(double k, const BoundaryPair& bp);

}  // namespace stargraph
