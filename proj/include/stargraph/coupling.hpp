#pragma once

#include <optional>
#include <vector>

#include "stargraph/common.hpp"
#include "stargraph/potential.hpp"

namespace stargraph {

/// lambda(eps) = lambda0 + eps lambda1 + sum_k higher[k] eps^(k+2).
///
/// Resonance is declared, never detected: a resonant scaling derives lambda0 = 1/A.
class ScalingFunction {
 public:
  static ScalingFunction resonant(double lambda1, double A, std::vector<double> higher = {});
  static ScalingFunction off_resonant(double lambda0, double lambda1,
                                      std::vector<double> higher = {});

  double lambda0() const noexcept { return lambda0_; }
  double lambda1() const noexcept { return lambda1_; }
  const std::vector<double>& higher() const noexcept { return higher_; }
  bool is_resonant() const noexcept { return resonant_; }

  double operator()(double eps) const noexcept;

 private:
  ScalingFunction(double l0, double l1, std::vector<double> higher, bool resonant);

  double lambda0_;
  double lambda1_;
  std::vector<double> higher_;
  bool resonant_;
};

/// Parameters of the limit vertex coupling.
struct CouplingConstants {
  VectorXd theta;
  double A = 0.0;
  double B = 0.0;
  MatrixXd Pi;
  double beta = 0.0;

  int edges() const noexcept { return static_cast<int>(theta.size()); }
};

/// Matrices of the vertex condition  Amat Psi(0) + Bmat Psi'(0) = 0.
struct BoundaryPair {
  MatrixXd Amat;
  MatrixXd Bmat;
};

struct BPi {
  double B;
  MatrixXd Pi;
};

BPi constants_B_Pi(const VectorXd& theta);

/// beta = 1/(lambda1 A^2) for a resonant scaling, 0 otherwise.
double coupling_beta(const ScalingFunction& lam, double A);

/// All limit constants of a validated potential.
CouplingConstants coupling_constants(const StarPotential& V, const ScalingFunction& lam);

/// Throws DegenerateTheta if two theta entries coincide within tol::theta_tie.
BoundaryPair boundary_matrices(const VectorXd& theta, double beta);

/// Amat Bmat^T symmetric and (Amat|Bmat) of full row rank.
bool check_selfadjoint(const BoundaryPair& bp);

}  // namespace stargraph
