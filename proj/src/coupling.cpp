#include "stargraph/coupling.hpp"

#include <cmath>
#include <sstream>

namespace stargraph {

ScalingFunction::ScalingFunction(double l0, double l1, std::vector<double> higher, bool resonant)
    : lambda0_(l0), lambda1_(l1), higher_(std::move(higher)), resonant_(resonant) {
  if (lambda0_ == 0.0) throw ConfigError("lambda0 must be nonzero");
  if (lambda1_ == 0.0) throw ConfigError("lambda1 must be nonzero");
}

ScalingFunction ScalingFunction::resonant(double lambda1, double A, std::vector<double> higher) {
  if (A == 0.0) throw ResonantWithZeroA("resonant scaling requires A != 0");
  return ScalingFunction(1.0 / A, lambda1, std::move(higher), true);
}

ScalingFunction ScalingFunction::off_resonant(double lambda0, double lambda1,
                                              std::vector<double> higher) {
  return ScalingFunction(lambda0, lambda1, std::move(higher), false);
}

double ScalingFunction::operator()(double eps) const noexcept {
  double tail = 0.0;
  for (auto it = higher_.rbegin(); it != higher_.rend(); ++it) tail = tail * eps + *it;
  return lambda0_ + eps * (lambda1_ + eps * tail);
}

BPi constants_B_Pi(const VectorXd& theta) {
  const double n = static_cast<double>(theta.size());
  const double sum = theta.sum();
  const double B = sum * sum / n - theta.squaredNorm();
  const VectorXd p = VectorXd::Constant(theta.size(), sum / n) - theta;
  return {B, p * p.transpose()};
}

double coupling_beta(const ScalingFunction& lam, double A) {
  if (!lam.is_resonant()) return 0.0;
  if (A == 0.0) throw ResonantWithZeroA("resonant scaling requires A != 0");
  return 1.0 / (lam.lambda1() * A * A);
}

CouplingConstants coupling_constants(const StarPotential& V, const ScalingFunction& lam) {
  CouplingConstants cc;
  cc.theta = moments_theta(V);
  cc.A = constant_A(V);
  auto [B, Pi] = constants_B_Pi(cc.theta);
  cc.B = B;
  cc.Pi = std::move(Pi);
  cc.beta = coupling_beta(lam, cc.A);
  return cc;
}

BoundaryPair boundary_matrices(const VectorXd& theta, double beta) {
  const Eigen::Index n = theta.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(theta[i] - theta[j]) <= tol::theta_tie) {
        std::ostringstream msg;
        msg << "theta[" << i << "] and theta[" << j << "] coincide (" << theta[i] << ")";
        throw DegenerateTheta(msg.str());
      }
    }
  }
  BoundaryPair bp{MatrixXd::Zero(n, n), MatrixXd::Zero(n, n)};
  bp.Bmat.row(0).setConstant(-1.0);
  for (Eigen::Index j = 1; j < n; ++j) {
    bp.Amat(j, 0) = 1.0 / (theta[0] - theta[j]);
    bp.Amat(j, j) = 1.0 / (theta[j] - theta[0]);
    bp.Bmat.row(j) = -beta * theta.transpose();
  }
  return bp;
}

bool check_selfadjoint(const BoundaryPair& bp) {
  const Eigen::Index n = bp.Amat.rows();
  if (bp.Amat.cols() != n || bp.Bmat.rows() != n || bp.Bmat.cols() != n) return false;
  const MatrixXd ab = bp.Amat * bp.Bmat.transpose();
  if ((ab - ab.transpose()).norm() > tol::selfadjoint) return false;
  MatrixXd block(n, 2 * n);
  block << bp.Amat, bp.Bmat;
  const Eigen::JacobiSVD<MatrixXd> svd(block);
  return svd.singularValues()[n - 1] > tol::rank;
}

}  // namespace stargraph
