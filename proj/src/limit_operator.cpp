#include "stargraph/limit_operator.hpp"

#include <cmath>
#include <sstream>

namespace stargraph {

namespace {

cdouble krein_denominator(const Momentum& k, const CouplingConstants& cc) {
  const cdouble den = 1.0 + I * k.k() * cc.beta * cc.B;
  if (std::abs(den) <= tol::pole) {
    std::ostringstream msg;
    msg << "1 + ik beta B vanishes at k = " << k.k();
    throw AtPole(msg.str());
  }
  return den;
}

MatrixXcd solve_dense(const MatrixXcd& lhs, const MatrixXcd& rhs) {
  const Eigen::PartialPivLU<MatrixXcd> lu(lhs);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream msg;
    msg << "A + ikB is singular (rcond " << rcond << ")";
    throw SingularSystem(msg.str());
  }
  return lu.solve(rhs);
}

}  // namespace

Momentum Momentum::resolvent(cdouble k) {
  if (!(k.imag() > 0.0)) throw ConfigError("resolvent momentum needs Im k > 0");
  return Momentum(k, Regime::Resolvent);
}

Momentum Momentum::imaginary(double kappa) {
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  return Momentum(cdouble(0.0, kappa), Regime::Resolvent);
}

Momentum Momentum::scattering(double k) {
  if (!(k > 0.0)) throw ConfigError("scattering momentum must be positive");
  return Momentum(cdouble(k, 0.0), Regime::Scattering);
}

MatrixXcd kirchhoff_smatrix(int n) {
  return MatrixXcd::Constant(n, n, 2.0 / n) - MatrixXcd::Identity(n, n);
}

cdouble free_green(const Momentum& k, const EdgeCoordinate& p, const EdgeCoordinate& q, int n) {
  const cdouble kk = k.k();
  const double delta = p.edge == q.edge ? 1.0 : 0.0;
  return I / (2.0 * kk) *
         (delta * std::exp(I * kk * std::abs(p.x - q.x)) +
          (2.0 / n - delta) * std::exp(I * kk * (p.x + q.x)));
}

cdouble free_green_dx(const Momentum& k, const EdgeCoordinate& p, const EdgeCoordinate& q, int n) {
  const cdouble kk = k.k();
  const double delta = p.edge == q.edge ? 1.0 : 0.0;
  const double sign = p.x > q.x ? 1.0 : -1.0;
  return -0.5 * (delta * sign * std::exp(I * kk * std::abs(p.x - q.x)) +
                 (2.0 / n - delta) * std::exp(I * kk * (p.x + q.x)));
}

MatrixXcd lambda_matrix(const Momentum& k, const CouplingConstants& cc) {
  if (cc.beta == 0.0) return MatrixXcd::Zero(cc.edges(), cc.edges());
  return cc.Pi.cast<cdouble>() * (cc.beta / krein_denominator(k, cc));
}

MatrixXcd lambda_matrix_direct(const Momentum& k, const BoundaryPair& bp, int n) {
  const cdouble kk = k.k();
  const MatrixXcd lhs = bp.Amat.cast<cdouble>() + I * kk * bp.Bmat.cast<cdouble>();
  const MatrixXcd tilde = -solve_dense(lhs, bp.Bmat.cast<cdouble>());
  return tilde - MatrixXcd::Constant(n, n, I / (kk * static_cast<double>(n)));
}

KernelEvaluator resolvent_kernel_limit(const CouplingConstants& cc, const Momentum& k) {
  if (k.regime() != Momentum::Regime::Resolvent)
    throw ConfigError("resolvent kernel needs Im k > 0");
  const int n = cc.edges();
  const MatrixXcd lambda = lambda_matrix(k, cc);
  return KernelEvaluator(OperatorKind::Limit, k,
                         [n, lambda, k](const EdgeCoordinate& p, const EdgeCoordinate& q) {
                           return free_green(k, p, q, n) +
                                  lambda(p.edge, q.edge) * std::exp(I * k.k() * (p.x + q.x));
                         });
}

cdouble limit_kernel_dx(const CouplingConstants& cc, const Momentum& k, const EdgeCoordinate& p,
                        const EdgeCoordinate& q) {
  const MatrixXcd lambda = lambda_matrix(k, cc);
  return free_green_dx(k, p, q, cc.edges()) +
         I * k.k() * lambda(p.edge, q.edge) * std::exp(I * k.k() * (p.x + q.x));
}

std::optional<double> limit_point_spectrum(const CouplingConstants& cc) {
  if (!(cc.beta < 0.0)) return std::nullopt;
  if (std::abs(cc.B) <= tol::zero_b) throw ZeroB("beta != 0 requires B != 0");
  return -1.0 / (cc.beta * cc.beta * cc.B * cc.B);
}

std::optional<LimitPole> limit_pole(const CouplingConstants& cc) {
  if (cc.beta == 0.0) return std::nullopt;
  if (std::abs(cc.B) <= tol::zero_b) throw ZeroB("beta != 0 requires B != 0");
  const double kappa = 1.0 / (cc.beta * cc.B);
  return LimitPole{kappa, kappa > 0.0 ? PoleKind::Bound : PoleKind::Antibound};
}

SMatrix smatrix_limit(double k, const CouplingConstants& cc) {
  const Momentum mom = Momentum::scattering(k);
  const int n = cc.edges();
  SMatrix s{k, kirchhoff_smatrix(n)};
  if (cc.beta != 0.0)
    s.entries -= cc.Pi.cast<cdouble>() * (2.0 * I * k * cc.beta / krein_denominator(mom, cc));
  return s;
}

SMatrix smatrix_direct(double k, const BoundaryPair& bp) {
  if (!(k > 0.0)) throw ConfigError("scattering momentum must be positive");
  const MatrixXcd a = bp.Amat.cast<cdouble>();
  const MatrixXcd b = bp.Bmat.cast<cdouble>();
  return SMatrix{k, -solve_dense(a + I * k * b, a - I * k * b)};
}

}  // namespace stargraph
