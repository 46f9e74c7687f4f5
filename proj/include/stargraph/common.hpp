#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace stargraph {

using cdouble = std::complex<double>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using MatrixXcd = Matrix<cdouble>;
using VectorXd = Vector<double>;
using VectorXcd = Vector<cdouble>;

inline constexpr cdouble I{0.0, 1.0};

/// Tolerances used across the library. Constants are closed-form, so these are tight.
namespace tol {
inline constexpr double theta_tie = 1e-9;
inline constexpr double mean = 1e-12;
inline constexpr double selfadjoint = 1e-10;
inline constexpr double rank = 1e-10;
inline constexpr double pole = 1e-12;
inline constexpr double root = 1e-10;
inline constexpr double kappa_floor = 1e-6;
inline constexpr double quadrature = 1e-10;
inline constexpr double fredholm = 1e-12;
inline constexpr double zero_b = 1e-14;
}  // namespace tol

/// Broad failure class; the CLI maps it onto exit codes.
enum class ErrorKind { Validation, Numerical, Tolerance };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), kind_(kind), name_(std::move(name)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

 private:
  ErrorKind kind_;
  std::string name_;
};

#define STARGRAPH_DEFINE_ERROR(Name, Kind)                              \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(Kind, #Name, what) {} \
  };

STARGRAPH_DEFINE_ERROR(ConfigError, ErrorKind::Validation)
STARGRAPH_DEFINE_ERROR(MeanViolation, ErrorKind::Validation)
STARGRAPH_DEFINE_ERROR(SupportViolation, ErrorKind::Validation)
STARGRAPH_DEFINE_ERROR(ResonantWithZeroA, ErrorKind::Validation)
STARGRAPH_DEFINE_ERROR(DegenerateTheta, ErrorKind::Validation)
STARGRAPH_DEFINE_ERROR(ZeroB, ErrorKind::Validation)
STARGRAPH_DEFINE_ERROR(AtPole, ErrorKind::Numerical)
STARGRAPH_DEFINE_ERROR(SingularSystem, ErrorKind::Numerical)
STARGRAPH_DEFINE_ERROR(QuadratureNotConverged, ErrorKind::Numerical)
STARGRAPH_DEFINE_ERROR(MultipleSignChanges, ErrorKind::Numerical)
STARGRAPH_DEFINE_ERROR(FredholmSingular, ErrorKind::Numerical)
STARGRAPH_DEFINE_ERROR(GridTooCoarse, ErrorKind::Tolerance)

#undef STARGRAPH_DEFINE_ERROR

/// e^z - 1 without cancellation for small |z|.
inline cdouble expm1(cdouble z) {
  const double a = z.real();
  const double b = z.imag();
  const double half_sin = std::sin(0.5 * b);
  const double re = std::expm1(a) * std::cos(b) - 2.0 * half_sin * half_sin;
  const double im = std::exp(a) * std::sin(b);
  return {re, im};
}

}  // namespace stargraph
