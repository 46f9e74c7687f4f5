#include "stargraph/eps_operator.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "stargraph/free_resolvent.hpp"
#include "stargraph/roots.hpp"

namespace stargraph {

namespace {

constexpr int kPoleSamples = 64;
constexpr int kMaxTruncationSteps = 64;
constexpr double kScanUpper = 10.0;

void require_kappa(double kappa) {
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
}

/// h(-kappa eps) with the order-doubling guard.
double scaled_form(const EpsOperator& op, double kappa, const GaussLegendre& rule) {
  const double s = -kappa * op.eps();
  return with_order_doubling(
      rule, [&](const GaussLegendre& r) { return free_form_scaled(op.potential(), s, r); },
      "inner_RV_V");
}

}  // namespace

EpsOperator::EpsOperator(StarPotential V, ScalingFunction lam, double eps)
    : V_(std::move(V)), lam_(std::move(lam)), eps_(eps) {
  if (!(eps_ > 0.0 && eps_ <= 1.0)) throw ConfigError("eps must lie in (0, 1]");
  if (lam_(eps_) == 0.0) throw ConfigError("lambda(eps) vanishes");
}

double inner_RV_V(double kappa, const EpsOperator& op, const GaussLegendre& rule) {
  require_kappa(kappa);
  const double e = op.eps();
  return e * e * e * scaled_form(op, kappa, rule);
}

double pole_function(const EpsOperator& op, double kappa, const GaussLegendre& rule) {
  require_kappa(kappa);
  return 1.0 / op.lambda() + scaled_form(op, kappa, rule);
}

double zeta(const EpsOperator& op, double kappa, const GaussLegendre& rule) {
  // the denominator's natural size is eps^3; work with it divided out
  const double scaled = pole_function(op, kappa, rule);
  if (std::abs(scaled) <= tol::pole) {
    std::ostringstream msg;
    msg << "zeta denominator vanishes at kappa = " << kappa << ", eps = " << op.eps();
    throw AtPole(msg.str());
  }
  const double e = op.eps();
  return 1.0 / (e * e * e * scaled);
}

double applied_free_resolvent(const EpsOperator& op, double kappa, const EdgeCoordinate& p,
                              const GaussLegendre& rule) {
  require_kappa(kappa);
  const double e = op.eps();
  const double s = -kappa * e;
  const double r = p.x / e;
  const double g = with_order_doubling(
      rule,
      [&](const GaussLegendre& rr) { return applied_free_scaled(op.potential(), p.edge, r, s, rr); },
      "applied_free_resolvent", tol::quadrature, 1e-300);
  return e * e * g;
}

KernelEvaluator resolvent_eps_kernel(const EpsOperator& op, double kappa,
                                     const GaussLegendre& rule) {
  const double z = zeta(op, kappa, rule);
  const Momentum k = Momentum::imaginary(kappa);
  const int n = op.edges();
  return KernelEvaluator(
      OperatorKind::Epsilon, k, [op, kappa, z, k, n, rule](const EdgeCoordinate& p, const EdgeCoordinate& q) {
        const double fp = applied_free_resolvent(op, kappa, p, rule);
        const double fq = applied_free_resolvent(op, kappa, q, rule);
        return free_green(k, p, q, n) - z * fp * fq;
      });
}

std::optional<PoleResult> find_pole(const EpsOperator& op, std::pair<double, double> bracket,
                                    const GaussLegendre& rule) {
  auto [lo, hi] = bracket;
  if (!(lo > 0.0 && hi > lo)) throw ConfigError("pole bracket must satisfy 0 < lo < hi");

  std::vector<double> grid(kPoleSamples + 1);
  std::vector<double> vals(kPoleSamples + 1);
  for (int s = 0; s <= kPoleSamples; ++s) {
    grid[s] = lo + (hi - lo) * s / kPoleSamples;
    vals[s] = pole_function(op, grid[s], rule);
  }
  int changes = 0;
  int where = -1;
  for (int s = 0; s < kPoleSamples; ++s) {
    if ((vals[s] > 0.0) != (vals[s + 1] > 0.0) || vals[s] == 0.0) {
      ++changes;
      where = s;
    }
  }
  if (changes == 0) return std::nullopt;
  if (changes > 1) {
    std::ostringstream msg;
    msg << changes << " sign changes of the pole equation in [" << lo << ", " << hi << "]";
    throw MultipleSignChanges(msg.str());
  }
  const auto root = brent_root([&](double kap) { return pole_function(op, kap, rule); },
                               grid[where], grid[where + 1]);
  if (!root) return std::nullopt;
  const double residual = pole_function(op, *root, rule);
  if (std::abs(residual) > tol::root) {
    std::ostringstream msg;
    msg << "pole residual " << residual << " exceeds tolerance";
    throw QuadratureNotConverged(msg.str());
  }
  return PoleResult{*root, -(*root) * (*root), residual};
}

double pole_asymptotic(const EpsOperator& op, const CouplingConstants& cc) {
  if (std::abs(cc.B) <= tol::zero_b) throw ZeroB("pole predictor needs B != 0");
  const ScalingFunction& lam = op.scaling();
  const double detuning = lam.is_resonant() ? 0.0 : cc.A - 1.0 / lam.lambda0();
  return (detuning / op.eps() + lam.lambda1() / (lam.lambda0() * lam.lambda0())) / cc.B;
}

std::pair<double, double> default_pole_bracket(const EpsOperator& op,
                                               const CouplingConstants& cc) {
  if (std::abs(cc.B) > tol::zero_b) {
    const double p = pole_asymptotic(op, cc);
    if (p > 0.0) return {std::max(tol::kappa_floor, 0.5 * p), 2.0 * p + 1.0};
  }
  return {tol::kappa_floor, kScanUpper};
}

std::optional<PoleResult> find_pole(const EpsOperator& op, const CouplingConstants& cc,
                                    const GaussLegendre& rule) {
  const auto bracket = default_pole_bracket(op, cc);
  if (auto pole = find_pole(op, bracket, rule)) return pole;
  const std::pair<double, double> scan{tol::kappa_floor, kScanUpper};
  if (bracket == scan) return std::nullopt;
  return find_pole(op, scan, rule);
}

HsDistance hs_distance(const EpsOperator& op, const CouplingConstants& cc, double kappa,
                       const GaussLegendre& rule, double tail_target) {
  require_kappa(kappa);
  const int n = op.edges();
  const double e = op.eps();
  const double z = zeta(op, kappa, rule);
  const MatrixXd lambda = lambda_matrix(Momentum::imaginary(kappa), cc).real();

  struct Sums {
    double inside;
    double exterior;
    double tail;
  };
  auto compute = [&](const GaussLegendre& r, double L) {
    // panels: scaled potential breakpoints on [0, eps], then steps of at most min(1/2, 1/kappa)
    std::vector<double> cuts;
    for (double b : op.potential().breakpoints()) cuts.push_back(e * b);
    const double width = std::min(0.5, 1.0 / kappa);
    const int tail_panels = static_cast<int>(std::ceil((L - e) / width));
    for (int p = 1; p <= tail_panels; ++p) cuts.push_back(e + (L - e) * p / tail_panels);

    std::vector<double> x;
    std::vector<double> w;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double len = cuts[c + 1] - cuts[c];
      for (int q = 0; q < r.order(); ++q) {
        x.push_back(cuts[c] + len * r.nodes()[q]);
        w.push_back(len * r.weights()[q]);
      }
    }
    const Eigen::Index m = static_cast<Eigen::Index>(x.size());
    const Eigen::Map<const VectorXd> xs(x.data(), m);
    const Eigen::Map<const VectorXd> ws(w.data(), m);
    const VectorXd outer_ws = (xs.array() >= e).select(ws, 0.0);
    MatrixXd f(m, n);
    VectorXd far(n);
    for (int i = 0; i < n; ++i) {
      for (Eigen::Index a = 0; a < m; ++a)
        f(a, i) = e * e * applied_free_scaled(op.potential(), i, xs[a] / e, -kappa * e, r);
      // beyond the support f_i(x) = far_i e^{-kappa x} exactly
      far[i] = e * e * applied_free_scaled(op.potential(), i, L / e, -kappa * e, r) *
               std::exp(kappa * L);
    }
    const VectorXd decay = (-kappa * xs).array().exp();
    Sums sums{0.0, 0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        // difference kernel: -zeta f_i(x) f_j(y) - Lambda_ij e^{-kappa(x+y)}
        const MatrixXd sq = (-z * f.col(i) * f.col(j).transpose() -
                             lambda(i, j) * decay * decay.transpose())
                                .array()
                                .square()
                                .matrix();
        sums.inside += ws.dot(sq * ws);
        sums.exterior += outer_ws.dot(sq * outer_ws);
        // for x > L the kernel is e^{-kappa x} h_ij(y)
        const VectorXd h = -z * far[i] * f.col(j) - lambda(i, j) * decay;
        const double c = -z * far[i] * far[j] - lambda(i, j);
        const double h_norm =
            ws.dot(h.array().square().matrix()) + c * c * std::exp(-2.0 * kappa * L) / (2.0 * kappa);
        sums.tail += 2.0 * std::exp(-2.0 * kappa * L) / (2.0 * kappa) * h_norm;
      }
    }
    return sums;
  };

  double L = 1.0 + 8.0 / kappa;
  Sums coarse = compute(rule, L);
  for (int grow = 0; coarse.tail > tail_target && grow < kMaxTruncationSteps; ++grow) {
    L += 1.0 / kappa;
    coarse = compute(rule, L);
  }
  const Sums fine = compute(GaussLegendre::cached(2 * rule.order()), L);
  if (std::abs(fine.inside - coarse.inside) > tol::quadrature * std::max(fine.inside, 1e-300) &&
      std::abs(fine.inside - coarse.inside) > 1e-24) {
    std::ostringstream msg;
    msg << "HS quadrature changed by " << std::abs(fine.inside - coarse.inside)
        << " under order doubling (eps = " << e << ", kappa = " << kappa << ")";
    throw QuadratureNotConverged(msg.str());
  }
  return HsDistance{std::sqrt(fine.inside), std::sqrt(fine.exterior), fine.tail, L};
}

}  // namespace stargraph
