#include "stargraph/fd_oracle.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "stargraph/quadrature.hpp"
#include "stargraph/roots.hpp"

namespace stargraph {

namespace {

/// Adds \int V_j(x/eps) phi_m(x) dx for the hat functions phi_m of edge j into `load`.
void add_load(const EdgeProfile& prof, double eps, double h, int last, int edge,
              const std::function<Eigen::Index(int, int)>& index, VectorXd& load) {
  const GaussLegendre& rule = GaussLegendre::cached(4);
  for (const auto& piece : prof.pieces()) {
    const double from = eps * piece.from;
    const double to = eps * piece.to;
    const int first = static_cast<int>(std::floor(from / h));
    for (int c = std::max(first, 0); c * h < to; ++c) {
      const double lo = std::max(from, c * h);
      const double hi = std::min(to, (c + 1) * h);
      if (hi <= lo) continue;
      const double left = rule.integrate(
          [&](double x) { return piece.poly(x / eps) * ((c + 1) * h - x) / h; }, lo, hi);
      const double right = rule.integrate(
          [&](double x) { return piece.poly(x / eps) * (x - c * h) / h; }, lo, hi);
      if (c <= last) load[index(edge, c)] += left;
      if (c + 1 <= last) load[index(edge, c + 1)] += right;
    }
  }
}

template <typename Scalar>
Eigen::SparseMatrix<Scalar> bordered(const Eigen::SparseMatrix<Scalar>& core, const VectorXd& wv,
                                     double sigma) {
  const Eigen::Index m = core.rows();
  std::vector<Eigen::Triplet<Scalar>> trip;
  trip.reserve(core.nonZeros() + 2 * m + 1);
  for (int col = 0; col < core.outerSize(); ++col)
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(core, col); it; ++it)
      trip.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index r = 0; r < m; ++r) {
    if (wv[r] == 0.0) continue;
    trip.emplace_back(r, m, Scalar(sigma * wv[r]));
    trip.emplace_back(m, r, Scalar(wv[r]));
  }
  trip.emplace_back(m, m, Scalar(-1.0));
  Eigen::SparseMatrix<Scalar> out(m + 1, m + 1);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

}  // namespace

DiscreteStarGraph::DiscreteStarGraph(int n, double L, double h) : n_(n), L_(L), h_(h) {
  if (n < 2) throw ConfigError("star graph needs at least two edges");
  if (!(L >= 2.0)) throw ConfigError("truncation length must be at least 2");
  if (!(h > 0.0)) throw ConfigError("grid step must be positive");
  if (h > 1e-2) {
    std::ostringstream msg;
    msg << "grid step " << h << " exceeds 1e-2";
    throw GridTooCoarse(msg.str());
  }
  const double ratio = L / h;
  cells_ = static_cast<int>(std::lround(ratio));
  if (std::abs(ratio - cells_) > 1e-9 * ratio)
    throw ConfigError("truncation length must be an integer multiple of the grid step");
}

DiscreteOperator::DiscreteOperator(const EpsOperator& op, const DiscreteStarGraph& grid,
                                   OuterBoundary outer)
    : grid_(grid),
      last_(outer == OuterBoundary::Dirichlet ? grid.cells() - 1 : grid.cells()),
      sigma_(op.lambda() / (op.eps() * op.eps() * op.eps())) {
  if (grid.edges() != op.edges()) throw ConfigError("grid and operator disagree on n");
  const int n = grid.edges();
  const double h = grid.step();
  const Eigen::Index size = 1 + static_cast<Eigen::Index>(n) * last_;
  weights_ = VectorXd::Constant(size, h);
  weights_[0] = 0.5 * n * h;
  v_ = VectorXd::Zero(size);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(3 * size);
  const double inv_h = 1.0 / h;
  for (int j = 0; j < n; ++j) {
    // cells [m, m+1] for m = 0 .. cells-1; node `cells` is either Dirichlet or an unknown
    for (int m = 0; m < grid.cells(); ++m) {
      const bool right_known = m + 1 <= last_;
      const Eigen::Index a = index(j, m);
      trip.emplace_back(a, a, inv_h);
      if (right_known) {
        const Eigen::Index b = index(j, m + 1);
        trip.emplace_back(b, b, inv_h);
        trip.emplace_back(a, b, -inv_h);
        trip.emplace_back(b, a, -inv_h);
      }
    }
    if (outer == OuterBoundary::Radiation) weights_[index(j, last_)] = 0.5 * h;
  }
  // v is defined through its weighted form W v = (\int V_eps phi_m)_m, exact for polynomial pieces
  VectorXd load = VectorXd::Zero(size);
  const auto idx = [this](int edge, int node) { return index(edge, node); };
  for (int j = 0; j < n; ++j) add_load(op.potential().profile(j), op.eps(), h, last_, j, idx, load);
  v_ = load.cwiseQuotient(weights_);
  stiffness_.resize(size, size);
  stiffness_.setFromTriplets(trip.begin(), trip.end());
}

Eigen::Index DiscreteOperator::index(int edge, int node) const {
  if (node == 0) return 0;
  return 1 + static_cast<Eigen::Index>(edge) * last_ + (node - 1);
}

MatrixXd DiscreteOperator::symmetrized_dense() const {
  const VectorXd root = weights_.cwiseSqrt();
  const VectorXd wv = weights_.cwiseProduct(v_);
  const MatrixXd k = MatrixXd(stiffness_) + sigma_ * wv * wv.transpose();
  return root.cwiseInverse().asDiagonal() * k * root.cwiseInverse().asDiagonal();
}

std::optional<double> discrete_eigenvalue(const EpsOperator& op, double L, double h) {
  const DiscreteStarGraph grid(op.edges(), L, h);
  const DiscreteOperator disc(op, grid, OuterBoundary::Dirichlet);
  const double sigma = disc.sigma();
  if (!(sigma < 0.0)) return std::nullopt;
  const VectorXd wv = disc.weights().cwiseProduct(disc.potential());
  const Eigen::SparseMatrix<double> mass = [&] {
    Eigen::SparseMatrix<double> w(disc.size(), disc.size());
    w.reserve(Eigen::VectorXi::Constant(disc.size(), 1));
    for (Eigen::Index r = 0; r < disc.size(); ++r) w.insert(r, r) = disc.weights()[r];
    return w;
  }();

  // negative eigenvalues mu solve 1 + sigma (Wv)^T (K - mu W)^{-1} (Wv) = 0
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.analyzePattern(disc.stiffness());
  auto secular = [&](double mu) {
    const Eigen::SparseMatrix<double> shifted = disc.stiffness() - mu * mass;
    solver.factorize(shifted);
    if (solver.info() != Eigen::Success) throw SingularSystem("discrete K - mu W factorization failed");
    return 1.0 + sigma * wv.dot(solver.solve(wv));
  };
  if (secular(0.0) >= 0.0) return std::nullopt;
  double lo = -1.0;
  int expand = 0;
  while (secular(lo) < 0.0) {
    lo *= 4.0;
    if (++expand > 60) throw SingularSystem("could not bracket the discrete eigenvalue");
  }
  const auto root = brent_root(secular, lo, 0.0, 1e-14 * std::abs(lo));
  if (!root) return std::nullopt;
  return *root;
}

std::optional<double> oracle_eigenvalue(const EpsOperator& op, double L, double h,
                                        double richardson_tol) {
  const auto e1 = discrete_eigenvalue(op, L, h);
  const auto e2 = discrete_eigenvalue(op, L, 0.5 * h);
  const auto e4 = discrete_eigenvalue(op, L, 0.25 * h);
  if (e1.has_value() != e2.has_value() || e2.has_value() != e4.has_value())
    throw GridTooCoarse("bound state appears on only some of h, h/2, h/4");
  if (!e1) return std::nullopt;
  const double d1 = *e1 - *e2;
  const double d2 = *e2 - *e4;
  // differences at rounding level carry no convergence information
  if (std::abs(d1) > 1e-10 * std::abs(*e4)) {
    const double ratio = d1 / d2;
    if (!(std::abs(ratio - 4.0) <= 4.0 * richardson_tol)) {
      std::ostringstream msg;
      msg << "Richardson ratio " << ratio << " at h = " << h << " is not second order";
      throw GridTooCoarse(msg.str());
    }
  }
  return *e4 - d2 / 3.0;
}

GridFunction discrete_resolvent_column(const EpsOperator& op, double kappa,
                                       const EdgeCoordinate& source, double L, double h) {
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  const DiscreteStarGraph grid(op.edges(), L, h);
  const DiscreteOperator disc(op, grid, OuterBoundary::Dirichlet);
  if (source.edge < 0 || source.edge >= op.edges() || source.x < 0.0 || source.x >= L)
    throw ConfigError("source outside the truncated graph");

  Eigen::SparseMatrix<double> core = disc.stiffness();
  for (Eigen::Index r = 0; r < disc.size(); ++r) core.coeffRef(r, r) += kappa * kappa * disc.weights()[r];
  const VectorXd wv = disc.weights().cwiseProduct(disc.potential());
  const Eigen::SparseMatrix<double> system = bordered(core, wv, disc.sigma());

  // delta at the source, split linearly between the neighbouring nodes
  VectorXd rhs = VectorXd::Zero(system.rows());
  const double pos = source.x / h;
  const int m = static_cast<int>(std::floor(pos));
  const double frac = pos - m;
  rhs[disc.index(source.edge, m)] += 1.0 - frac;
  if (frac > 0.0 && m + 1 <= disc.last_node()) rhs[disc.index(source.edge, m + 1)] += frac;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) throw SingularSystem("resolvent system is singular");
  const VectorXd sol = lu.solve(rhs);

  GridFunction out{h, {}};
  for (int j = 0; j < op.edges(); ++j) {
    VectorXd col = VectorXd::Zero(grid.cells() + 1);
    for (int node = 0; node <= disc.last_node(); ++node) col[node] = sol[disc.index(j, node)];
    out.values.push_back(std::move(col));
  }
  return out;
}

GridFunction oracle_resolvent_column(const EpsOperator& op, double kappa,
                                     const EdgeCoordinate& source, double L, double h) {
  GridFunction out = discrete_resolvent_column(op, kappa, source, L, h);
  const GridFunction half = discrete_resolvent_column(op, kappa, source, L, 0.5 * h);
  const GridFunction quarter = discrete_resolvent_column(op, kappa, source, L, 0.25 * h);
  for (std::size_t j = 0; j < out.values.size(); ++j) {
    for (Eigen::Index m = 0; m < out.values[j].size(); ++m) {
      const double r1 = (4.0 * half.values[j][2 * m] - out.values[j][m]) / 3.0;
      const double r2 = (4.0 * quarter.values[j][4 * m] - half.values[j][2 * m]) / 3.0;
      out.values[j][m] = (16.0 * r2 - r1) / 15.0;
    }
  }
  return out;
}

SMatrix discrete_smatrix(const EpsOperator& op, double k, double L, double h) {
  if (!(k > 0.0)) throw ConfigError("scattering momentum must be positive");
  const DiscreteStarGraph grid(op.edges(), L, h);
  const DiscreteOperator disc(op, grid, OuterBoundary::Radiation);
  const int n = op.edges();

  Eigen::SparseMatrix<cdouble> core = disc.stiffness().cast<cdouble>();
  for (Eigen::Index r = 0; r < disc.size(); ++r) core.coeffRef(r, r) -= k * k * disc.weights()[r];
  for (int j = 0; j < n; ++j) core.coeffRef(disc.index(j, disc.last_node()), disc.index(j, disc.last_node())) -= I * k;
  const VectorXd wv = disc.weights().cwiseProduct(disc.potential());
  const Eigen::SparseMatrix<cdouble> system = bordered(core, wv, disc.sigma());

  Eigen::SparseLU<Eigen::SparseMatrix<cdouble>> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) throw SingularSystem("scattering system is singular");

  const cdouble incoming = std::exp(-I * k * L);
  SMatrix s{k, MatrixXcd(n, n)};
  for (int i = 0; i < n; ++i) {
    VectorXcd rhs = VectorXcd::Zero(system.rows());
    rhs[disc.index(i, disc.last_node())] = -2.0 * I * k * incoming;
    const VectorXcd sol = lu.solve(rhs);
    for (int j = 0; j < n; ++j) {
      const cdouble psi_L = sol[disc.index(j, disc.last_node())];
      s.entries(j, i) = (psi_L - (i == j ? incoming : 0.0)) * incoming;
    }
  }
  return s;
}

SMatrix oracle_smatrix(const EpsOperator& op, double k, double L, double h) {
  const SMatrix coarse = discrete_smatrix(op, k, L, h);
  const SMatrix fine = discrete_smatrix(op, k, L, 0.5 * h);
  return SMatrix{k, (4.0 * fine.entries - coarse.entries) / 3.0};
}

}  // namespace stargraph
