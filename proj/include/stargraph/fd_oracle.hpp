#pragma once

#include <optional>
#include <vector>

#include <Eigen/Sparse>

#include "stargraph/common.hpp"
#include "stargraph/eps_operator.hpp"
#include "stargraph/limit_operator.hpp"

namespace stargraph {

/// Truncated star graph: a shared vertex unknown plus nodes h, 2h, ..., L on every edge.
class DiscreteStarGraph {
 public:
  /// Throws ConfigError unless L >= 2 and L/h is an integer; GridTooCoarse if h > 1e-2.
  DiscreteStarGraph(int n, double L, double h);

  int edges() const noexcept { return n_; }
  double length() const noexcept { return L_; }
  double step() const noexcept { return h_; }
  int cells() const noexcept { return cells_; }

 private:
  int n_;
  double L_;
  double h_;
  int cells_;
};

enum class OuterBoundary { Dirichlet, Radiation };

/// Second-difference Kirchhoff Laplacian plus the trapezoid-weighted rank-one term.
///
/// In the weighted inner product the operator is  W^{-1} (K + sigma (W v)(W v)^T)  with
/// K the symmetric stiffness matrix, W the trapezoid weights (n h/2 at the vertex), v the
/// potential sampled on the grid, and sigma = lambda(eps)/eps^3.
class DiscreteOperator {
 public:
  DiscreteOperator(const EpsOperator& op, const DiscreteStarGraph& grid, OuterBoundary outer);

  Eigen::Index size() const noexcept { return weights_.size(); }
  /// Unknown index of node m (0 = vertex) on edge j.
  Eigen::Index index(int edge, int node) const;
  double node_x(int node) const noexcept { return node * grid_.step(); }
  int last_node() const noexcept { return last_; }

  const Eigen::SparseMatrix<double>& stiffness() const noexcept { return stiffness_; }
  const VectorXd& weights() const noexcept { return weights_; }
  const VectorXd& potential() const noexcept { return v_; }
  double sigma() const noexcept { return sigma_; }
  const DiscreteStarGraph& grid() const noexcept { return grid_; }

  /// Dense W^{1/2}-symmetrized matrix; small grids only.
  MatrixXd symmetrized_dense() const;

 private:
  DiscreteStarGraph grid_;
  int last_;
  Eigen::SparseMatrix<double> stiffness_;
  VectorXd weights_;
  VectorXd v_;
  double sigma_;
};

/// Samples of a grid function: values[j][m] at x = m h on edge j (m = 0 is the vertex).
struct GridFunction {
  double h = 0.0;
  std::vector<VectorXd> values;
};

/// Negative eigenvalue from steps h, h/2, h/4, Richardson-extrapolated from the two finest.
/// Throws GridTooCoarse unless the difference ratio lies within 4 (1 +- `richardson_tol`).
std::optional<double> oracle_eigenvalue(const EpsOperator& op, double L, double h,
                                        double richardson_tol = 0.25);

/// Eigenvalue at a single step h, no Richardson guard.
std::optional<double> discrete_eigenvalue(const EpsOperator& op, double L, double h);

/// Discrete solve of (H + kappa^2) u = delta_source / weight.
GridFunction discrete_resolvent_column(const EpsOperator& op, double kappa,
                                       const EdgeCoordinate& source, double L, double h);

/// Two-level Romberg combination of discrete_resolvent_column at h, h/2, h/4 on the step-h nodes.
GridFunction oracle_resolvent_column(const EpsOperator& op, double kappa,
                                     const EdgeCoordinate& source, double L, double h);

/// Discrete scattering problem with the radiation closure psi' - ik psi = -2ik delta e^{-ikL}.
SMatrix discrete_smatrix(const EpsOperator& op, double k, double L, double h);

/// Richardson combination (4 S(h/2) - S(h)) / 3 of discrete_smatrix.
SMatrix oracle_smatrix(const EpsOperator& op, double k, double L, double h);

}  // namespace stargraph
