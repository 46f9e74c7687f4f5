#include "stargraph/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stargraph {

namespace {

constexpr int kMaxDegree = 3;

bool nearly(double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(a)); }

}  // namespace

Polynomial Polynomial::antiderivative() const {
  VectorXd out = VectorXd::Zero(c_.size() + 1);
  for (Eigen::Index d = 0; d < c_.size(); ++d) out[d + 1] = c_[d] / static_cast<double>(d + 1);
  return Polynomial(std::move(out));
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
  if (c_.size() == 0 || other.c_.size() == 0) return Polynomial();
  VectorXd out = VectorXd::Zero(c_.size() + other.c_.size() - 1);
  for (Eigen::Index i = 0; i < c_.size(); ++i)
    for (Eigen::Index j = 0; j < other.c_.size(); ++j) out[i + j] += c_[i] * other.c_[j];
  return Polynomial(std::move(out));
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  VectorXd out = VectorXd::Zero(std::max(c_.size(), other.c_.size()));
  out.head(c_.size()) += c_;
  out.head(other.c_.size()) += other.c_;
  return Polynomial(std::move(out));
}

Polynomial Polynomial::shifted_up() const {
  VectorXd out = VectorXd::Zero(c_.size() + 1);
  out.tail(c_.size()) = c_;
  return Polynomial(std::move(out));
}

double Polynomial::integral(double a, double b) const {
  const Polynomial prim = antiderivative();
  return prim(b) - prim(a);
}

EdgeProfile::EdgeProfile(std::vector<PolynomialPiece> pieces) : pieces_(std::move(pieces)) {
  std::sort(pieces_.begin(), pieces_.end(),
            [](const PolynomialPiece& l, const PolynomialPiece& r) { return l.from < r.from; });
  for (std::size_t p = 0; p < pieces_.size(); ++p) {
    const auto& piece = pieces_[p];
    if (!(piece.from < piece.to))
      throw ConfigError("piece breakpoints must be strictly increasing");
    if (piece.poly.degree() > kMaxDegree)
      throw ConfigError("piece degree exceeds 3");
    if (p > 0 && pieces_[p - 1].to > piece.from && !nearly(pieces_[p - 1].to, piece.from))
      throw ConfigError("pieces overlap");
  }
}

double EdgeProfile::operator()(double x) const noexcept {
  double left = 0.0;
  double right = 0.0;
  bool at_break = false;
  for (const auto& piece : pieces_) {
    if (x > piece.from && x < piece.to) return piece.poly(x);
    if (x == piece.from) {
      right = piece.poly(x);
      at_break = true;
    }
    if (x == piece.to) {
      left = piece.poly(x);
      at_break = true;
    }
  }
  return at_break ? 0.5 * (left + right) : 0.0;
}

double EdgeProfile::moment(int power) const {
  double sum = 0.0;
  for (const auto& piece : pieces_) {
    Polynomial p = piece.poly;
    for (int k = 0; k < power; ++k) p = p.shifted_up();
    sum += p.integral(piece.from, piece.to);
  }
  return sum;
}

std::vector<double> EdgeProfile::breakpoints() const {
  std::vector<double> out;
  for (const auto& piece : pieces_) {
    out.push_back(piece.from);
    out.push_back(piece.to);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

StarPotential::StarPotential(std::vector<EdgeProfile> profiles) : profiles_(std::move(profiles)) {
  if (profiles_.size() < 2) throw ConfigError("star graph needs at least two edges");
}

double StarPotential::total_mean() const {
  double sum = 0.0;
  for (const auto& prof : profiles_) sum += prof.moment(0);
  return sum;
}

std::vector<double> StarPotential::breakpoints() const {
  std::vector<double> out{0.0, 1.0};
  for (const auto& prof : profiles_) {
    const auto b = prof.breakpoints();
    out.insert(out.end(), b.begin(), b.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool StarPotential::is_zero() const noexcept {
  for (const auto& prof : profiles_)
    for (const auto& piece : prof.pieces())
      if (piece.poly.coeffs().size() > 0 && !piece.poly.coeffs().isZero(0.0)) return false;
  return true;
}

EdgeProfile constant_profile(double value, double from, double to) {
  return EdgeProfile({PolynomialPiece{from, to, Polynomial(VectorXd::Constant(1, value))}});
}

void validate_potential(const StarPotential& V) {
  for (int i = 0; i < V.edges(); ++i) {
    for (const auto& piece : V.profile(i).pieces()) {
      if (piece.from < 0.0 || piece.to > 1.0) {
        std::ostringstream msg;
        msg << "edge " << i << " piece [" << piece.from << ", " << piece.to
            << "] leaves [0, 1]";
        throw SupportViolation(msg.str());
      }
    }
  }
  const double mean = V.total_mean();
  if (std::abs(mean) > tol::mean) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "sum of edge integrals is " << mean << ", residual " << std::abs(mean);
    throw MeanViolation(msg.str());
  }
}

VectorXd moments_theta(const StarPotential& V) {
  VectorXd theta(V.edges());
  for (int i = 0; i < V.edges(); ++i) theta[i] = V.profile(i).moment(1);
  return theta;
}

double constant_A(const StarPotential& V) {
  // min(x,y) = \int_0^\infty 1[t<x] 1[t<y] dt, so the edge double integral equals
  // \int_0^1 T(t)^2 dt with the tail T(t) = \int_t^1 V.
  double sum = 0.0;
  for (const auto& prof : V.profiles()) {
    const auto& pieces = prof.pieces();
    if (pieces.empty()) continue;
    std::vector<double> tail_after(pieces.size() + 1, 0.0);
    for (std::size_t p = pieces.size(); p-- > 0;)
      tail_after[p] = tail_after[p + 1] + pieces[p].poly.integral(pieces[p].from, pieces[p].to);

    double lo = std::min(0.0, pieces.front().from);
    for (std::size_t p = 0; p < pieces.size(); ++p) {
      // gap before the piece: T is constant
      const double gap = pieces[p].from - lo;
      if (gap > 0.0) sum += gap * tail_after[p] * tail_after[p];
      // on the piece: T(t) = P(to) - P(t) + tail_after[p+1]
      const Polynomial prim = pieces[p].poly.antiderivative();
      const double c0 = prim(pieces[p].to) + tail_after[p + 1];
      const Polynomial tail = prim * -1.0 + Polynomial(VectorXd::Constant(1, c0));
      sum += (tail * tail).integral(pieces[p].from, pieces[p].to);
      lo = pieces[p].to;
    }
  }
  return -sum;
}

}  // namespace stargraph
