#include "stargraph/lab.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "stargraph/eps_operator.hpp"
#include "stargraph/eps_scattering.hpp"
#include "stargraph/fd_oracle.hpp"
#include "stargraph/limit_operator.hpp"

namespace stargraph::lab {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + " must be finite");
  return v;
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + " must be an integer");
  return j.get<int>();
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

EdgeProfile parse_edge(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of pieces");
  std::vector<PolynomialPiece> pieces;
  for (std::size_t p = 0; p < j.size(); ++p) {
    const std::string at = where + "[" + std::to_string(p) + "]";
    require_keys(j[p], at, {"from", "to", "coeffs"});
    if (!j[p].contains("from") || !j[p].contains("to") || !j[p].contains("coeffs"))
      throw ConfigError(at + " needs from, to and coeffs");
    const std::vector<double> c = number_list(j[p]["coeffs"], at + ".coeffs");
    if (c.empty()) throw ConfigError(at + ".coeffs must not be empty");
    pieces.push_back({number(j[p]["from"], at + ".from"), number(j[p]["to"], at + ".to"),
                      Polynomial(Eigen::Map<const VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())))});
  }
  return EdgeProfile(std::move(pieces));
}

ScalingSpec parse_scaling(const json& j) {
  require_keys(j, "scaling", {"resonant", "lambda0", "lambda1", "higher"});
  ScalingSpec s;
  if (!j.contains("resonant") || !j["resonant"].is_boolean())
    throw ConfigError("scaling.resonant must be a boolean");
  s.resonant = j["resonant"].get<bool>();
  if (!j.contains("lambda1")) throw ConfigError("scaling.lambda1 is required");
  s.lambda1 = number(j["lambda1"], "scaling.lambda1");
  if (s.resonant) {
    if (j.contains("lambda0")) throw ConfigError("scaling.lambda0 is fixed to 1/A when resonant");
  } else {
    if (!j.contains("lambda0")) throw ConfigError("scaling.lambda0 is required when not resonant");
    s.lambda0 = number(j["lambda0"], "scaling.lambda0");
  }
  if (j.contains("higher")) s.higher = number_list(j["higher"], "scaling.higher");
  return s;
}

void parse_oracle(const json& j, OracleSpec& o) {
  require_keys(j, "oracle",
               {"L", "h", "scattering_L", "epsilon", "scattering_epsilon", "k", "column_kappa", "source"});
  if (j.contains("L")) o.L = number(j["L"], "oracle.L");
  if (j.contains("h")) o.h = number(j["h"], "oracle.h");
  if (j.contains("scattering_L")) o.scattering_L = number(j["scattering_L"], "oracle.scattering_L");
  if (j.contains("epsilon")) o.epsilon = number(j["epsilon"], "oracle.epsilon");
  if (j.contains("scattering_epsilon"))
    o.scattering_epsilon = number(j["scattering_epsilon"], "oracle.scattering_epsilon");
  if (j.contains("k")) o.k = number(j["k"], "oracle.k");
  if (j.contains("column_kappa")) o.column_kappa = number(j["column_kappa"], "oracle.column_kappa");
  if (j.contains("source")) {
    require_keys(j["source"], "oracle.source", {"edge", "x"});
    if (!j["source"].contains("edge") || !j["source"].contains("x"))
      throw ConfigError("oracle.source needs edge and x");
    o.source = {integer(j["source"]["edge"], "oracle.source.edge"),
                number(j["source"]["x"], "oracle.source.x")};
  }
  for (double eps : {o.epsilon, o.scattering_epsilon})
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("oracle epsilons must lie in (0, 1]");
  if (!(o.k > 0.0)) throw ConfigError("oracle.k must be positive");
  if (!(o.column_kappa > 0.0)) throw ConfigError("oracle.column_kappa must be positive");
}

void parse_tolerances(const json& j, Tolerances& t) {
  require_keys(j, "tolerances", {"eigenvalue", "smatrix", "column", "column_eps", "richardson"});
  auto read = [&](const char* key, double& slot) {
    if (!j.contains(key)) return;
    slot = number(j[key], std::string("tolerances.") + key);
    if (!(slot > 0.0)) throw ConfigError(std::string("tolerances.") + key + " must be positive");
  };
  read("eigenvalue", t.eigenvalue);
  read("smatrix", t.smatrix);
  read("column", t.column);
  read("column_eps", t.column_eps);
  read("richardson", t.richardson);
}

json piece_json(double from, double to, std::vector<double> coeffs) {
  return json{{"from", from}, {"to", to}, {"coeffs", std::move(coeffs)}};
}

/// Runs fn(0..count-1) on up to `threads` workers; results keep index order and the first
/// exception by index is rethrown.
template <typename R, typename F>
std::vector<R> ordered_map(std::size_t count, int threads, F&& fn) {
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<R> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

using Cell = std::optional<double>;

std::vector<std::string> measurement(const std::string& quantity, Cell eps, Cell k, Cell kappa,
                                     Cell value, Cell error, Cell tail = std::nullopt) {
  return {quantity,         format_number(eps),   format_number(k),   format_number(kappa),
          format_number(value), format_number(error), format_number(tail)};
}

const std::vector<std::string> kMeasurementHeader = {"quantity", "epsilon", "k",         "kappa",
                                                     "value",    "error",   "tail_bound"};

json fit_json(const std::optional<RateFit>& fit) {
  if (!fit) return nullptr;
  return json{{"quantity", fit->quantity},
              {"slope", fit->slope},
              {"intercept", fit->intercept},
              {"r2", fit->r2},
              {"points", fit->points.size()}};
}

double max_abs(const MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

ScalingFunction ExperimentConfig::scaling_function() const {
  if (scaling.resonant) return ScalingFunction::resonant(scaling.lambda1, constant_A(potential), scaling.higher);
  return ScalingFunction::off_resonant(scaling.lambda0, scaling.lambda1, scaling.higher);
}

ExperimentConfig parse_config(const json& doc) {
  require_keys(doc, "config",
               {"n", "potential", "scaling", "epsilons", "momenta", "kappa", "quadrature", "oracle",
                "tolerances", "output"});
  for (const char* key : {"n", "potential", "scaling"})
    if (!doc.contains(key)) throw ConfigError(std::string("config needs '") + key + "'");

  ExperimentConfig cfg;
  cfg.n = integer(doc["n"], "n");
  if (cfg.n < 2) throw ConfigError("n must be at least 2");
  const json& pot = doc["potential"];
  if (!pot.is_array() || static_cast<int>(pot.size()) != cfg.n)
    throw ConfigError("potential must list one edge profile per edge");
  std::vector<EdgeProfile> edges;
  for (int i = 0; i < cfg.n; ++i) edges.push_back(parse_edge(pot[i], "potential[" + std::to_string(i) + "]"));
  cfg.potential = StarPotential(std::move(edges));
  validate_potential(cfg.potential);

  cfg.scaling = parse_scaling(doc["scaling"]);

  if (doc.contains("epsilons")) cfg.epsilons = number_list(doc["epsilons"], "epsilons");
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
    if (!(cfg.epsilons[i] > 0.0 && cfg.epsilons[i] <= 1.0)) throw ConfigError("epsilons must lie in (0, 1]");
    if (i > 0 && !(cfg.epsilons[i] < cfg.epsilons[i - 1]))
      throw ConfigError("epsilons must be strictly decreasing");
  }
  if (doc.contains("momenta")) cfg.momenta = number_list(doc["momenta"], "momenta");
  for (double k : cfg.momenta)
    if (!(k > 0.0)) throw ConfigError("momenta must be positive");
  if (doc.contains("kappa")) {
    cfg.kappa = number(doc["kappa"], "kappa");
    if (!(cfg.kappa > 0.0)) throw ConfigError("kappa must be positive");
  }
  if (doc.contains("quadrature")) {
    require_keys(doc["quadrature"], "quadrature", {"order"});
    if (doc["quadrature"].contains("order"))
      cfg.quad_order = integer(doc["quadrature"]["order"], "quadrature.order");
    if (cfg.quad_order < 2 || cfg.quad_order > 512)
      throw ConfigError("quadrature.order must lie in [2, 512]");
  }
  if (doc.contains("oracle")) parse_oracle(doc["oracle"], cfg.oracle);
  if (cfg.oracle.source.edge < 0 || cfg.oracle.source.edge >= cfg.n)
    throw ConfigError("oracle.source.edge out of range");
  if (doc.contains("tolerances")) parse_tolerances(doc["tolerances"], cfg.tolerances);
  if (doc.contains("output")) {
    require_keys(doc["output"], "output", {"dir"});
    if (doc["output"].contains("dir")) {
      if (!doc["output"]["dir"].is_string()) throw ConfigError("output.dir must be a string");
      cfg.output_dir = doc["output"]["dir"].get<std::string>();
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json reference_config(double lambda1) {
  return json{
      {"n", 3},
      {"potential", json::array({json::array({piece_json(0.0, 1.0, {1.0})}),
                                 json::array({piece_json(0.0, 1.0, {-1.0})}), json::array()})},
      {"scaling", {{"resonant", true}, {"lambda1", lambda1}}},
      {"epsilons", {0.125, 0.0625, 0.03125, 0.015625, 0.0078125}},
      {"momenta", {0.5, 1.0, 5.0}},
      {"kappa", 1.0},
      {"quadrature", {{"order", 32}}},
  };
}

std::vector<std::pair<std::string, json>> default_bundle() {
  return {{"vstar_bound", reference_config(-1.0)}, {"vstar_unbound", reference_config(1.0)}};
}

std::optional<RateFit> fit_rate(std::string quantity, std::vector<std::pair<double, double>> points) {
  if (points.size() < 4) throw ConfigError("rate fit for " + quantity + " needs at least four points");
  for (const auto& [eps, err] : points)
    if (!(eps > 0.0 && err > 0.0)) return std::nullopt;
  const Eigen::Index m = static_cast<Eigen::Index>(points.size());
  MatrixXd design(m, 2);
  VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design(i, 0) = std::log(points[i].first);
    design(i, 1) = 1.0;
    y[i] = std::log(points[i].second);
  }
  const VectorXd coef = design.colPivHouseholderQr().solve(y);
  const VectorXd resid = y - design * coef;
  const double centered = (y.array() - y.mean()).square().sum();
  RateFit fit;
  fit.quantity = std::move(quantity);
  fit.points = std::move(points);
  fit.slope = coef[0];
  fit.intercept = coef[1];
  fit.r2 = centered > 0.0 ? 1.0 - resid.squaredNorm() / centered : 1.0;
  return fit;
}

Report cmd_constants(const ExperimentConfig& cfg) {
  const ScalingFunction lam = cfg.scaling_function();
  const CouplingConstants cc = coupling_constants(cfg.potential, lam);
  const BoundaryPair bp = boundary_matrices(cc.theta, cc.beta);
  const bool selfadjoint = check_selfadjoint(bp);

  Report r;
  r.command = "constants";
  r.header = {"quantity", "i", "j", "value"};
  auto row = [&](const std::string& q, std::optional<int> i, std::optional<int> j, double v) {
    r.rows.push_back({q, i ? std::to_string(*i) : "", j ? std::to_string(*j) : "", format_number(v)});
  };
  const int n = cc.edges();
  for (int i = 0; i < n; ++i) row("theta", i, std::nullopt, cc.theta[i]);
  row("A", std::nullopt, std::nullopt, cc.A);
  row("B", std::nullopt, std::nullopt, cc.B);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) row("Pi", i, j, cc.Pi(i, j));
  row("beta", std::nullopt, std::nullopt, cc.beta);
  row("lambda0", std::nullopt, std::nullopt, lam.lambda0());
  row("lambda1", std::nullopt, std::nullopt, lam.lambda1());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) row("Amat", i, j, bp.Amat(i, j));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) row("Bmat", i, j, bp.Bmat(i, j));
  row("selfadjoint", std::nullopt, std::nullopt, selfadjoint ? 1.0 : 0.0);

  std::vector<double> theta(cc.theta.data(), cc.theta.data() + n);
  r.summary = {{"command", "constants"},   {"n", n},          {"theta", theta},
               {"A", cc.A},                {"B", cc.B},       {"beta", cc.beta},
               {"resonant", lam.is_resonant()}, {"selfadjoint", selfadjoint}};
  return r;
}

Report cmd_spectrum(const ExperimentConfig& cfg, const RunOptions& opts) {
  const ScalingFunction lam = cfg.scaling_function();
  const CouplingConstants cc = coupling_constants(cfg.potential, lam);
  const GaussLegendre& rule = GaussLegendre::cached(cfg.quad_order);
  const std::optional<double> limit = cc.B == 0.0 ? std::nullopt : limit_point_spectrum(cc);

  Report r;
  r.command = "spectrum";
  r.header = kMeasurementHeader;
  r.rows.push_back(measurement("limit_eigenvalue", 0.0, std::nullopt, std::nullopt, limit, std::nullopt));

  struct Item {
    std::optional<PoleResult> pole;
    std::optional<double> predictor;
    std::optional<double> fd;
    bool fd_skipped = false;
    std::string fd_note;
  };
  const auto items = ordered_map<Item>(cfg.epsilons.size(), opts.parallel, [&](std::size_t idx) {
    const EpsOperator op(cfg.potential, lam, cfg.epsilons[idx]);
    Item it;
    it.pole = find_pole(op, cc, rule);
    if (cc.B != 0.0) it.predictor = pole_asymptotic(op, cc);
    if (op.eps() >= 10.0 * cfg.oracle.h) {
      try {
        it.fd = oracle_eigenvalue(op, cfg.oracle.L, cfg.oracle.h, cfg.tolerances.richardson);
      } catch (const GridTooCoarse& e) {
        it.fd_note = e.what();
      }
    } else {
      it.fd_skipped = true;
    }
    return it;
  });

  std::vector<std::pair<double, double>> ev_errors;
  bool any_pole = false;
  json notes = json::array();
  for (std::size_t idx = 0; idx < items.size(); ++idx) {
    const double eps = cfg.epsilons[idx];
    const Item& it = items[idx];
    Cell kappa;
    Cell ev;
    Cell ev_err;
    Cell pred_err;
    if (it.pole) {
      any_pole = true;
      kappa = it.pole->kappa;
      ev = it.pole->eigenvalue;
      if (limit) {
        ev_err = std::abs(*ev - *limit);
        ev_errors.emplace_back(eps, *ev_err);
      }
      if (it.predictor) pred_err = std::abs(*kappa - *it.predictor);
    }
    r.rows.push_back(measurement("kappa_eps", eps, std::nullopt, std::nullopt, kappa, pred_err));
    r.rows.push_back(measurement("kappa_asymptotic", eps, std::nullopt, std::nullopt, it.predictor, std::nullopt));
    r.rows.push_back(measurement("eigenvalue_eps", eps, std::nullopt, std::nullopt, ev, ev_err));
    Cell fd_err;
    if (it.fd && ev) fd_err = std::abs(*it.fd - *ev);
    r.rows.push_back(measurement("fd_eigenvalue", eps, std::nullopt, std::nullopt, it.fd, fd_err));
    if (!it.fd_note.empty()) notes.push_back("epsilon " + format_number(eps) + ": " + it.fd_note);
  }

  r.summary = {{"command", "spectrum"},
               {"beta", cc.beta},
               {"limit_eigenvalue", limit ? json(*limit) : json(nullptr)},
               {"fd_min_epsilon", 10.0 * cfg.oracle.h}};
  if (!limit) notes.push_back("limit operator: no eigenvalue");
  if (!any_pole) notes.push_back("no eigenvalue for any epsilon");
  r.summary["notes"] = notes;
  r.summary["eigenvalue_rate"] =
      ev_errors.size() >= 4 ? fit_json(fit_rate("eigenvalue_eps", ev_errors)) : json(nullptr);
  return r;
}

Report cmd_converge(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (cfg.epsilons.size() < 4) throw ConfigError("converge needs at least four epsilons");
  const ScalingFunction lam = cfg.scaling_function();
  const CouplingConstants cc = coupling_constants(cfg.potential, lam);
  const GaussLegendre& rule = GaussLegendre::cached(cfg.quad_order);

  std::vector<MatrixXcd> limit_s;
  for (double k : cfg.momenta) limit_s.push_back(smatrix_limit(k, cc).entries);

  struct Item {
    HsDistance hs;
    std::vector<double> s_dist;
    std::vector<double> unitarity;
  };
  const auto items = ordered_map<Item>(cfg.epsilons.size(), opts.parallel, [&](std::size_t idx) {
    const EpsOperator op(cfg.potential, lam, cfg.epsilons[idx]);
    Item it{hs_distance(op, cc, cfg.kappa, rule), {}, {}};
    for (std::size_t m = 0; m < cfg.momenta.size(); ++m) {
      const MatrixXcd s = smatrix_eps(op, cfg.momenta[m], rule).entries;
      it.s_dist.push_back((s - limit_s[m]).norm());
      it.unitarity.push_back((s.adjoint() * s - MatrixXcd::Identity(s.rows(), s.cols())).norm());
    }
    return it;
  });

  Report r;
  r.command = "converge";
  r.header = kMeasurementHeader;
  std::vector<std::pair<double, double>> hs_pts;
  std::vector<std::pair<double, double>> ext_pts;
  std::vector<std::vector<std::pair<double, double>>> s_pts(cfg.momenta.size());
  double max_tail = 0.0;
  for (std::size_t idx = 0; idx < items.size(); ++idx) {
    const double eps = cfg.epsilons[idx];
    const Item& it = items[idx];
    r.rows.push_back(measurement("hs_distance", eps, std::nullopt, cfg.kappa, it.hs.distance, std::nullopt,
                                 it.hs.tail_bound));
    r.rows.push_back(measurement("hs_exterior", eps, std::nullopt, cfg.kappa, it.hs.exterior, std::nullopt,
                                 it.hs.tail_bound));
    hs_pts.emplace_back(eps, it.hs.distance);
    ext_pts.emplace_back(eps, it.hs.exterior);
    max_tail = std::max(max_tail, it.hs.tail_bound);
    for (std::size_t m = 0; m < cfg.momenta.size(); ++m) {
      r.rows.push_back(measurement("smatrix_distance", eps, cfg.momenta[m], std::nullopt, it.s_dist[m],
                                   it.unitarity[m]));
      s_pts[m].emplace_back(eps, it.s_dist[m]);
    }
  }

  bool monotone = true;
  for (std::size_t i = 1; i < hs_pts.size(); ++i) monotone = monotone && hs_pts[i].second < hs_pts[i - 1].second;
  json fits = json::array();
  fits.push_back(fit_json(fit_rate("hs_distance", hs_pts)));
  fits.push_back(fit_json(fit_rate("hs_exterior", ext_pts)));
  for (std::size_t m = 0; m < cfg.momenta.size(); ++m) {
    json f = fit_json(fit_rate("smatrix_distance", s_pts[m]));
    if (!f.is_null()) f["k"] = cfg.momenta[m];
    fits.push_back(f);
  }
  r.summary = {{"command", "converge"},   {"beta", cc.beta},          {"kappa", cfg.kappa},
               {"hs_monotone", monotone}, {"max_tail_bound", max_tail}, {"rates", fits}};
  return r;
}

Report cmd_oracle(const ExperimentConfig& cfg, const RunOptions& opts) {
  const ScalingFunction lam = cfg.scaling_function();
  const CouplingConstants cc = coupling_constants(cfg.potential, lam);
  const GaussLegendre& rule = GaussLegendre::cached(cfg.quad_order);
  const OracleSpec& o = cfg.oracle;
  const Tolerances& tol = cfg.tolerances;
  // surface grid errors before any long computation
  DiscreteStarGraph(cfg.n, o.L, o.h);
  DiscreteStarGraph(cfg.n, o.scattering_L, o.h);

  struct Check {
    std::string name;
    std::vector<std::string> row;
    double error;
    double tolerance;
  };
  using Task = std::function<Check()>;
  std::vector<Task> tasks;

  tasks.emplace_back([&]() {
    const EpsOperator op(cfg.potential, lam, o.epsilon);
    const auto pole = find_pole(op, cc, rule);
    const auto fd = oracle_eigenvalue(op, o.L, o.h, tol.richardson);
    double err = 0.0;
    if (pole.has_value() != fd.has_value()) {
      err = std::numeric_limits<double>::infinity();
    } else if (pole) {
      err = std::abs(*fd - pole->eigenvalue) / std::abs(pole->eigenvalue);
    }
    return Check{"eigenvalue",
                 measurement("fd_eigenvalue", o.epsilon, std::nullopt, std::nullopt, fd, err),
                 err, tol.eigenvalue};
  });
  tasks.emplace_back([&]() {
    const EpsOperator op(cfg.potential, lam, o.scattering_epsilon);
    const double err =
        max_abs(oracle_smatrix(op, o.k, o.scattering_L, o.h).entries - smatrix_eps(op, o.k, rule).entries);
    return Check{"smatrix",
                 measurement("fd_smatrix_max_error", o.scattering_epsilon, o.k, std::nullopt, err, err),
                 err, tol.smatrix};
  });
  tasks.emplace_back([&]() {
    std::vector<EdgeProfile> zero(cfg.n);
    const StarPotential V0(std::move(zero));
    const EpsOperator op(V0, ScalingFunction::off_resonant(1.0, 1.0), o.scattering_epsilon);
    const GridFunction col = oracle_resolvent_column(op, o.column_kappa, o.source, o.L, o.h);
    const Momentum k = Momentum::imaginary(o.column_kappa);
    double err = 0.0;
    for (int j = 0; j < cfg.n; ++j)
      for (Eigen::Index m = 0; m < col.values[j].size(); ++m)
        err = std::max(err, std::abs(col.values[j][m] - free_green(k, o.source, {j, m * col.h}, cfg.n)));
    return Check{"free_column",
                 measurement("fd_free_column_sup_error", std::nullopt, std::nullopt, o.column_kappa, err, err),
                 err, tol.column};
  });
  tasks.emplace_back([&]() {
    const EpsOperator op(cfg.potential, lam, o.scattering_epsilon);
    const GridFunction col = oracle_resolvent_column(op, o.column_kappa, o.source, o.L, o.h);
    const KernelEvaluator kernel = resolvent_eps_kernel(op, o.column_kappa, rule);
    double err = 0.0;
    for (int j = 0; j < cfg.n; ++j) {
      for (Eigen::Index m = 0; m < col.values[j].size(); ++m) {
        const double x = m * col.h;
        // the kernel decays like e^{-kappa x}; compare where it is resolved
        if (x > 1.0 + 20.0 / o.column_kappa) break;
        if (j == o.source.edge && std::abs(x - o.source.x) < 2.0 * col.h) continue;
        err = std::max(err, std::abs(col.values[j][m] - kernel(o.source, {j, x}).real()));
      }
    }
    return Check{"eps_column",
                 measurement("fd_eps_column_sup_error", o.scattering_epsilon, std::nullopt, o.column_kappa, err,
                             err),
                 err, tol.column_eps};
  });

  const auto checks = ordered_map<Check>(tasks.size(), opts.parallel, [&](std::size_t i) { return tasks[i](); });
  Report r;
  r.command = "oracle";
  r.header = kMeasurementHeader;
  json list = json::array();
  for (const Check& c : checks) {
    r.rows.push_back(c.row);
    const bool ok = c.error <= c.tolerance;
    r.passed = r.passed && ok;
    list.push_back({{"check", c.name}, {"error", c.error}, {"tolerance", c.tolerance}, {"passed", ok}});
  }
  r.summary = {{"command", "oracle"}, {"h", o.h}, {"L", o.L}, {"checks", list}, {"passed", r.passed}};
  return r;
}

std::string format_number(std::optional<double> x) {
  if (!x) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", *x == 0.0 ? 0.0 : *x);
  return buf;
}

void write_report(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / (report.command + ".csv"));
    if (!csv) throw ConfigError("cannot write to " + dir.string());
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) csv << (i ? "," : "") << cells[i];
      csv << '\n';
    };
    line(report.header);
    for (const auto& row : report.rows) line(row);
  }
  std::ofstream js(dir / (report.command + ".json"));
  if (!js) throw ConfigError("cannot write to " + dir.string());
  js << report.summary.dump(2) << '\n';
}

std::filesystem::path resolve_output_dir(const std::optional<std::string>& flag,
                                         const ExperimentConfig& cfg) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("STARGRAPH_OUT_DIR"); env && *env) return env;
  return cfg.output_dir;
}

int exit_code(const Error& err) noexcept {
  switch (err.kind()) {
    case ErrorKind::Validation:
      return 2;
    case ErrorKind::Numerical:
      return 3;
    case ErrorKind::Tolerance:
      return 4;
  }
  return 3;
}

}  // namespace stargraph::lab
