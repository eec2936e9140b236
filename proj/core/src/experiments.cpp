#include "sparseid/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sparseid/field_io.hpp"

namespace sparseid {

using json = nlohmann::json;

std::string to_string(CaseId c) {
  switch (c) {
    case CaseId::I: return "I";
    case CaseId::II: return "II";
    case CaseId::III: return "III";
  }
  return "?";
}

SparseSource reference_source() {
  SparseSource src;
  src.atoms = {{1.5, 0.5, 100.0}, {1.0, 0.75, 85.0}, {0.5, 0.5, 60.0}, {0.75, 0.25, 90.0}};
  src.sort();
  return src;
}

int ProblemConfig::nsteps() const {
  if (!(dt > 0.0)) throw SemanticError("ProblemConfig: dt must be positive");
  const double q = T / dt;
  const double rounded = std::round(q);
  if (rounded < 1.0 || std::abs(q - rounded) > 1e-9 * std::max(1.0, std::abs(q))) {
    std::ostringstream msg;
    msg << "ProblemConfig: T = " << T << " is not a positive integer multiple of dt = " << dt;
    throw SemanticError(msg.str());
  }
  return static_cast<int>(rounded);
}

ProblemConfig make_case(CaseId id, double lx, double ly, double dx, double dy,
                        double dt, double T) {
  ProblemConfig cfg;
  cfg.lx = lx;
  cfg.ly = ly;
  cfg.dx = dx;
  cfg.dy = dy;
  cfg.dt = dt;
  cfg.T = T;
  cfg.case_id = id;
  cfg.reference = reference_source();

  const double xmid = lx / 2.0;
  switch (id) {
    case CaseId::I:
      cfg.coeffs = Coefficients::uniform(0.05, 2.0, -2.0);
      break;
    case CaseId::II:
      cfg.coeffs.regions.push_back({0.0, 0.0, xmid, ly, 0.08, 1.0, 2.0});
      cfg.coeffs.regions.push_back({xmid, 0.0, lx, ly, 0.05, 1.0, 2.0});
      break;
    case CaseId::III:
      cfg.coeffs.regions.push_back({0.0, 0.0, xmid, ly, 0.05, 0.0, 0.0});
      cfg.coeffs.regions.push_back({xmid, 0.0, lx, ly, 0.05, 0.0, -3.0});
      break;
    default:
      throw UnknownCase("make_case: unknown case id");
  }

  const double beta = dx * dx * dx * dx;
  cfg.pdhg.beta = beta;
  cfg.gd.beta = beta;
  return cfg;
}

ProblemConfig make_case(CaseId id) {
  return make_case(id, 2.0, 1.0, 0.05, 0.05, 0.05, 0.1);
}

namespace {

/// Standard normals via explicit Box-Muller over mt19937_64, so the noise
/// draw is identical across standard-library implementations.
class NormalDraw {
 public:
  explicit NormalDraw(std::uint64_t seed) : rng_(seed) {}

  double next() {
    // Uniforms in (0,1]; log(0) is thereby excluded.
    const double u1 = (static_cast<double>(rng_()) + 1.0) / (static_cast<double>(rng_.max()) + 2.0);
    const double u2 = (static_cast<double>(rng_()) + 1.0) / (static_cast<double>(rng_.max()) + 2.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

Field make_target(const ProblemConfig& config, const TimeStepOperator& op) {
  const Field clean = op.forward_solve(source_to_field(config.reference, op.grid()));
  if (config.scenario.kind == ScenarioSpec::Kind::Reachable || config.scenario.level == 0.0) {
    return clean;
  }
  if (config.scenario.level < 0.0 || config.scenario.level >= 1.0) {
    throw SemanticError("make_target: noise level must lie in [0,1)");
  }

  NormalDraw draw(config.scenario.seed);
  Field noise(op.grid());
  for (double& v : noise.values) v = draw.next();
  const double nn = norm_l2(noise);
  if (nn == 0.0) throw SolveFailure("make_target: degenerate noise draw");
  const double scale = config.scenario.level * norm_l2(clean) / nn;

  Field out = clean;
  for (size_t k = 0; k < out.values.size(); ++k) {
    out.values[k] += scale * noise.values[k];
  }
  return out;
}

Field make_target(const ProblemConfig& config) {
  const TimeStepOperator op = assemble_operator(config.grid(), config.coeffs,
                                                config.dt, config.nsteps());
  return make_target(config, op);
}

namespace {

GridNode snap_to_node(const Grid2D& g, double x, double y) {
  auto snap = [](double q, int n) {
    const int lo = static_cast<int>(std::floor(q));
    int idx = (q - lo <= 0.5) ? lo : lo + 1;
    return std::clamp(idx, 1, n);
  };
  return {snap(x / g.dx, g.nx), snap(y / g.dy, g.ny)};
}

}  // namespace

Metrics evaluate(const SparseSource& recovered, const SparseSource& reference,
                 const Field& uT, const TimeStepOperator& op) {
  const Grid2D& g = op.grid();
  Metrics m;

  struct Pair {
    double dist;
    size_t ref;
    size_t rec;
  };
  std::vector<Pair> pairs;
  for (size_t a = 0; a < reference.atoms.size(); ++a) {
    const GridNode na = snap_to_node(g, reference.atoms[a].x, reference.atoms[a].y);
    for (size_t b = 0; b < recovered.atoms.size(); ++b) {
      const GridNode nb = snap_to_node(g, recovered.atoms[b].x, recovered.atoms[b].y);
      const double dist = std::max(std::abs(na.i - nb.i), std::abs(na.j - nb.j));
      pairs.push_back({dist, a, b});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    if (x.dist != y.dist) return x.dist < y.dist;
    if (x.ref != y.ref) return x.ref < y.ref;
    return x.rec < y.rec;
  });

  std::vector<bool> ref_used(reference.atoms.size(), false);
  std::vector<bool> rec_used(recovered.atoms.size(), false);
  size_t matched = 0;
  double worst = 0.0;
  for (const Pair& p : pairs) {
    if (ref_used[p.ref] || rec_used[p.rec]) continue;
    ref_used[p.ref] = true;
    rec_used[p.rec] = true;
    ++matched;
    worst = std::max(worst, p.dist);
    const double ref_alpha = reference.atoms[p.ref].intensity;
    const double rec_alpha = recovered.atoms[p.rec].intensity;
    m.intensity_rel_errors.push_back(std::abs(rec_alpha - ref_alpha) /
                                     std::max(std::abs(ref_alpha), 1e-300));
  }
  if (matched < reference.atoms.size()) {
    worst = std::numeric_limits<double>::infinity();
  }
  m.location_error_cells = worst;
  m.atom_count_match =
      recovered.atoms.size() == reference.atoms.size() && matched == reference.atoms.size();

  const Field fitted = op.forward_solve(source_to_field(recovered, g));
  Field diff = fitted;
  for (size_t k = 0; k < diff.values.size(); ++k) diff.values[k] -= uT.values[k];
  const double den = norm_l2(uT);
  const double num = norm_l2(diff);
  m.final_misfit = den == 0.0
                       ? (num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                       : num / den;
  return m;
}

Report run_experiment(const ProblemConfig& config, ExperimentArtifacts* artifacts) {
  Report rep;
  rep.case_label = config.case_id ? to_string(*config.case_id) : "custom";
  rep.scenario = config.scenario.kind == ScenarioSpec::Kind::Noisy ? "noisy" : "reachable";
  rep.noise_level = config.scenario.level;
  rep.seed = config.scenario.seed;
  rep.dt = config.dt;
  rep.T = config.T;
  rep.algorithm = config.algorithm == AlgorithmKind::Pdhg ? "pdhg" : "gd";
  rep.pdhg = config.pdhg;
  rep.gd = config.gd;

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  try {
    rep.nsteps = config.nsteps();
    rep.grid = config.grid();
    const TimeStepOperator op = assemble_operator(rep.grid, config.coeffs, config.dt, rep.nsteps);
    const Field uT = make_target(config, op);

    const OpnormEstimate opn = estimate_opnorm(op);
    rep.opnorm = opn.value;
    rep.opnorm_converged = opn.converged;

    Field u0_init(rep.grid);
    Field p_init(rep.grid);
    if (config.init_u0_path) u0_init = load_field(*config.init_u0_path);
    if (config.init_p_path) p_init = load_field(*config.init_p_path);

    Field u0_star(rep.grid);
    if (config.algorithm == AlgorithmKind::Pdhg) {
      const PdhgParams params = validate_params(config.pdhg, opn.value);
      rep.pdhg = params;
      PdhgDiagnostics diag;
      diag.knorm_history = config.diagnostics;
      diag.ergodic_average = config.diagnostics;
      const OptimizerResult res = run_pdhg(op, uT, params, u0_init, p_init, diag);
      rep.iterations = res.iterations;
      rep.converged = res.converged;
      rep.residual_history = res.residual_history;
      rep.diag_knorm_history = res.diag_knorm_history;
      u0_star = res.u0_star;
    } else {
      const GdParams params = validate_gd_params(config.gd, opn.value);
      rep.gd = params;
      const OptimizerResult res = run_gd(op, uT, params, u0_init);
      rep.iterations = res.iterations;
      rep.converged = res.converged;
      rep.residual_history = res.residual_history;
      u0_star = res.u0_star;
    }

    if (artifacts) {
      artifacts->target = uT;
      artifacts->u0_star = u0_star;
    }

    try {
      rep.recovered = enhance(u0_star, op, uT, config.enhance_rel_threshold);
    } catch (const EmptyField& e) {
      rep.empty_recovery = true;
      rep.error = e.what();
      rep.error_kind = "empty_recovery";
    } catch (const NoMaxima& e) {
      rep.empty_recovery = true;
      rep.error = e.what();
      rep.error_kind = "empty_recovery";
    }

    if (!rep.empty_recovery) {
      const Field fitted = op.forward_solve(source_to_field(rep.recovered, rep.grid));
      if (artifacts) artifacts->final_state = fitted;
      if (!config.reference.atoms.empty()) {
        Metrics m = evaluate(rep.recovered, config.reference, uT, op);
        m.iterations = rep.iterations;
        m.wall_time_s = elapsed();
        rep.metrics = m;
      }
    }
  } catch (const ParseError& e) {
    rep.error = e.what();
    rep.error_kind = "config";
  } catch (const SemanticError& e) {
    rep.error = e.what();
    rep.error_kind = "config";
  } catch (const NonTilingMesh& e) {
    rep.error = e.what();
    rep.error_kind = "config";
  } catch (const Error& e) {
    rep.error = e.what();
    rep.error_kind = "numeric";
  }

  rep.wall_time_s = elapsed();
  return rep;
}

namespace {

json source_to_json(const SparseSource& src) {
  json atoms = json::array();
  for (const auto& a : src.atoms) {
    atoms.push_back({{"x", a.x}, {"y", a.y}, {"intensity", a.intensity}});
  }
  return atoms;
}

SparseSource source_from_json(const json& j) {
  SparseSource src;
  for (const auto& a : j) {
    src.atoms.push_back({a.at("x").get<double>(), a.at("y").get<double>(),
                         a.at("intensity").get<double>()});
  }
  return src;
}

}  // namespace

std::string report_to_json(const Report& rep) {
  json j;
  j["case"] = rep.case_label;
  j["scenario"] = {{"kind", rep.scenario}, {"level", rep.noise_level}, {"seed", rep.seed}};
  j["grid"] = {{"lx", rep.grid.lx}, {"ly", rep.grid.ly}, {"dx", rep.grid.dx},
               {"dy", rep.grid.dy}, {"nx", rep.grid.nx}, {"ny", rep.grid.ny}};
  j["pde"] = {{"dt", rep.dt}, {"T", rep.T}, {"nsteps", rep.nsteps}};
  j["algorithm"] = rep.algorithm;
  j["params"]["pdhg"] = {{"theta", rep.pdhg.theta}, {"r", rep.pdhg.r},
                         {"s", rep.pdhg.s.value_or(-1.0)}, {"rho", rep.pdhg.rho},
                         {"sigma", rep.pdhg.sigma}, {"tau", rep.pdhg.tau},
                         {"beta", rep.pdhg.beta}, {"tol", rep.pdhg.tol},
                         {"kmax", rep.pdhg.kmax}};
  j["params"]["gd"] = {{"eta", rep.gd.eta.value_or(-1.0)}, {"tau", rep.gd.tau},
                       {"beta", rep.gd.beta}, {"tol", rep.gd.tol}, {"kmax", rep.gd.kmax}};
  j["opnorm"] = {{"value", rep.opnorm}, {"converged", rep.opnorm_converged}};
  j["iterations"] = rep.iterations;
  j["converged"] = rep.converged;
  j["residual_history"] = rep.residual_history;
  if (rep.diag_knorm_history) j["diag_knorm_history"] = *rep.diag_knorm_history;
  j["recovered_atoms"] = source_to_json(rep.recovered);
  j["empty_recovery"] = rep.empty_recovery;
  if (rep.metrics) {
    const Metrics& m = *rep.metrics;
    j["metrics"] = {{"atom_count_match", m.atom_count_match},
                    {"location_error_cells",
                     std::isfinite(m.location_error_cells) ? json(m.location_error_cells)
                                                           : json("inf")},
                    {"intensity_rel_errors", m.intensity_rel_errors},
                    {"final_misfit", m.final_misfit},
                    {"iterations", m.iterations},
                    {"wall_time_s", m.wall_time_s}};
  }
  j["wall_time_s"] = rep.wall_time_s;
  j["error"] = rep.error;
  j["error_kind"] = rep.error_kind;
  return j.dump(2);
}

Report report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatViolation(std::string("report_from_json: ") + e.what());
  }
  try {
    Report rep;
    rep.case_label = j.at("case").get<std::string>();
    rep.scenario = j.at("scenario").at("kind").get<std::string>();
    rep.noise_level = j.at("scenario").at("level").get<double>();
    rep.seed = j.at("scenario").at("seed").get<std::uint64_t>();
    const auto& g = j.at("grid");
    rep.grid.lx = g.at("lx").get<double>();
    rep.grid.ly = g.at("ly").get<double>();
    rep.grid.dx = g.at("dx").get<double>();
    rep.grid.dy = g.at("dy").get<double>();
    rep.grid.nx = g.at("nx").get<int>();
    rep.grid.ny = g.at("ny").get<int>();
    rep.dt = j.at("pde").at("dt").get<double>();
    rep.T = j.at("pde").at("T").get<double>();
    rep.nsteps = j.at("pde").at("nsteps").get<int>();
    rep.algorithm = j.at("algorithm").get<std::string>();
    const auto& pp = j.at("params").at("pdhg");
    rep.pdhg.theta = pp.at("theta").get<double>();
    rep.pdhg.r = pp.at("r").get<double>();
    const double s = pp.at("s").get<double>();
    if (s > 0.0) rep.pdhg.s = s;
    rep.pdhg.rho = pp.at("rho").get<double>();
    rep.pdhg.sigma = pp.at("sigma").get<double>();
    rep.pdhg.tau = pp.at("tau").get<double>();
    rep.pdhg.beta = pp.at("beta").get<double>();
    rep.pdhg.tol = pp.at("tol").get<double>();
    rep.pdhg.kmax = pp.at("kmax").get<int>();
    const auto& gp = j.at("params").at("gd");
    const double eta = gp.at("eta").get<double>();
    if (eta > 0.0) rep.gd.eta = eta;
    rep.gd.tau = gp.at("tau").get<double>();
    rep.gd.beta = gp.at("beta").get<double>();
    rep.gd.tol = gp.at("tol").get<double>();
    rep.gd.kmax = gp.at("kmax").get<int>();
    rep.opnorm = j.at("opnorm").at("value").get<double>();
    rep.opnorm_converged = j.at("opnorm").at("converged").get<bool>();
    rep.iterations = j.at("iterations").get<int>();
    rep.converged = j.at("converged").get<bool>();
    rep.residual_history = j.at("residual_history").get<std::vector<double>>();
    if (j.contains("diag_knorm_history")) {
      rep.diag_knorm_history = j.at("diag_knorm_history").get<std::vector<double>>();
    }
    rep.recovered = source_from_json(j.at("recovered_atoms"));
    rep.empty_recovery = j.at("empty_recovery").get<bool>();
    if (j.contains("metrics")) {
      Metrics m;
      const auto& jm = j.at("metrics");
      m.atom_count_match = jm.at("atom_count_match").get<bool>();
      if (jm.at("location_error_cells").is_string()) {
        m.location_error_cells = std::numeric_limits<double>::infinity();
      } else {
        m.location_error_cells = jm.at("location_error_cells").get<double>();
      }
      m.intensity_rel_errors = jm.at("intensity_rel_errors").get<std::vector<double>>();
      m.final_misfit = jm.at("final_misfit").get<double>();
      m.iterations = jm.at("iterations").get<int>();
      m.wall_time_s = jm.at("wall_time_s").get<double>();
      rep.metrics = m;
    }
    rep.wall_time_s = j.at("wall_time_s").get<double>();
    rep.error = j.at("error").get<std::string>();
    rep.error_kind = j.at("error_kind").get<std::string>();
    return rep;
  } catch (const json::exception& e) {
    throw FormatViolation(std::string("report_from_json: missing or ill-typed field: ") + e.what());
  }
}

}  // namespace sparseid
