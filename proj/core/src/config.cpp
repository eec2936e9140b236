#include "sparseid/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sparseid {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/// Parsed key/value store. Repeatable keys (pde.region, source.atom) keep
/// every occurrence in file order.
struct KeyValues {
  std::map<std::string, std::string> single;
  std::map<std::string, std::vector<std::string>> repeated;

  static bool is_repeatable(const std::string& key) {
    return key == "pde.region" || key == "source.atom";
  }

  void set(const std::string& key, const std::string& value) {
    if (is_repeatable(key)) {
      repeated[key].push_back(value);
    } else {
      single[key] = value;
    }
  }
};

KeyValues parse_lines(std::istream& in) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << "config line " << lineno << ": expected key = value, got '" << line << "'";
      throw ParseError(msg.str());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      std::ostringstream msg;
      msg << "config line " << lineno << ": empty key or value";
      throw ParseError(msg.str());
    }
    kv.set(key, value);
  }
  return kv;
}

void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides) {
  for (const std::string& ov : overrides) {
    const size_t eq = ov.find('=');
    if (eq == std::string::npos) {
      throw ParseError("override '" + ov + "': expected key=value");
    }
    const std::string key = trim(ov.substr(0, eq));
    const std::string value = trim(ov.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError("override '" + ov + "': empty key or value");
    }
    if (KeyValues::is_repeatable(key)) {
      kv.repeated[key] = {value};
    } else {
      kv.single[key] = value;
    }
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': '" + value + "' is not a number");
  }
}

int to_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': '" + value + "' is not an integer");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ParseError("config key '" + key + "': '" + value + "' is not a boolean");
}

std::vector<double> to_numbers(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(to_double(key, item));
  }
  return out;
}

class Resolver {
 public:
  Resolver(KeyValues kv, ExperimentSpec& spec) : kv_(std::move(kv)), spec_(spec) {}

  bool has(const std::string& key) const { return kv_.single.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback,
                  const std::string& why) {
    auto it = kv_.single.find(key);
    if (it != kv_.single.end()) {
      used_.insert(key);
      return it->second;
    }
    note(key, fallback, why);
    return fallback;
  }

  double num(const std::string& key, double fallback, const std::string& why) {
    auto it = kv_.single.find(key);
    if (it != kv_.single.end()) {
      used_.insert(key);
      return to_double(key, it->second);
    }
    std::ostringstream v;
    v << fallback;
    note(key, v.str(), why);
    return fallback;
  }

  int integer(const std::string& key, int fallback, const std::string& why) {
    auto it = kv_.single.find(key);
    if (it != kv_.single.end()) {
      used_.insert(key);
      return to_int(key, it->second);
    }
    note(key, std::to_string(fallback), why);
    return fallback;
  }

  bool boolean(const std::string& key, bool fallback, const std::string& why) {
    auto it = kv_.single.find(key);
    if (it != kv_.single.end()) {
      used_.insert(key);
      return to_bool(key, it->second);
    }
    note(key, fallback ? "true" : "false", why);
    return fallback;
  }

  const std::vector<std::string>& list(const std::string& key) {
    static const std::vector<std::string> empty;
    auto it = kv_.repeated.find(key);
    if (it == kv_.repeated.end()) return empty;
    used_.insert(key);
    return it->second;
  }

  void check_unknown() const {
    for (const auto& [key, value] : kv_.single) {
      if (!used_.count(key)) {
        throw SemanticError("config key '" + key + "' is not recognized");
      }
    }
    for (const auto& [key, values] : kv_.repeated) {
      if (!used_.count(key)) {
        throw SemanticError("config key '" + key + "' is not recognized");
      }
    }
  }

 private:
  void note(const std::string& key, const std::string& value, const std::string& why) {
    spec_.provenance.push_back(key + " defaulted to " + value + " (" + why + ")");
  }

  KeyValues kv_;
  ExperimentSpec& spec_;
  std::set<std::string> used_;
};

ExperimentSpec resolve(KeyValues kv) {
  ExperimentSpec spec;
  Resolver r(std::move(kv), spec);
  ProblemConfig& cfg = spec.problem;

  cfg.lx = r.num("grid.lx", 2.0, "reference domain width");
  cfg.ly = r.num("grid.ly", 1.0, "reference domain height");
  cfg.dx = r.num("grid.dx", 0.05, "desk-scale mesh");
  cfg.dy = r.num("grid.dy", cfg.dx, "square cells");
  cfg.dt = r.num("pde.dt", 0.05, "reference time step");
  cfg.T = r.num("pde.T", 0.1, "reference horizon");

  const std::string case_name = r.str("case", "I", "homogeneous reference case");
  if (case_name == "I" || case_name == "II" || case_name == "III") {
    const CaseId id = case_name == "I" ? CaseId::I : (case_name == "II" ? CaseId::II : CaseId::III);
    const ProblemConfig base = make_case(id, cfg.lx, cfg.ly, cfg.dx, cfg.dy, cfg.dt, cfg.T);
    cfg.coeffs = base.coeffs;
    cfg.case_id = id;
  } else if (case_name == "custom") {
    for (const std::string& region : r.list("pde.region")) {
      const std::vector<double> v = to_numbers("pde.region", region);
      if (v.size() != 7) {
        throw SemanticError("pde.region expects 7 numbers: x0,y0,x1,y1,d,vx,vy");
      }
      cfg.coeffs.regions.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6]});
    }
    if (cfg.coeffs.regions.empty()) {
      throw SemanticError("case = custom requires at least one pde.region");
    }
  } else {
    throw UnknownCase("config key 'case': '" + case_name + "' is not one of I, II, III, custom");
  }

  const auto& atoms = r.list("source.atom");
  if (atoms.empty()) {
    cfg.reference = reference_source();
    spec.provenance.push_back("source.atom defaulted to the 4-atom reference datum");
  } else {
    for (const std::string& atom : atoms) {
      const std::vector<double> v = to_numbers("source.atom", atom);
      if (v.size() != 3) {
        throw SemanticError("source.atom expects 3 numbers: x,y,intensity");
      }
      cfg.reference.atoms.push_back({v[0], v[1], v[2]});
    }
    cfg.reference.sort();
  }

  const std::string kind = r.str("scenario.kind", "reachable", "exact target");
  if (kind == "reachable") {
    cfg.scenario.kind = ScenarioSpec::Kind::Reachable;
  } else if (kind == "noisy") {
    cfg.scenario.kind = ScenarioSpec::Kind::Noisy;
  } else {
    throw SemanticError("scenario.kind must be reachable or noisy, got '" + kind + "'");
  }
  cfg.scenario.level = r.num("scenario.level", 0.1, "reference noise level");
  cfg.scenario.seed = static_cast<std::uint64_t>(r.integer("scenario.seed", 1, "fixed seed"));
  if (cfg.scenario.kind == ScenarioSpec::Kind::Noisy &&
      (cfg.scenario.level < 0.0 || cfg.scenario.level >= 1.0)) {
    throw SemanticError("scenario.level must lie in [0,1)");
  }

  const std::string algo = r.str("algorithm", "pdhg", "primal-dual is the primary solver");
  if (algo == "pdhg") {
    cfg.algorithm = AlgorithmKind::Pdhg;
  } else if (algo == "gd") {
    cfg.algorithm = AlgorithmKind::Gd;
  } else {
    throw SemanticError("algorithm must be pdhg or gd, got '" + algo + "'");
  }

  const double beta_default = cfg.dx * cfg.dx * cfg.dx * cfg.dx;
  cfg.pdhg.theta = r.num("pdhg.theta", 1.0, "relaxed configuration");
  cfg.pdhg.r = r.num("pdhg.r", 6.0, "reference primal step");
  if (r.has("pdhg.s")) {
    cfg.pdhg.s = r.num("pdhg.s", 0.0, "");
  } else {
    spec.provenance.push_back("pdhg.s defaulted to 0.999/(r*||L L*||), resolved at run time");
  }
  cfg.pdhg.rho = r.num("pdhg.rho", 1.9, "near-2 correction factor");
  cfg.pdhg.sigma = r.num("pdhg.sigma", 1.9, "matches rho for theta=1");
  cfg.pdhg.tau = r.num("pdhg.tau", 1e-2, "reference L2 weight");
  cfg.pdhg.beta = r.num("pdhg.beta", beta_default, "dx^4");
  cfg.pdhg.tol = r.num("pdhg.tol", 1e-5, "reference stopping tolerance");
  cfg.pdhg.kmax = r.integer("pdhg.kmax", 1000, "reference iteration cap");
  cfg.diagnostics = r.boolean("pdhg.diagnostics", false, "diagnostics cost extra solves");

  if (r.has("gd.eta")) {
    cfg.gd.eta = r.num("gd.eta", 0.0, "");
  } else {
    spec.provenance.push_back("gd.eta defaulted to 1/(||L L*|| + tau), resolved at run time");
  }
  cfg.gd.tau = r.num("gd.tau", cfg.pdhg.tau, "shared with pdhg.tau");
  cfg.gd.beta = r.num("gd.beta", cfg.pdhg.beta, "shared with pdhg.beta");
  cfg.gd.tol = r.num("gd.tol", cfg.pdhg.tol, "shared with pdhg.tol");
  cfg.gd.kmax = r.integer("gd.kmax", cfg.pdhg.kmax, "shared with pdhg.kmax");

  cfg.enhance_rel_threshold =
      r.num("enhance.rel_threshold", 0.1, "10% support floor separating atoms from deconvolution rings");

  if (r.has("init.u0")) cfg.init_u0_path = r.str("init.u0", "", "");
  else spec.provenance.push_back("init.u0 defaulted to the zero field");
  if (r.has("init.p")) cfg.init_p_path = r.str("init.p", "", "");
  else spec.provenance.push_back("init.p defaulted to the zero field");

  {
    const std::string variants = r.str("bench.variants", "cp,alg1,gd", "full comparison");
    std::string item;
    std::istringstream in(variants);
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      if (item != "cp" && item != "alg1" && item != "gd") {
        throw SemanticError("bench.variants entries must be cp, alg1 or gd; got '" + item + "'");
      }
      spec.bench_variants.push_back(item);
    }
    if (spec.bench_variants.empty()) {
      throw SemanticError("bench.variants must name at least one variant");
    }
  }

  {
    const std::string pairs =
        r.str("mesh.pairs", "0.1,0.05; 0.05,0.025", "reference mesh pairs");
    std::string item;
    std::istringstream in(pairs);
    while (std::getline(in, item, ';')) {
      item = trim(item);
      if (item.empty()) continue;
      const std::vector<double> v = to_numbers("mesh.pairs", item);
      if (v.size() != 2) {
        throw SemanticError("mesh.pairs entries expect 2 numbers: dt,dx");
      }
      spec.mesh_pairs.emplace_back(v[0], v[1]);
    }
  }

  r.check_unknown();

  // Structural checks that do not require the operator norm.
  try {
    cfg.nsteps();
    make_grid(cfg.lx, cfg.ly, cfg.dx, cfg.dy);
    if (cfg.algorithm == AlgorithmKind::Pdhg) {
      PdhgParams structural = cfg.pdhg;
      structural.s = 1e-300;  // rs check is deferred until opnorm is known
      validate_params(structural, 1.0);
    }
  } catch (const SemanticError&) {
    throw;
  } catch (const Error& e) {
    throw SemanticError(e.what());
  }

  return spec;
}

}  // namespace

ExperimentSpec parse_config_text(const std::string& text,
                                 const std::vector<std::string>& overrides) {
  std::istringstream in(text);
  KeyValues kv = parse_lines(in);
  apply_overrides(kv, overrides);
  return resolve(std::move(kv));
}

ExperimentSpec parse_config(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("config file '" + path.string() + "' cannot be opened");
  }
  KeyValues kv = parse_lines(in);
  apply_overrides(kv, overrides);
  return resolve(std::move(kv));
}

}  // namespace sparseid
