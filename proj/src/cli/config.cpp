#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "ergobound/cli.hpp"

namespace ergobound::cli {

namespace {

void CheckKeys(const YAML::Node& node, const std::string& where,
               const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw UsageError(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw UsageError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T Get(const YAML::Node& node, const std::string& where) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw UsageError(where + ": bad value");
  }
}

template <typename T>
void Read(const YAML::Node& parent, const char* key, const std::string& where, T& out) {
  if (parent[key]) out = Get<T>(parent[key], where + "." + key);
}

std::vector<int> CheckDegrees(std::vector<int> degrees, const std::string& where) {
  for (int d : degrees) {
    if (d < 2 || d % 2 != 0) {
      throw UsageError(where + ": degrees must be even and >= 2 (got " + std::to_string(d) + ")");
    }
  }
  return degrees;
}

PolySystem ParseSystem(const YAML::Node& node) {
  CheckKeys(node, "system", {"builtin", "parameters", "variables", "components", "name"});
  std::map<std::string, double> params;
  Read(node, "parameters", "system", params);
  if (node["builtin"]) {
    const auto name = Get<std::string>(node["builtin"], "system.builtin");
    if (name != "lorenz") throw UsageError("system.builtin: unknown system '" + name + "'");
    LorenzParameters p;
    for (const auto& [k, v] : params) {
      if (k == "beta") p.beta = v;
      else if (k == "sigma") p.sigma = v;
      else if (k == "r") p.r = v;
      else throw UsageError("system.parameters: lorenz has no parameter '" + k + "'");
    }
    if (node["components"] || node["variables"]) {
      throw UsageError("system: give either builtin or components, not both");
    }
    return PolySystem::Lorenz(p);
  }
  if (!node["components"] || !node["variables"]) {
    throw UsageError("system: need builtin, or variables and components");
  }
  const auto vars = Get<std::vector<std::string>>(node["variables"], "system.variables");
  const auto comps = Get<std::vector<std::string>>(node["components"], "system.components");
  if (vars.empty() || vars.size() != comps.size()) {
    throw UsageError("system: need one component per variable");
  }
  std::vector<Polynomial> f;
  for (const auto& c : comps) {
    try {
      f.push_back(ParsePolynomial(c, vars, params));
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("system.components: ") + e.what());
    }
  }
  std::string name = "custom";
  Read(node, "name", "system", name);
  return PolySystem(std::move(f), vars, params, name);
}

}  // namespace

ExperimentConfig ParseConfig(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  if (!root.IsMap()) throw UsageError("config: top level must be a mapping");
  CheckKeys(root, "config", {"system", "phi", "bound", "orbits", "region", "trace", "output"});

  ExperimentConfig cfg;
  if (!root["system"]) throw UsageError("config: missing 'system'");
  cfg.system = ParseSystem(root["system"]);
  if (!root["phi"]) throw UsageError("config: missing 'phi'");
  cfg.phi_text = Get<std::string>(root["phi"], "phi");
  try {
    cfg.phi = ParsePolynomial(cfg.phi_text, cfg.system.variable_names(), cfg.system.parameters());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("phi: ") + e.what());
  }
  Read(root, "output", "config", cfg.output_dir);

  const bool lorenz = cfg.system.name() == "lorenz";
  if (lorenz) {
    LorenzParameters p;
    p.r = cfg.system.parameters().at("r");
    cfg.section = SectionSpec::LorenzDefault(p);
  }

  if (const auto b = root["bound"]) {
    CheckKeys(b, "bound", {"degrees", "scaling", "normalize_objective", "ball", "solver",
                           "tolerances"});
    Read(b, "degrees", "bound", cfg.degrees);
    Read(b, "normalize_objective", "bound", cfg.sos.normalize_objective);
    if (const auto s = b["scaling"]) {
      const int d = cfg.system.dim();
      if (s.IsScalar()) {
        const auto kind = Get<std::string>(s, "bound.scaling");
        if (kind == "identity") cfg.sos.scaling = VariableScaling::Identity(d);
        else if (kind != "default") throw UsageError("bound.scaling: use default, identity or a list");
      } else {
        VariableScaling vs;
        vs.scales = Get<std::vector<double>>(s, "bound.scaling");
        vs.shifts.assign(d, 0.0);
        if (static_cast<int>(vs.scales.size()) != d) throw UsageError("bound.scaling: wrong length");
        cfg.sos.scaling = vs;
      }
    }
    if (const auto ball = b["ball"]) {
      CheckKeys(ball, "bound.ball", {"center", "radius"});
      BallConstraint bc;
      Read(ball, "center", "bound.ball", bc.center);
      Read(ball, "radius", "bound.ball", bc.radius);
      if (static_cast<int>(bc.center.size()) != cfg.system.dim() || !(bc.radius > 0.0)) {
        throw UsageError("bound.ball: need a center of the system's dimension and radius > 0");
      }
      cfg.sos.ball = bc;
    }
    if (const auto s = b["solver"]) {
      CheckKeys(s, "bound.solver", {"gap_tol", "feas_tol", "max_iterations", "step_fraction",
                                    "verbosity"});
      Read(s, "gap_tol", "bound.solver", cfg.sdp.gap_tol);
      Read(s, "feas_tol", "bound.solver", cfg.sdp.feas_tol);
      Read(s, "max_iterations", "bound.solver", cfg.sdp.max_iterations);
      Read(s, "step_fraction", "bound.solver", cfg.sdp.step_fraction);
      Read(s, "verbosity", "bound.solver", cfg.sdp.verbosity);
    }
    if (const auto t = b["tolerances"]) {
      CheckKeys(t, "bound.tolerances", {"psd", "fit"});
      Read(t, "psd", "bound.tolerances", cfg.tolerances.tol_psd);
      Read(t, "fit", "bound.tolerances", cfg.tolerances.tol_fit);
    }
  }
  cfg.degrees = CheckDegrees(cfg.degrees, "bound.degrees");

  if (const auto o = root["orbits"]) {
    CheckKeys(o, "orbits", {"symbols", "section", "seeds", "shooting"});
    Read(o, "symbols", "orbits", cfg.orbits);
    if (const auto s = o["section"]) {
      CheckKeys(s, "orbits.section", {"normal", "offset", "direction"});
      Read(s, "normal", "orbits.section", cfg.section.normal);
      Read(s, "offset", "orbits.section", cfg.section.offset);
      Read(s, "direction", "orbits.section", cfg.section.direction);
    }
    if (const auto s = o["seeds"]) {
      CheckKeys(s, "orbits.seeds", {"run_length", "spinup", "initial_state", "tol",
                                    "max_candidates", "attempts", "confidence_distance"});
      Read(s, "run_length", "orbits.seeds", cfg.seed_run_length);
      Read(s, "spinup", "orbits.seeds", cfg.seeds.spinup);
      Read(s, "initial_state", "orbits.seeds", cfg.seeds.initial_state);
      Read(s, "tol", "orbits.seeds", cfg.seeds.tol);
      Read(s, "max_candidates", "orbits.seeds", cfg.seeds.max_candidates);
      Read(s, "attempts", "orbits.seeds", cfg.seed_attempts);
      Read(s, "confidence_distance", "orbits.seeds", cfg.seeds.confidence_distance);
    }
    if (const auto s = o["shooting"]) {
      CheckKeys(s, "orbits.shooting", {"integration_tol", "tol", "accept_tol", "max_iterations",
                                       "fd_step", "max_period"});
      Read(s, "integration_tol", "orbits.shooting", cfg.shooting.integration_tol);
      Read(s, "tol", "orbits.shooting", cfg.shooting.tol);
      Read(s, "accept_tol", "orbits.shooting", cfg.shooting.accept_tol);
      Read(s, "max_iterations", "orbits.shooting", cfg.shooting.max_iterations);
      Read(s, "fd_step", "orbits.shooting", cfg.shooting.fd_step);
      Read(s, "max_period", "orbits.shooting", cfg.shooting.max_period);
    }
    if (!cfg.orbits.empty()) {
      if (cfg.section.normal.empty()) throw UsageError("orbits: a section is required");
      try {
        cfg.section.Validate(cfg.system.dim());
        for (const auto& s : cfg.orbits) NormalizeSymbols(s);
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("orbits: ") + e.what());
      }
      if (static_cast<int>(cfg.seeds.initial_state.size()) != cfg.system.dim()) {
        throw UsageError("orbits.seeds.initial_state: wrong dimension");
      }
    }
  }

  const int d = cfg.system.dim();
  if (lorenz) {
    cfg.region_box = {{-25.0, 25.0}, {-25.0, 25.0}, {0.0, 60.0}};
    cfg.region_resolution = {121, 121, 121};
  }
  if (const auto r = root["region"]) {
    CheckKeys(r, "region", {"box", "resolution", "M", "degrees", "threads"});
    if (r["box"]) {
      const auto rows = Get<std::vector<std::vector<double>>>(r["box"], "region.box");
      cfg.region_box.clear();
      for (const auto& row : rows) {
        if (row.size() != 2 || !(row[1] > row[0])) {
          throw UsageError("region.box: each axis needs [low, high] with low < high");
        }
        cfg.region_box.emplace_back(row[0], row[1]);
      }
    }
    if (r["resolution"]) {
      if (r["resolution"].IsScalar()) {
        cfg.region_resolution.assign(d, Get<int>(r["resolution"], "region.resolution"));
      } else {
        cfg.region_resolution = Get<std::vector<int>>(r["resolution"], "region.resolution");
      }
    }
    if (r["M"]) {
      cfg.region_M = r["M"].IsScalar()
                         ? std::vector<double>{Get<double>(r["M"], "region.M")}
                         : Get<std::vector<double>>(r["M"], "region.M");
    }
    Read(r, "degrees", "region", cfg.region_degrees);
    Read(r, "threads", "region", cfg.region_threads);
  }
  if (static_cast<int>(cfg.region_box.size()) != d && !cfg.region_box.empty()) {
    throw UsageError("region.box: wrong dimension");
  }
  for (int res : cfg.region_resolution) {
    if (res < 2) throw UsageError("region.resolution: must be >= 2 on every axis");
  }
  for (double M : cfg.region_M) {
    if (!(M > 0.0)) throw UsageError("region.M: thresholds must be positive");
  }
  cfg.region_degrees = CheckDegrees(cfg.region_degrees, "region.degrees");

  if (const auto t = root["trace"]) {
    CheckKeys(t, "trace", {"degrees", "M"});
    Read(t, "degrees", "trace", cfg.trace_degrees);
    if (t["M"]) {
      cfg.trace_M = t["M"].IsScalar() ? std::vector<double>{Get<double>(t["M"], "trace.M")}
                                      : Get<std::vector<double>>(t["M"], "trace.M");
    }
  }
  for (double M : cfg.trace_M) {
    if (!(M > 0.0)) throw UsageError("trace.M: thresholds must be positive");
  }
  cfg.trace_degrees = CheckDegrees(cfg.trace_degrees, "trace.degrees");
  return cfg;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str());
}

}  // namespace ergobound::cli
