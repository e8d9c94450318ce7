#include "wbrom/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "wbrom/csv.hpp"
#include "wbrom/error.hpp"

namespace wbrom {

using nlohmann::json;

namespace {

const std::set<std::string> kAxisNames{"mu_ratio", "beta", "k_lp", "gamma"};

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::Config, "config: " + msg); }

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) fail("unknown key '" + key + "' in " + where);
  }
}

double get_number(const json& obj, const std::string& key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where + "." + key + " must be a number");
  return v.get<double>();
}

std::vector<double> get_numbers(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(where + " must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

// Equispaced times are rounded to 12 significant digits so that 0.2 * 3
// reads back as 0.6.
double tidy(double v) {
  if (v == 0.0) return 0.0;
  const double scale = std::pow(10.0, 11 - std::floor(std::log10(std::abs(v))));
  return std::round(v * scale) / scale;
}

std::vector<double> parse_times(const json& v) {
  if (v.is_array()) return get_numbers(v, "snapshot_times_years");
  check_keys(v, "snapshot_times_years", {"start", "step", "count"});
  if (!v.contains("start") || !v.contains("step") || !v.contains("count"))
    fail("snapshot_times_years needs start, step and count");
  const double start = get_number(v, "start", "snapshot_times_years", 0.0);
  const double step = get_number(v, "step", "snapshot_times_years", 0.0);
  if (!v.at("count").is_number_unsigned()) fail("snapshot_times_years.count must be a nonnegative integer");
  const auto count = v.at("count").get<std::size_t>();
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = tidy(start + static_cast<double>(k) * step);
  return out;
}

bool strictly_increasing(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(a < b); }) == v.end();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (schema_version != kConfigSchemaVersion)
    fail("unsupported schema_version " + std::to_string(schema_version) + " (expected " +
         std::to_string(kConfigSchemaVersion) + ")");
  if (!(grid.n_cells >= 2)) fail("grid.n_cells must be at least 2");
  if (!(grid.x_max_km > grid.x_min_km)) fail("grid.x_max_km must exceed grid.x_min_km");

  const PhysicsSpec& ph = physics;
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(std::string("physics.") + name + " must be positive");
  };
  positive(ph.permeability_left, "permeability_left");
  positive(ph.permeability_right, "permeability_right");
  positive(ph.fluids.mu_w, "mu_w");
  positive(ph.fluids.mu_nw, "mu_nw");
  positive(ph.fluids.beta, "beta");
  if (!(ph.porosity_left > 0.0 && ph.porosity_left <= 1.0)) fail("physics.porosity_left must lie in (0, 1]");
  if (!(ph.porosity_right > 0.0 && ph.porosity_right <= 1.0)) fail("physics.porosity_right must lie in (0, 1]");
  if (!(ph.interface >= 0.0 && ph.interface <= 1.0)) fail("physics.interface must lie in [0, 1]");
  if (!(ph.bc.s_inflow >= 0.0 && ph.bc.s_inflow <= 1.0)) fail("physics.s_inflow must lie in [0, 1]");
  if (!(ph.bc.s_initial >= 0.0 && ph.bc.s_initial <= 1.0)) fail("physics.s_initial must lie in [0, 1]");
  if (!std::isfinite(ph.bc.p_left) || !std::isfinite(ph.bc.p_right)) fail("physics pressures must be finite");
  if (!(ph.cfl_safety > 0.0 && ph.cfl_safety <= 1.0)) fail("physics.cfl_safety must lie in (0, 1]");

  if (parameters.empty()) fail("parameters must list at least one axis");
  std::set<std::string> seen;
  for (const ParameterAxis& axis : parameters) {
    if (!kAxisNames.count(axis.name))
      fail("unknown parameter axis '" + axis.name + "' (expected mu_ratio, beta, k_lp or gamma)");
    if (!seen.insert(axis.name).second) fail("parameter axis '" + axis.name + "' listed twice");
    if (axis.values.empty()) fail("parameter axis '" + axis.name + "' has no values");
    if (!strictly_increasing(axis.values))
      fail("values of parameter axis '" + axis.name + "' must be strictly increasing");
    for (const double v : axis.values) {
      if (axis.name == "gamma") {
        if (!(v >= 0.0 && v <= 1.0)) fail("gamma values must lie in [0, 1]");
      } else if (!(v > 0.0) || !std::isfinite(v)) {
        fail("values of parameter axis '" + axis.name + "' must be positive");
      }
    }
  }

  if (snapshot_times_years.empty()) fail("snapshot_times_years must not be empty");
  if (!strictly_increasing(snapshot_times_years)) fail("snapshot_times_years must be strictly increasing");
  if (!(snapshot_times_years.front() > 0.0)) fail("snapshot_times_years must be positive");

  if (greedy.n_max < 2) fail("greedy.n_max must be at least 2");
  if (!(greedy.eps_abs >= 0.0)) fail("greedy.eps_abs must be nonnegative");
  if (greedy.eps_rel && !(*greedy.eps_rel > 0.0)) fail("greedy.eps_rel must be positive or null");
  if (!(greedy.qp.tol > 0.0)) fail("qp.tol must be positive");
  if (greedy.qp.max_iter == 0) fail("qp.max_iter must be positive");
  for (const double eps : tolerances)
    if (!(eps > 0.0)) fail("tolerances must be positive");
}

std::vector<std::string> ExperimentConfig::parameter_names() const {
  std::vector<std::string> out;
  for (const auto& axis : parameters) out.push_back(axis.name);
  return out;
}

std::vector<std::vector<double>> ExperimentConfig::parameter_combinations() const {
  std::vector<std::vector<double>> out{{}};
  for (const ParameterAxis& axis : parameters) {
    std::vector<std::vector<double>> next;
    next.reserve(out.size() * axis.values.size());
    for (const auto& prefix : out) {
      for (const double v : axis.values) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    }
    out = std::move(next);
  }
  return out;
}

FlowProblem ExperimentConfig::problem_for(const std::vector<double>& y) const {
  if (y.size() != parameters.size())
    throw Error(ErrorKind::SizeMismatch, "parameter vector has " + std::to_string(y.size()) +
                                             " entries, config has " + std::to_string(parameters.size()) +
                                             " axes");
  PhysicsSpec ph = physics;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::string& name = parameters[i].name;
    if (name == "mu_ratio") ph.fluids.mu_nw = y[i] * ph.fluids.mu_w;
    else if (name == "beta") ph.fluids.beta = y[i];
    else if (name == "k_lp") ph.permeability_right = y[i];
    else if (name == "gamma") ph.interface = y[i];
  }
  FlowProblem p;
  p.grid = grid;
  p.rock = RockField::two_rock(grid, ph.porosity_left, ph.permeability_left, ph.porosity_right,
                               ph.permeability_right, ph.interface);
  p.fluids = ph.fluids;
  p.bc = ph.bc;
  p.cfl_safety = ph.cfl_safety;
  return p;
}

std::size_t ExperimentConfig::expected_snapshot_count() const {
  std::size_t n = snapshot_times_years.size();
  for (const auto& axis : parameters) n *= axis.values.size();
  return n;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  check_keys(root, "root",
             {"schema_version", "name", "grid", "physics", "parameters", "snapshot_times_years", "greedy", "qp",
              "tolerances", "threads", "output_dir"});

  ExperimentConfig c;
  if (!root.contains("schema_version") || !root.at("schema_version").is_number_integer())
    fail("schema_version (integer) is required");
  c.schema_version = root.at("schema_version").get<int>();
  if (c.schema_version != kConfigSchemaVersion)
    fail("unsupported schema_version " + std::to_string(c.schema_version));
  if (root.contains("name")) {
    if (!root.at("name").is_string()) fail("name must be a string");
    c.name = root.at("name").get<std::string>();
  }

  if (root.contains("grid")) {
    const json& g = root.at("grid");
    check_keys(g, "grid", {"x_min_km", "x_max_km", "n_cells"});
    c.grid.x_min_km = get_number(g, "x_min_km", "grid", c.grid.x_min_km);
    c.grid.x_max_km = get_number(g, "x_max_km", "grid", c.grid.x_max_km);
    if (g.contains("n_cells")) {
      if (!g.at("n_cells").is_number_unsigned()) fail("grid.n_cells must be a positive integer");
      c.grid.n_cells = g.at("n_cells").get<std::size_t>();
    }
  }

  if (root.contains("physics")) {
    const json& p = root.at("physics");
    check_keys(p, "physics",
               {"porosity_left", "permeability_left", "porosity_right", "permeability_right", "interface", "mu_w",
                "mu_nw", "beta", "p_left", "p_right", "s_inflow", "s_initial", "cfl_safety"});
    PhysicsSpec& ph = c.physics;
    ph.porosity_left = get_number(p, "porosity_left", "physics", ph.porosity_left);
    ph.permeability_left = get_number(p, "permeability_left", "physics", ph.permeability_left);
    ph.porosity_right = get_number(p, "porosity_right", "physics", ph.porosity_right);
    ph.permeability_right = get_number(p, "permeability_right", "physics", ph.permeability_right);
    ph.interface = get_number(p, "interface", "physics", ph.interface);
    ph.fluids.mu_w = get_number(p, "mu_w", "physics", ph.fluids.mu_w);
    ph.fluids.mu_nw = get_number(p, "mu_nw", "physics", ph.fluids.mu_nw);
    ph.fluids.beta = get_number(p, "beta", "physics", ph.fluids.beta);
    ph.bc.p_left = get_number(p, "p_left", "physics", ph.bc.p_left);
    ph.bc.p_right = get_number(p, "p_right", "physics", ph.bc.p_right);
    ph.bc.s_inflow = get_number(p, "s_inflow", "physics", ph.bc.s_inflow);
    ph.bc.s_initial = get_number(p, "s_initial", "physics", ph.bc.s_initial);
    ph.cfl_safety = get_number(p, "cfl_safety", "physics", ph.cfl_safety);
  }

  if (!root.contains("parameters") || !root.at("parameters").is_array())
    fail("parameters (array of {name, values}) is required");
  for (const json& a : root.at("parameters")) {
    check_keys(a, "parameters[]", {"name", "values"});
    if (!a.contains("name") || !a.at("name").is_string()) fail("every parameter axis needs a string name");
    if (!a.contains("values")) fail("parameter axis '" + a.at("name").get<std::string>() + "' needs values");
    c.parameters.push_back({a.at("name").get<std::string>(),
                            get_numbers(a.at("values"), "parameters." + a.at("name").get<std::string>())});
  }

  if (!root.contains("snapshot_times_years")) fail("snapshot_times_years is required");
  c.snapshot_times_years = parse_times(root.at("snapshot_times_years"));

  if (root.contains("greedy")) {
    const json& g = root.at("greedy");
    check_keys(g, "greedy", {"eps_abs", "eps_rel", "n_max"});
    c.greedy.eps_abs = get_number(g, "eps_abs", "greedy", c.greedy.eps_abs);
    if (g.contains("eps_rel") && !g.at("eps_rel").is_null())
      c.greedy.eps_rel = get_number(g, "eps_rel", "greedy", 0.0);
    if (g.contains("n_max")) {
      if (!g.at("n_max").is_number_unsigned()) fail("greedy.n_max must be a positive integer");
      c.greedy.n_max = g.at("n_max").get<std::size_t>();
    }
  }
  if (root.contains("qp")) {
    const json& q = root.at("qp");
    check_keys(q, "qp", {"tol", "max_iter"});
    c.greedy.qp.tol = get_number(q, "tol", "qp", c.greedy.qp.tol);
    if (q.contains("max_iter")) {
      if (!q.at("max_iter").is_number_unsigned()) fail("qp.max_iter must be a positive integer");
      c.greedy.qp.max_iter = q.at("max_iter").get<std::size_t>();
    }
  }
  if (root.contains("tolerances")) c.tolerances = get_numbers(root.at("tolerances"), "tolerances");
  if (root.contains("output_dir")) {
    if (!root.at("output_dir").is_string()) fail("output_dir must be a string");
    c.output_dir = root.at("output_dir").get<std::string>();
  }
  if (root.contains("threads")) {
    if (!root.at("threads").is_number_unsigned()) fail("threads must be a nonnegative integer");
    c.greedy.threads = root.at("threads").get<std::size_t>();
  }

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_config(text);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& c) {
  json root;
  root["schema_version"] = c.schema_version;
  root["name"] = c.name;
  root["grid"] = {{"x_min_km", c.grid.x_min_km}, {"x_max_km", c.grid.x_max_km}, {"n_cells", c.grid.n_cells}};
  const PhysicsSpec& ph = c.physics;
  root["physics"] = {{"porosity_left", ph.porosity_left},
                     {"permeability_left", ph.permeability_left},
                     {"porosity_right", ph.porosity_right},
                     {"permeability_right", ph.permeability_right},
                     {"interface", ph.interface},
                     {"mu_w", ph.fluids.mu_w},
                     {"mu_nw", ph.fluids.mu_nw},
                     {"beta", ph.fluids.beta},
                     {"p_left", ph.bc.p_left},
                     {"p_right", ph.bc.p_right},
                     {"s_inflow", ph.bc.s_inflow},
                     {"s_initial", ph.bc.s_initial},
                     {"cfl_safety", ph.cfl_safety}};
  root["parameters"] = json::array();
  for (const auto& axis : c.parameters) root["parameters"].push_back({{"name", axis.name}, {"values", axis.values}});
  root["snapshot_times_years"] = c.snapshot_times_years;
  root["greedy"] = {{"eps_abs", c.greedy.eps_abs},
                    {"eps_rel", c.greedy.eps_rel ? json(*c.greedy.eps_rel) : json(nullptr)},
                    {"n_max", c.greedy.n_max}};
  root["qp"] = {{"tol", c.greedy.qp.tol}, {"max_iter", c.greedy.qp.max_iter}};
  root["tolerances"] = c.tolerances;
  root["threads"] = c.greedy.threads;
  root["output_dir"] = c.output_dir;
  return root.dump(2) + "\n";
}

}  // namespace wbrom
