#include "wbrom/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wbrom/csv.hpp"
#include "wbrom/error.hpp"
#include "wbrom/parallel.hpp"
#include "wbrom/store.hpp"
#include "wbrom/transport1d.hpp"

namespace wbrom {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kModelSchemaVersion = 1;

std::string describe_y(const ExperimentConfig& config, const std::vector<double>& y) {
  std::ostringstream os;
  for (std::size_t i = 0; i < y.size(); ++i)
    os << (i ? ", " : "") << config.parameters[i].name << "=" << format_number(y[i]);
  return os.str();
}

// Only the inputs that change the snapshots; threads and output paths may
// differ between the original run and a resume.
std::string sweep_signature(const ExperimentConfig& config) {
  const json full = json::parse(config_to_json(config));
  json sig;
  for (const char* key : {"grid", "physics", "parameters", "snapshot_times_years"}) sig[key] = full.at(key);
  return sig.dump();
}

std::string sweep_signature_of_store(const fs::path& dir) {
  const json full = json::parse(stored_config_json(dir));
  json sig;
  for (const char* key : {"grid", "physics", "parameters", "snapshot_times_years"})
    if (full.contains(key)) sig[key] = full.at(key);
  return sig.dump();
}

void write_pending_manifest(const fs::path& dir, const ExperimentConfig& config) {
  json m;
  m["schema_version"] = kStoreSchemaVersion;
  m["config"] = json::parse(config_to_json(config));
  m["complete"] = false;
  write_text_file(dir / "manifest.json", m.dump(1) + "\n");
}

bool chunk_matches(const std::vector<Snapshot>& chunk, const ExperimentConfig& config,
                   const std::vector<double>& y) {
  if (chunk.size() != config.snapshot_times_years.size()) return false;
  for (std::size_t k = 0; k < chunk.size(); ++k) {
    if (chunk[k].z.t != config.snapshot_times_years[k] || chunk[k].z.y != y) return false;
    if (static_cast<std::size_t>(chunk[k].values.size()) != config.grid.n_cells) return false;
  }
  return true;
}

SnapshotSet assemble(const ExperimentConfig& config, std::vector<std::vector<Snapshot>>& runs) {
  SnapshotSet set;
  set.parameter_names = config.parameter_names();
  set.n_cells = config.grid.n_cells;
  set.snapshots.reserve(config.expected_snapshot_count());
  for (auto& run : runs)
    for (auto& s : run) set.snapshots.push_back(std::move(s));
  return set;
}

json point_json(const ParameterPoint& z) { return z.coordinates(); }

}  // namespace

std::vector<Snapshot> simulate_point(const ExperimentConfig& config, const std::vector<double>& y) {
  const FlowProblem problem = config.problem_for(y);
  std::vector<double> times_s;
  times_s.reserve(config.snapshot_times_years.size());
  for (const double t : config.snapshot_times_years) times_s.push_back(t * kSecondsPerYear);
  const SimulationResult sim = run_simulation(problem, times_s);

  std::vector<Snapshot> out(times_s.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].z = {config.snapshot_times_years[k], y};
    out[k].values = sim.saturations[k];
    out[k].mass = Snapshot::mass_of(out[k].values);
  }
  return out;
}

SnapshotSet simulate_sweep(const ExperimentConfig& config, std::size_t threads) {
  config.validate();
  const auto combos = config.parameter_combinations();
  std::vector<std::vector<Snapshot>> runs(combos.size());
  parallel_for(combos.size(), threads, [&](std::size_t c) {
    try {
      runs[c] = simulate_point(config, combos[c]);
    } catch (const Error& e) {
      throw Error(e.kind(), "simulation at " + describe_y(config, combos[c]) + ": " + e.what());
    }
  });
  return assemble(config, runs);
}

SnapshotSet generate_store(const ExperimentConfig& config, const fs::path& dir, const GenerateOptions& options) {
  config.validate();
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    if (sweep_signature_of_store(dir) != sweep_signature(config))
      throw Error(ErrorKind::Config, "store at " + dir.string() +
                                         " was generated from a different sweep; choose another output "
                                         "directory or remove it");
    try {
      SnapshotSet done = load_snapshot_store(dir);
      if (done.size() == config.expected_snapshot_count()) return done;
    } catch (const Error&) {
      // incomplete store: resume from the chunks below
    }
  }
  write_pending_manifest(dir, config);

  const auto combos = config.parameter_combinations();
  std::vector<std::vector<Snapshot>> runs(combos.size());
  std::vector<std::string> failures(combos.size());
  std::mutex report_mutex;
  parallel_for(combos.size(), options.threads, [&](std::size_t c) {
    const fs::path chunk = chunk_path(dir, c);
    bool reused = false;
    try {
      if (fs::exists(chunk)) {
        try {
          auto stored = read_chunk(chunk);
          if (chunk_matches(stored, config, combos[c])) {
            runs[c] = std::move(stored);
            reused = true;
          }
        } catch (const Error&) {
          // unreadable chunk (e.g. a write cut short): simulate again
        }
      }
      if (!reused) {
        runs[c] = simulate_point(config, combos[c]);
        write_chunk(chunk, runs[c]);
      }
    } catch (const std::exception& e) {
      failures[c] = describe_y(config, combos[c]) + ": " + e.what();
      runs[c].clear();
    }
    if (options.on_run) {
      std::lock_guard lock(report_mutex);
      options.on_run(c, combos.size(), reused);
    }
  });

  std::ostringstream msg;
  std::size_t n_failed = 0;
  for (const auto& f : failures) {
    if (f.empty()) continue;
    msg << "\n  " << f;
    ++n_failed;
  }
  if (n_failed > 0)
    throw Error(ErrorKind::Domain, std::to_string(n_failed) + " of " + std::to_string(combos.size()) +
                                       " parameter points failed (finished points are kept; rerun to resume):" +
                                       msg.str());

  SnapshotSet set = assemble(config, runs);
  write_snapshot_store(dir, config, set);
  std::error_code ec;
  fs::remove_all(dir / "runs", ec);
  return set;
}

std::vector<double> training_l1_errors(const SnapshotSet& set, std::span<const DiscreteIcdf> atoms,
                                       const std::vector<SimplexWeights>& weights, std::size_t threads) {
  if (weights.size() != set.size()) throw Error(ErrorKind::SizeMismatch, "one weight vector per snapshot expected");
  std::vector<double> err(set.size());
  parallel_for(set.size(), threads, [&](std::size_t k) {
    const Snapshot& s = set.snapshots[k];
    err[k] = relative_l1(s.values, reconstruct_profile(atoms, weights[k], s.mass, set.n_cells));
  });
  return err;
}

OfflineResult run_offline(const SnapshotSet& set, const GreedySettings& settings, const OfflineProgress& progress) {
  if (set.size() < 2) throw Error(ErrorKind::TooFewSnapshots, "offline training needs at least two snapshots");
  std::vector<DiscreteIcdf> icdfs(set.size());
  try {
    parallel_for(set.size(), settings.threads,
                 [&](std::size_t k) { icdfs[k] = snapshot_icdf(set.snapshots[k].values); });
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("icdf stage: ") + e.what());
  }
  const TrainingSet train = TrainingSet::from(icdfs, set.params());

  OfflineResult out;
  out.parameter_names = set.parameter_names;
  const auto on_iteration = [&](const Dictionary& dict, const StepResult& step) {
    const auto l1 = training_l1_errors(set, dict.atoms, step.weights, settings.threads);
    TrainingErrorRow row;
    row.n_atoms = dict.size();
    row.max_l1 = *std::max_element(l1.begin(), l1.end());
    double sum = 0.0;
    for (const double e : l1) sum += e;
    row.mean_l1 = sum / static_cast<double>(l1.size());
    row.mean_w2 = step.errors.mean();
    row.max_w2 = step.errors.maxCoeff();
    out.training_errors.push_back(row);
    if (progress) progress(row);
  };
  try {
    out.greedy = run_greedy(train, settings, on_iteration);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("greedy stage: ") + e.what());
  }
  try {
    out.model = fit(out.greedy.dictionary, set.params(), out.greedy.last.weights, set.masses(), set.n_cells);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("interpolation stage: ") + e.what());
  }
  return out;
}

void write_offline(const fs::path& dir, const OfflineResult& result) {
  const Dictionary& dict = result.greedy.dictionary;
  json d;
  d["parameter_names"] = result.parameter_names;
  d["n_atoms"] = dict.size();
  d["training_indices"] = dict.indices;
  json points = json::array();
  for (const auto& z : dict.atom_params) points.push_back(point_json(z));
  d["points"] = std::move(points);
  d["atom_file"] = "atoms.csv";
  write_text_file(dir / "dictionary.json", d.dump(1) + "\n");

  // Columnar atom file: probability node, then one column per atom.
  CsvWriter atoms;
  std::vector<std::string> header{"p"};
  for (std::size_t i = 0; i < dict.size(); ++i) header.push_back("atom_" + std::to_string(i + 1));
  atoms.row(header);
  if (!dict.atoms.empty()) {
    const Eigen::Index m = dict.atoms.front().size();
    const Eigen::VectorXd p = uniform_points(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) {
      std::vector<double> values;
      for (const auto& a : dict.atoms) values.push_back(a.values[j]);
      atoms.row(format_number(p[j]), values);
    }
  }
  write_text_file(dir / "atoms.csv", atoms.str());
  write_text_file(dir / "greedy_report.csv", report_csv(result.greedy.report));
  write_text_file(dir / "training_errors.csv", training_errors_csv(result.training_errors));
  write_text_file(dir / "model.json", model_to_json(result.model, result.parameter_names));
}

std::string model_to_json(const ReducedModel& model, const std::vector<std::string>& parameter_names) {
  json j;
  j["schema_version"] = kModelSchemaVersion;
  j["parameter_names"] = parameter_names;
  j["n_cells"] = model.n_cells;
  j["axes"] = model.grid.axes;
  const Dictionary& dict = model.dictionary;
  j["training_indices"] = dict.indices;
  json points = json::array();
  for (const auto& z : dict.atom_params) points.push_back(point_json(z));
  j["atom_points"] = std::move(points);
  json atoms = json::array();
  for (const auto& a : dict.atoms) atoms.push_back(std::vector<double>(a.values.data(), a.values.data() + a.size()));
  j["atoms"] = std::move(atoms);
  json weights = json::array();
  for (Eigen::Index c = 0; c < model.weight_table.cols(); ++c) {
    const Eigen::VectorXd w = model.weight_table.col(c);
    weights.push_back(std::vector<double>(w.data(), w.data() + w.size()));
  }
  j["weight_table"] = std::move(weights);
  j["mass_table"] = std::vector<double>(model.mass_table.data(), model.mass_table.data() + model.mass_table.size());
  return j.dump() + "\n";
}

ModelFile model_from_json(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::Io, "model: invalid JSON");
  try {
    if (j.at("schema_version").get<int>() != kModelSchemaVersion)
      throw Error(ErrorKind::Io, "model: unsupported schema version");
    ModelFile out;
    out.parameter_names = j.at("parameter_names").get<std::vector<std::string>>();
    ReducedModel& m = out.model;
    m.n_cells = j.at("n_cells").get<std::size_t>();
    m.grid.axes = j.at("axes").get<std::vector<std::vector<double>>>();
    const auto indices = j.at("training_indices").get<std::vector<std::size_t>>();
    const auto points = j.at("atom_points").get<std::vector<std::vector<double>>>();
    const auto atoms = j.at("atoms").get<std::vector<std::vector<double>>>();
    if (indices.size() != atoms.size() || points.size() != atoms.size())
      throw Error(ErrorKind::Io, "model: atom lists differ in length");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      DiscreteIcdf a{Eigen::Map<const Eigen::VectorXd>(atoms[i].data(), static_cast<Eigen::Index>(atoms[i].size()))};
      m.dictionary.add(indices[i], std::move(a), ParameterPoint::from_coordinates(points[i]));
    }
    const auto weights = j.at("weight_table").get<std::vector<std::vector<double>>>();
    const auto masses = j.at("mass_table").get<std::vector<double>>();
    const std::size_t nodes = m.grid.node_count();
    if (weights.size() != nodes || masses.size() != nodes)
      throw Error(ErrorKind::Io, "model: table size does not match the grid");
    const auto n = static_cast<Eigen::Index>(atoms.size());
    m.weight_table.resize(n, static_cast<Eigen::Index>(nodes));
    for (std::size_t c = 0; c < nodes; ++c) {
      if (weights[c].size() != atoms.size()) throw Error(ErrorKind::Io, "model: weight vector of wrong length");
      for (Eigen::Index i = 0; i < n; ++i) m.weight_table(i, static_cast<Eigen::Index>(c)) = weights[c][i];
    }
    m.mass_table = Eigen::Map<const Eigen::VectorXd>(masses.data(), static_cast<Eigen::Index>(nodes));
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, std::string("model: ") + e.what());
  }
}

ModelFile load_model(const fs::path& path) {
  try {
    return model_from_json(read_text_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string report_csv(const GreedyReport& report) {
  CsvWriter w;
  w.row({"iteration", "n_atoms", "delta", "mean_error", "condition", "volume", "nonconverged", "criterion"});
  for (std::size_t i = 0; i < report.iterations(); ++i) {
    const bool last = i + 1 == report.iterations();
    w.row({std::to_string(i + 1), std::to_string(report.n_atoms[i]), format_number(report.delta[i]),
           format_number(report.avg_error[i]), format_number(report.condition[i]),
           format_number(report.simplex_volume[i]), std::to_string(report.nonconverged[i]),
           last ? to_string(report.termination) : "continue"});
  }
  return w.str();
}

GreedyReport parse_report_csv(const std::string& text) {
  const CsvTable t = parse_csv(text);
  const std::size_t c_n = t.column("n_atoms"), c_d = t.column("delta"), c_m = t.column("mean_error"),
                    c_c = t.column("condition"), c_v = t.column("volume"), c_u = t.column("nonconverged"),
                    c_t = t.column("criterion");
  if (t.rows.empty()) throw Error(ErrorKind::Io, "greedy report is empty");
  GreedyReport r;
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw Error(ErrorKind::Io, "greedy report: ragged row");
    r.n_atoms.push_back(static_cast<std::size_t>(parse_number(row[c_n])));
    r.delta.push_back(parse_number(row[c_d]));
    r.avg_error.push_back(parse_number(row[c_m]));
    r.condition.push_back(parse_number(row[c_c]));
    r.simplex_volume.push_back(parse_number(row[c_v]));
    r.nonconverged.push_back(static_cast<std::size_t>(parse_number(row[c_u])));
  }
  const std::string& crit = t.rows.back()[c_t];
  bool known = false;
  for (const Termination term :
       {Termination::Absolute, Termination::Relative, Termination::MaxAtoms, Termination::Exhausted}) {
    if (to_string(term) == crit) {
      r.termination = term;
      known = true;
    }
  }
  if (!known) throw Error(ErrorKind::Io, "greedy report: unknown criterion '" + crit + "'");
  return r;
}

std::string training_errors_csv(const std::vector<TrainingErrorRow>& rows) {
  CsvWriter w;
  w.row({"n_atoms", "mean_l1", "max_l1", "mean_w2", "max_w2"});
  for (const auto& r : rows)
    w.row(std::to_string(r.n_atoms), {r.mean_l1, r.max_l1, r.mean_w2, r.max_w2});
  return w.str();
}

std::vector<TrainingErrorRow> parse_training_errors_csv(const std::string& text) {
  const CsvTable t = parse_csv(text);
  const std::size_t c_n = t.column("n_atoms"), c_m = t.column("mean_l1"), c_x = t.column("max_l1"),
                    c_mw = t.column("mean_w2"), c_xw = t.column("max_w2");
  std::vector<TrainingErrorRow> out;
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw Error(ErrorKind::Io, "training errors: ragged row");
    out.push_back({static_cast<std::size_t>(parse_number(row[c_n])), parse_number(row[c_m]),
                   parse_number(row[c_x]), parse_number(row[c_mw]), parse_number(row[c_xw])});
  }
  return out;
}

PodSummary run_pod(const SnapshotSet& set) {
  if (set.size() == 0) throw Error(ErrorKind::TooFewSnapshots, "POD needs at least one snapshot");
  const Eigen::MatrixXd s = set.matrix();
  PodSummary out;
  out.basis = compute_pod(s);
  out.curve = pod_error_curve(out.basis, s);
  return out;
}

std::string pod_errors_csv(const PodErrorCurve& curve) {
  CsvWriter w;
  w.row({"n_modes", "mean_l1", "max_l1"});
  for (std::size_t i = 0; i < curve.mean.size(); ++i)
    w.row(std::to_string(i + 1), {curve.mean[i], curve.max[i]});
  return w.str();
}

std::optional<std::size_t> atoms_for_tolerance(const std::vector<TrainingErrorRow>& rows, double eps, bool use_max) {
  for (const auto& r : rows)
    if ((use_max ? r.max_l1 : r.mean_l1) < eps) return r.n_atoms;
  return std::nullopt;
}

std::optional<std::size_t> pod_modes_for_tolerance(const PodErrorCurve& curve, double eps, bool use_max) {
  const auto& values = use_max ? curve.max : curve.mean;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] < eps) return i + 1;
  return std::nullopt;
}

std::vector<ToleranceRow> tolerance_table(const std::vector<double>& eps, const std::vector<TrainingErrorRow>* gbar,
                                          const PodErrorCurve* pod) {
  std::vector<ToleranceRow> out;
  for (const double e : eps) {
    ToleranceRow r;
    r.eps = e;
    if (gbar) {
      r.n_gbar = atoms_for_tolerance(*gbar, e, false);
      r.n_gbar_max = atoms_for_tolerance(*gbar, e, true);
    }
    if (pod) {
      r.n_pod = pod_modes_for_tolerance(*pod, e, false);
      r.n_pod_max = pod_modes_for_tolerance(*pod, e, true);
    }
    out.push_back(r);
  }
  return out;
}

std::string tolerance_table_csv(const std::vector<ToleranceRow>& rows, bool with_gbar, bool with_pod) {
  const auto cell = [](const std::optional<std::size_t>& n) { return n ? std::to_string(*n) : std::string("-"); };
  CsvWriter w;
  std::vector<std::string> header{"eps"};
  if (with_gbar) header.push_back("n_gbar");
  if (with_pod) header.push_back("n_pod");
  if (with_gbar) header.push_back("n_gbar_max");
  if (with_pod) header.push_back("n_pod_max");
  w.row(header);
  for (const auto& r : rows) {
    std::vector<std::string> cells{format_number(r.eps)};
    if (with_gbar) cells.push_back(cell(r.n_gbar));
    if (with_pod) cells.push_back(cell(r.n_pod));
    if (with_gbar) cells.push_back(cell(r.n_gbar_max));
    if (with_pod) cells.push_back(cell(r.n_pod_max));
    w.row(cells);
  }
  return w.str();
}

}  // namespace wbrom
