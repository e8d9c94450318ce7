// wbrom: command line driver for snapshot generation, offline training,
// online evaluation, the POD baseline and diagnostic output.
//
// Output layout under --out (default: output_dir from the config):
//   store/      snapshot store (generate)
//   offline/    dictionary, report, training errors, model (offline)
//   pod/        POD error curve and table (pod)
//   online/     reconstructions and errors (online)
//   diag/       condition and volume series (diag)
//   landscape/  energy landscape grids (landscape)
//   tables.csv  atoms and modes per tolerance (tables)

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "wbrom/config.hpp"
#include "wbrom/csv.hpp"
#include "wbrom/diagnostics.hpp"
#include "wbrom/error.hpp"
#include "wbrom/experiment.hpp"
#include "wbrom/simplex_qp.hpp"
#include "wbrom/store.hpp"
#include "wbrom/transport1d.hpp"

namespace fs = std::filesystem;
using namespace wbrom;

namespace {

struct Common {
  std::string config_path;
  std::string out;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> n_max;
  std::optional<double> qp_tol;
  std::vector<double> eps;
  bool quiet = false;
};

struct Context {
  ExperimentConfig config;
  fs::path out;
  bool quiet = false;

  fs::path store() const { return out / "store"; }
  fs::path offline() const { return out / "offline"; }
  std::vector<double> tolerances() const { return config.tolerances; }

  void log(const std::string& msg) const {
    if (!quiet) std::cerr << msg << '\n';
  }
};

// Loads and validates the config before any command does real work.
Context prepare(const Common& c) {
  Context ctx;
  ctx.config = load_config(c.config_path);
  if (c.threads) ctx.config.greedy.threads = *c.threads;
  if (c.n_max) ctx.config.greedy.n_max = *c.n_max;
  if (c.qp_tol) ctx.config.greedy.qp.tol = *c.qp_tol;
  if (!c.eps.empty()) ctx.config.tolerances = c.eps;
  ctx.config.validate();
  if (!c.out.empty()) ctx.out = c.out;
  else if (!ctx.config.output_dir.empty()) ctx.out = ctx.config.output_dir;
  else ctx.out = fs::path("out") / (ctx.config.name.empty() ? "experiment" : ctx.config.name);
  ctx.quiet = c.quiet;
  return ctx;
}

void write_file(const Context& ctx, const fs::path& path, const std::string& text) {
  write_text_file(path, text);
  ctx.log("wrote " + path.string());
}

int cmd_generate(const Context& ctx) {
  GenerateOptions opt;
  opt.threads = ctx.config.greedy.threads;
  opt.on_run = [&](std::size_t i, std::size_t total, bool reused) {
    ctx.log("run " + std::to_string(i + 1) + "/" + std::to_string(total) + (reused ? " (reused)" : ""));
  };
  const SnapshotSet set = generate_store(ctx.config, ctx.store(), opt);
  ctx.log("store " + ctx.store().string() + ": " + std::to_string(set.size()) + " snapshots");
  return 0;
}

int cmd_offline(const Context& ctx) {
  const SnapshotSet set = load_snapshot_store(ctx.store());
  const OfflineResult result = run_offline(set, ctx.config.greedy, [&](const TrainingErrorRow& r) {
    ctx.log("n=" + std::to_string(r.n_atoms) + " max W2 " + format_number(r.max_w2) + " mean L1 " +
            format_number(r.mean_l1));
  });
  write_offline(ctx.offline(), result);
  ctx.log("termination: " + to_string(result.greedy.report.termination));
  return 0;
}

std::vector<ParameterPoint> read_points(const fs::path& path, const std::vector<std::string>& names) {
  const CsvTable t = parse_csv(read_text_file(path));
  const std::size_t ct = t.column("t");
  std::vector<std::size_t> cols;
  for (const auto& n : names) cols.push_back(t.column(n));
  std::vector<ParameterPoint> out;
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw Error(ErrorKind::Io, path.string() + ": ragged row");
    ParameterPoint z;
    z.t = parse_number(row[ct]);
    for (const std::size_t c : cols) z.y.push_back(parse_number(row[c]));
    out.push_back(std::move(z));
  }
  return out;
}

int cmd_online(const Context& ctx, const std::string& points_path, std::string model_path, bool clamp) {
  if (model_path.empty()) model_path = (ctx.offline() / "model.json").string();
  const ModelFile mf = load_model(model_path);
  const auto points = read_points(points_path, mf.parameter_names);

  std::optional<SnapshotSet> truth;
  if (fs::exists(ctx.store() / "manifest.json")) truth = load_snapshot_store(ctx.store());

  std::vector<std::string> header{"t"};
  header.insert(header.end(), mf.parameter_names.begin(), mf.parameter_names.end());
  CsvWriter recon;
  CsvWriter errors;
  {
    auto h = header;
    h.push_back("mass");
    for (std::size_t i = 0; i < mf.model.n_cells; ++i) h.push_back("s_" + std::to_string(i));
    recon.row(h);
    auto he = header;
    he.push_back("relative_l1");
    errors.row(he);
  }
  for (const auto& z : points) {
    const Reconstruction r = reconstruct(mf.model, z, clamp ? Extrapolation::Clamp : Extrapolation::Error);
    std::vector<std::string> cells;
    for (const double c : z.coordinates()) cells.push_back(format_number(c));
    auto rc = cells;
    rc.push_back(format_number(r.mass));
    for (Eigen::Index i = 0; i < r.values.size(); ++i) rc.push_back(format_number(r.values[i]));
    recon.row(rc);
    if (truth) {
      std::string err = "-";
      for (const Snapshot& s : truth->snapshots)
        if (s.z == z) err = format_number(relative_l1(s.values, r.values));
      cells.push_back(err);
      errors.row(cells);
    }
  }
  write_file(ctx, ctx.out / "online" / "reconstructions.csv", recon.str());
  if (truth) write_file(ctx, ctx.out / "online" / "errors.csv", errors.str());
  return 0;
}

int cmd_pod(const Context& ctx, bool export_basis) {
  const SnapshotSet set = load_snapshot_store(ctx.store());
  const PodSummary pod = run_pod(set);
  const fs::path dir = ctx.out / "pod";
  write_file(ctx, dir / "pod_errors.csv", pod_errors_csv(pod.curve));
  write_file(ctx, dir / "pod_table.csv",
             tolerance_table_csv(tolerance_table(ctx.tolerances(), nullptr, &pod.curve), false, true));
  if (export_basis) {
    CsvWriter sv;
    sv.row({"index", "singular_value"});
    for (Eigen::Index i = 0; i < pod.basis.singular_values.size(); ++i)
      sv.row(std::to_string(i + 1), {pod.basis.singular_values[i]});
    write_file(ctx, dir / "singular_values.csv", sv.str());
    CsvWriter modes;
    std::vector<std::string> h{"x"};
    for (Eigen::Index j = 0; j < pod.basis.rank(); ++j) h.push_back("mode_" + std::to_string(j + 1));
    modes.row(h);
    const Eigen::VectorXd x = ctx.config.grid.unit_centers();
    for (Eigen::Index i = 0; i < pod.basis.modes.rows(); ++i) {
      std::vector<double> row;
      for (Eigen::Index j = 0; j < pod.basis.rank(); ++j) row.push_back(pod.basis.modes(i, j));
      modes.row(format_number(x[i]), row);
    }
    write_file(ctx, dir / "modes.csv", modes.str());
  }
  return 0;
}

int cmd_tables(const Context& ctx) {
  const SnapshotSet set = load_snapshot_store(ctx.store());
  const auto gbar = parse_training_errors_csv(read_text_file(ctx.offline() / "training_errors.csv"));
  const PodSummary pod = run_pod(set);
  const auto rows = tolerance_table(ctx.tolerances(), &gbar, &pod.curve);
  write_file(ctx, ctx.out / "tables.csv", tolerance_table_csv(rows, true, true));
  if (!ctx.quiet) std::cout << tolerance_table_csv(rows, true, true);
  return 0;
}

int cmd_diag(const Context& ctx, std::string report_path) {
  if (report_path.empty()) report_path = (ctx.offline() / "greedy_report.csv").string();
  const GreedyReport report = parse_report_csv(read_text_file(report_path));
  write_file(ctx, ctx.out / "diag" / "condition.csv", series_csv(condition_curve(report), "condition"));
  write_file(ctx, ctx.out / "diag" / "volume.csv", series_csv(volume_curve(report), "volume"));
  return 0;
}

int cmd_landscape(const Context& ctx, std::size_t snapshot, std::size_t n_atoms, std::size_t resolution) {
  const ModelFile mf = load_model(ctx.offline() / "model.json");
  const SnapshotSet set = load_snapshot_store(ctx.store());
  if (snapshot >= set.size())
    throw Error(ErrorKind::OutOfRange, "snapshot index " + std::to_string(snapshot) + " outside [0, " +
                                           std::to_string(set.size()) + ")");
  const auto& atoms_all = mf.model.dictionary.atoms;
  if (n_atoms < 3 || n_atoms > atoms_all.size())
    throw Error(ErrorKind::OutOfRange, "landscape needs 3 <= atoms <= " + std::to_string(atoms_all.size()));
  const std::vector<DiscreteIcdf> atoms(atoms_all.begin(), atoms_all.begin() + static_cast<long>(n_atoms));
  const DiscreteIcdf target = snapshot_icdf(set.snapshots[snapshot].values);
  const LandscapeGrid grid = energy_landscape(atoms, target, resolution);
  write_file(ctx, ctx.out / "landscape" / ("landscape_" + std::to_string(snapshot) + ".csv"), landscape_csv(grid));

  Eigen::MatrixXd a(target.size(), static_cast<Eigen::Index>(n_atoms));
  for (std::size_t i = 0; i < n_atoms; ++i) a.col(static_cast<Eigen::Index>(i)) = atoms[i].values;
  const SimplexLeastSquares qp(a, 1.0 / static_cast<double>(target.size()));
  const QpResult opt = qp.solve(target.values, init_weights(qp.distances(target.values)), ctx.config.greedy.qp);
  const LandscapePoint& best = grid.minimum();
  ctx.log("grid minimum log10 W2 = " + format_number(best.log10_w2) + " at (" + format_number(best.position.x()) +
          ", " + format_number(best.position.y()) + "); QP optimum log10 W2 = " +
          format_number(0.5 * std::log10(std::max(opt.objective, 1e-300))));
  return 0;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 3;
    case ErrorKind::Io: return 4;
    case ErrorKind::Domain: return 5;
    case ErrorKind::SizeMismatch: return 6;
    case ErrorKind::Singular: return 7;
    case ErrorKind::CflViolation: return 8;
    case ErrorKind::ZeroMass: return 9;
    case ErrorKind::TooFewSnapshots: return 10;
    case ErrorKind::NonTensorGrid: return 11;
    case ErrorKind::OutOfRange: return 12;
  }
  return 1;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("-o,--out", c.out, "Output root directory (default: output_dir from the config)");
  sub->add_option("-j,--threads", c.threads, "Worker threads (0 = all cores)");
  sub->add_option("--n-max", c.n_max, "Maximum number of atoms")->check(CLI::Range(2, 100000));
  sub->add_option("--qp-tol", c.qp_tol, "QP convergence tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--eps", c.eps, "Tolerance list for tables")->check(CLI::PositiveNumber);
  sub->add_flag("-q,--quiet", c.quiet, "Suppress progress output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein barycenter reduced models for 1D two-phase flow"};
  app.require_subcommand(1);
  Common common;

  auto* gen = app.add_subcommand("generate", "Run the parameter sweep and write the snapshot store");
  add_common(gen, common);

  auto* off = app.add_subcommand("offline", "Greedy dictionary, training errors and reduced model");
  add_common(off, common);

  std::string points_path, model_path;
  bool clamp = false;
  auto* onl = app.add_subcommand("online", "Reconstruct solutions at new parameter points");
  add_common(onl, common);
  onl->add_option("-p,--points", points_path, "CSV with columns t and the parameter names")
      ->required()
      ->check(CLI::ExistingFile);
  onl->add_option("-m,--model", model_path, "Model file (default: <out>/offline/model.json)");
  onl->add_flag("--clamp", clamp, "Clamp points outside the training box instead of failing");

  bool export_basis = false;
  auto* pod = app.add_subcommand("pod", "POD baseline errors and modes per tolerance");
  add_common(pod, common);
  pod->add_flag("--export-basis", export_basis, "Also write modes.csv and singular_values.csv");

  auto* tab = app.add_subcommand("tables", "Atoms and POD modes needed per tolerance");
  add_common(tab, common);

  std::string report_path;
  auto* dia = app.add_subcommand("diag", "Condition number and simplex volume series");
  add_common(dia, common);
  dia->add_option("-r,--report", report_path, "Greedy report (default: <out>/offline/greedy_report.csv)");

  std::size_t snapshot = 0, n_atoms = 3, resolution = 201;
  auto* land = app.add_subcommand("landscape", "Energy landscape over the first atoms for one snapshot");
  add_common(land, common);
  land->add_option("-s,--snapshot", snapshot, "Training snapshot index");
  land->add_option("-n,--atoms", n_atoms, "Number of atoms (polygon vertices)")->check(CLI::Range(3, 1000));
  land->add_option("-r,--resolution", resolution, "Pixels per axis")->check(CLI::Range(3, 10000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every usage error exits 2.
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const Context ctx = prepare(common);
    if (*gen) return cmd_generate(ctx);
    if (*off) return cmd_offline(ctx);
    if (*onl) return cmd_online(ctx, points_path, model_path, clamp);
    if (*pod) return cmd_pod(ctx, export_basis);
    if (*tab) return cmd_tables(ctx);
    if (*dia) return cmd_diag(ctx, report_path);
    if (*land) return cmd_landscape(ctx, snapshot, n_atoms, resolution);
  } catch (const Error& e) {
    std::cerr << "wbrom: " << to_string(e.kind()) << " error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "wbrom: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
