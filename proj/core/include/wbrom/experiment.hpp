#pragma once

// End-to-end pipelines used by the command line tool: snapshot sweeps,
// offline training, POD comparison and the tolerance tables.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wbrom/config.hpp"
#include "wbrom/greedy.hpp"
#include "wbrom/online.hpp"
#include "wbrom/pod.hpp"
#include "wbrom/snapshot.hpp"

namespace wbrom {

/// Snapshots of one parameter vector y at every configured time.
std::vector<Snapshot> simulate_point(const ExperimentConfig& config, const std::vector<double>& y);

/// Full tensor sweep kept in memory; snapshot order is parameter combination
/// (last axis fastest), then time.
SnapshotSet simulate_sweep(const ExperimentConfig& config, std::size_t threads = 0);

struct GenerateOptions {
  std::size_t threads = 0;
  /// Called after each parameter point with (index, total, reused_from_disk).
  std::function<void(std::size_t, std::size_t, bool)> on_run;
};

/// Sweep written to `dir`. Finished parameter points are kept as chunks, so
/// an interrupted or partially failed sweep resumes where it stopped.
/// Failures are collected and reported together with their parameter points.
SnapshotSet generate_store(const ExperimentConfig& config, const std::filesystem::path& dir,
                           const GenerateOptions& options = {});

struct TrainingErrorRow {
  std::size_t n_atoms = 0;
  double mean_l1 = 0.0;  // relative L1 error of the offline reconstructions
  double max_l1 = 0.0;
  double mean_w2 = 0.0;
  double max_w2 = 0.0;
};

struct OfflineResult {
  std::vector<std::string> parameter_names;
  GreedyResult greedy;
  ReducedModel model;
  std::vector<TrainingErrorRow> training_errors;
};

using OfflineProgress = std::function<void(const TrainingErrorRow&)>;

/// icdfs -> greedy (with per-iteration training reconstruction errors) ->
/// tabulated weights and masses.
OfflineResult run_offline(const SnapshotSet& set, const GreedySettings& settings,
                          const OfflineProgress& progress = {});

/// Relative L1 errors of reconstructing every snapshot from the given atoms
/// and weights with the true masses.
std::vector<double> training_l1_errors(const SnapshotSet& set, std::span<const DiscreteIcdf> atoms,
                                       const std::vector<SimplexWeights>& weights, std::size_t threads = 0);

/// Writes dictionary.json, atoms.csv, greedy_report.csv, training_errors.csv and model.json.
void write_offline(const std::filesystem::path& dir, const OfflineResult& result);

struct ModelFile {
  std::vector<std::string> parameter_names;
  ReducedModel model;
};

std::string model_to_json(const ReducedModel& model, const std::vector<std::string>& parameter_names);
ModelFile model_from_json(const std::string& text);
ModelFile load_model(const std::filesystem::path& path);

std::string report_csv(const GreedyReport& report);
GreedyReport parse_report_csv(const std::string& text);

std::string training_errors_csv(const std::vector<TrainingErrorRow>& rows);
std::vector<TrainingErrorRow> parse_training_errors_csv(const std::string& text);

struct PodSummary {
  PodBasis basis;
  PodErrorCurve curve;
};
PodSummary run_pod(const SnapshotSet& set);
std::string pod_errors_csv(const PodErrorCurve& curve);

/// Smallest atom count whose mean (or max) training L1 error is below eps.
std::optional<std::size_t> atoms_for_tolerance(const std::vector<TrainingErrorRow>& rows, double eps,
                                               bool use_max = false);

struct ToleranceRow {
  double eps = 0.0;
  std::optional<std::size_t> n_gbar;
  std::optional<std::size_t> n_pod;
  std::optional<std::size_t> n_gbar_max;
  std::optional<std::size_t> n_pod_max;
};

std::optional<std::size_t> pod_modes_for_tolerance(const PodErrorCurve& curve, double eps, bool use_max);

/// Either source may be absent; the corresponding columns stay empty.
std::vector<ToleranceRow> tolerance_table(const std::vector<double>& eps,
                                          const std::vector<TrainingErrorRow>* gbar,
                                          const PodErrorCurve* pod);

/// Unreachable tolerances are written as "-".
std::string tolerance_table_csv(const std::vector<ToleranceRow>& rows, bool with_gbar, bool with_pod);

}  // namespace wbrom
