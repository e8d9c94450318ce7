#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "wbrom/config.hpp"
#include "wbrom/csv.hpp"
#include "wbrom/error.hpp"
#include "wbrom/experiment.hpp"
#include "wbrom/store.hpp"

namespace {

using namespace wbrom;
namespace fs = std::filesystem;

const char* kSmallConfig = R"({
  "schema_version": 1,
  "name": "small",
  "grid": { "n_cells": 60 },
  "physics": { "mu_w": 0.003, "beta": 2 },
  "parameters": [
    { "name": "mu_ratio", "values": [1, 4] },
    { "name": "beta", "values": [2, 3, 5] }
  ],
  "snapshot_times_years": { "start": 0.5, "step": 0.5, "count": 3 },
  "greedy": { "n_max": 5 },
  "threads": 1
})";

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("wbrom_io_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no wbrom::Error thrown";
  return ErrorKind::Domain;
}

std::string with_replaced(std::string text, const std::string& from, const std::string& to) {
  text.replace(text.find(from), from.size(), to);
  return text;
}

TEST(Config, PresetsDescribeTheTwoSweeps) {
  const ExperimentConfig e1 = load_config(fs::path(WBROM_PRESET_DIR) / "example1.json");
  EXPECT_EQ(e1.expected_snapshot_count(), 750U);
  EXPECT_EQ(e1.snapshot_times_years.size(), 25U);
  EXPECT_EQ(e1.snapshot_times_years[2], 0.6);
  EXPECT_EQ(e1.snapshot_times_years.back(), 5.0);
  EXPECT_EQ(e1.parameter_names(), (std::vector<std::string>{"mu_ratio", "beta"}));
  const ExperimentConfig e2 = load_config(fs::path(WBROM_PRESET_DIR) / "example2.json");
  EXPECT_EQ(e2.expected_snapshot_count(), 700U);
  EXPECT_EQ(e2.snapshot_times_years.front(), 0.5);
  EXPECT_EQ(e2.snapshot_times_years.back(), 10.0);
}

TEST(Config, CombinationsVaryLastAxisFastest) {
  const ExperimentConfig c = parse_config(kSmallConfig);
  const auto combos = c.parameter_combinations();
  ASSERT_EQ(combos.size(), 6U);
  EXPECT_EQ(combos[0], (std::vector<double>{1, 2}));
  EXPECT_EQ(combos[1], (std::vector<double>{1, 3}));
  EXPECT_EQ(combos[3], (std::vector<double>{4, 2}));
}

TEST(Config, ParametersMapOntoPhysics) {
  ExperimentConfig c = parse_config(kSmallConfig);
  const FlowProblem p = c.problem_for({4.0, 3.0});
  EXPECT_DOUBLE_EQ(p.fluids.mu_nw, 0.012);
  EXPECT_EQ(p.fluids.beta, 3.0);
  c.parameters = {{"k_lp", {5e-14}}, {"gamma", {0.2}}};
  const FlowProblem q = c.problem_for({5e-14, 0.2});
  EXPECT_EQ(q.rock.permeability[0], c.physics.permeability_left);
  EXPECT_EQ(q.rock.permeability[59], 5e-14);
  EXPECT_THROW(c.problem_for({1.0}), Error);
}

TEST(Config, RoundTripThroughJson) {
  const ExperimentConfig a = load_config(fs::path(WBROM_PRESET_DIR) / "example2.json");
  const ExperimentConfig b = parse_config(config_to_json(a));
  EXPECT_EQ(config_to_json(a), config_to_json(b));
  EXPECT_EQ(b.snapshot_times_years, a.snapshot_times_years);
  EXPECT_EQ(b.physics.porosity_right, 0.01);
  EXPECT_EQ(b.parameters[0].values, a.parameters[0].values);
}

TEST(Config, RejectsInvalidInputWithActionableMessages) {
  const auto message = [](const std::string& text) {
    try {
      parse_config(text).validate();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Config);
      return std::string(e.what());
    }
    return std::string("accepted");
  };
  EXPECT_NE(message(with_replaced(kSmallConfig, "\"threads\"", "\"thread\"")).find("unknown key 'thread'"),
            std::string::npos);
  EXPECT_NE(message(with_replaced(kSmallConfig, "[1, 4]", "[4, 1]")).find("strictly increasing"), std::string::npos);
  EXPECT_NE(message(with_replaced(kSmallConfig, "\"mu_ratio\"", "\"viscosity\"")).find("viscosity"),
            std::string::npos);
  EXPECT_NE(message(with_replaced(kSmallConfig, "\"schema_version\": 1", "\"schema_version\": 7")).find("schema_version"),
            std::string::npos);
  EXPECT_NE(message(with_replaced(kSmallConfig, "\"beta\": 2", "\"beta\": -2")).find("beta"), std::string::npos);
  EXPECT_NE(message("{ not json").find("invalid JSON"), std::string::npos);
  EXPECT_EQ(kind_of([] { load_config("/nonexistent/wbrom.json"); }), ErrorKind::Io);
}

TEST(Store, GenerateLoadsBackIdentically) {
  const ExperimentConfig c = parse_config(kSmallConfig);
  const fs::path dir = fresh_dir("roundtrip");
  const SnapshotSet set = generate_store(c, dir, {1, {}});
  ASSERT_EQ(set.size(), 18U);
  EXPECT_FALSE(fs::exists(dir / "runs"));
  const SnapshotSet back = load_snapshot_store(dir);
  ASSERT_EQ(back.size(), set.size());
  EXPECT_EQ(back.parameter_names, set.parameter_names);
  for (std::size_t k = 0; k < set.size(); ++k) {
    EXPECT_EQ(back.snapshots[k].values, set.snapshots[k].values);
    EXPECT_EQ(back.snapshots[k].z, set.snapshots[k].z);
    EXPECT_EQ(back.snapshots[k].mass, Snapshot::mass_of(set.snapshots[k].values));
  }
  // Order: parameter combination first, then time.
  EXPECT_EQ(set.snapshots[1].z.t, 1.0);
  EXPECT_EQ(set.snapshots[3].z.y, (std::vector<double>{1.0, 3.0}));
  EXPECT_EQ(set.matrix().cols(), 18);
  EXPECT_EQ(set.matrix().rows(), 60);
  fs::remove_all(dir);
}

TEST(Store, RerunsAreByteIdentical) {
  const ExperimentConfig c = parse_config(kSmallConfig);
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  generate_store(c, a, {1, {}});
  generate_store(c, b, {3, {}});
  for (const char* f : {"manifest.json", "snapshots.bin"})
    EXPECT_EQ(read_text_file(a / f), read_text_file(b / f)) << f;
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Store, CompleteStoreIsReused) {
  const ExperimentConfig c = parse_config(kSmallConfig);
  const fs::path dir = fresh_dir("reuse");
  generate_store(c, dir, {1, {}});
  std::size_t calls = 0;
  generate_store(c, dir, {1, [&](std::size_t, std::size_t, bool) { ++calls; }});
  EXPECT_EQ(calls, 0U);
  fs::remove_all(dir);
}

TEST(Store, InterruptedSweepResumesFromChunks) {
  const ExperimentConfig c = parse_config(kSmallConfig);
  const fs::path dir = fresh_dir("resume");
  const auto combos = c.parameter_combinations();
  fs::create_directories(dir / "runs");
  write_chunk(chunk_path(dir, 2), simulate_point(c, combos[2]));
  // A chunk cut short by a crash is simulated again.
  {
    std::ofstream junk(chunk_path(dir, 4), std::ios::binary);
    junk << "WBROMCH1\x01";
  }
  std::set<std::size_t> reused;
  const SnapshotSet set = generate_store(c, dir, {1, [&](std::size_t i, std::size_t, bool r) {
                                                   if (r) reused.insert(i);
                                                 }});
  EXPECT_EQ(reused, (std::set<std::size_t>{2}));
  const fs::path ref = fresh_dir("resume_ref");
  const SnapshotSet expected = generate_store(c, ref, {1, {}});
  for (std::size_t k = 0; k < set.size(); ++k) EXPECT_EQ(set.snapshots[k].values, expected.snapshots[k].values);
  fs::remove_all(dir);
  fs::remove_all(ref);
}

TEST(Store, DifferentSweepInSameDirectoryIsRejected) {
  const ExperimentConfig c = parse_config(kSmallConfig);
  const fs::path dir = fresh_dir("clash");
  generate_store(c, dir, {1, {}});
  const ExperimentConfig other = parse_config(with_replaced(kSmallConfig, "[1, 4]", "[1, 5]"));
  EXPECT_EQ(kind_of([&] { generate_store(other, dir, {1, {}}); }), ErrorKind::Config);
  fs::remove_all(dir);
}

TEST(Store, SinglePointConfigHasOneSnapshotPerTime) {
  ExperimentConfig c = parse_config(kSmallConfig);
  c.parameters = {{"mu_ratio", {2.0}}};
  const fs::path dir = fresh_dir("single");
  const SnapshotSet set = generate_store(c, dir, {1, {}});
  EXPECT_EQ(set.size(), c.snapshot_times_years.size());
  fs::remove_all(dir);
}

TEST(Store, MissingOrCorruptStoreIsAnIoError) {
  EXPECT_EQ(kind_of([] { load_snapshot_store("/nonexistent/store"); }), ErrorKind::Io);
  const fs::path dir = fresh_dir("corrupt");
  fs::create_directories(dir);
  { std::ofstream(dir / "chunk.bin") << "NOTACHUNK"; }
  EXPECT_EQ(kind_of([&] { read_chunk(dir / "chunk.bin"); }), ErrorKind::Io);
  fs::remove_all(dir);
}

TEST(Store, ChunkRoundTripIsExact) {
  const ExperimentConfig c = parse_config(kSmallConfig);
  const auto snaps = simulate_point(c, {4.0, 5.0});
  const fs::path dir = fresh_dir("chunk");
  fs::create_directories(dir);
  write_chunk(dir / "c.bin", snaps);
  const auto back = read_chunk(dir / "c.bin");
  ASSERT_EQ(back.size(), snaps.size());
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    EXPECT_EQ(back[k].values, snaps[k].values);
    EXPECT_EQ(back[k].z, snaps[k].z);
    EXPECT_EQ(back[k].mass, snaps[k].mass);
  }
  fs::remove_all(dir);
}

SnapshotSet small_set() {
  static const SnapshotSet set = simulate_sweep(parse_config(kSmallConfig), 1);
  return set;
}

TEST(Offline, TwoSnapshotsBecomeTheDictionary) {
  SnapshotSet set = small_set();
  set.snapshots.resize(2);
  set.snapshots[1].z.t = 0.5;
  set.snapshots[1].z.y = {1.0, 3.0};
  GreedySettings settings;
  settings.n_max = 5;
  const OfflineResult r = run_offline(set, settings);
  EXPECT_EQ(r.greedy.dictionary.indices, (std::vector<std::size_t>{0, 1}));
  ASSERT_EQ(r.greedy.report.iterations(), 1U);
  EXPECT_LE(r.greedy.report.delta[0], 1e-8);
  ASSERT_EQ(r.training_errors.size(), 1U);
}

TEST(Offline, TrainingErrorsAccompanyEveryIteration) {
  GreedySettings settings;
  settings.n_max = 5;
  settings.threads = 1;
  std::size_t progress = 0;
  const SnapshotSet set = small_set();
  const OfflineResult r = run_offline(set, settings, [&](const TrainingErrorRow&) { ++progress; });
  ASSERT_EQ(r.training_errors.size(), r.greedy.report.iterations());
  EXPECT_EQ(progress, r.training_errors.size());
  EXPECT_EQ(r.training_errors.front().n_atoms, 2U);
  const auto& last = r.training_errors.back();
  const auto errors = training_l1_errors(set, r.greedy.dictionary.atoms, r.greedy.last.weights, 1);
  double mean = 0.0;
  for (const double e : errors) mean += e;
  EXPECT_NEAR(last.mean_l1, mean / static_cast<double>(errors.size()), 1e-14);
  EXPECT_EQ(r.model.n_cells, 60U);
  EXPECT_EQ(r.parameter_names, set.parameter_names);
  // The model at a training node reproduces the offline reconstruction.
  const auto& snap = set.snapshots[7];
  const Reconstruction rec = reconstruct(r.model, snap.z);
  EXPECT_NEAR(relative_l1(snap.values, rec.values), errors[7], 1e-10);
}

TEST(Offline, TooFewSnapshots) {
  SnapshotSet set = small_set();
  set.snapshots.resize(1);
  EXPECT_EQ(kind_of([&] { run_offline(set, {}); }), ErrorKind::TooFewSnapshots);
}

TEST(Offline, NonTensorTrainingSetNamesTheStage) {
  SnapshotSet set = small_set();
  set.snapshots.pop_back();
  try {
    run_offline(set, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonTensorGrid);
    EXPECT_EQ(std::string(e.what()).rfind("interpolation stage", 0), 0U) << e.what();
  }
}

TEST(Model, JsonRoundTripIsBitExact) {
  GreedySettings settings;
  settings.n_max = 4;
  const OfflineResult r = run_offline(small_set(), settings);
  const std::string text = model_to_json(r.model, r.parameter_names);
  const ModelFile back = model_from_json(text);
  EXPECT_EQ(back.parameter_names, r.parameter_names);
  EXPECT_EQ(back.model.weight_table, r.model.weight_table);
  EXPECT_EQ(back.model.mass_table, r.model.mass_table);
  EXPECT_EQ(back.model.grid.axes, r.model.grid.axes);
  EXPECT_EQ(back.model.dictionary.indices, r.model.dictionary.indices);
  for (std::size_t i = 0; i < back.model.n_atoms(); ++i)
    EXPECT_EQ(back.model.dictionary.atoms[i].values, r.model.dictionary.atoms[i].values);
  EXPECT_EQ(model_to_json(back.model, back.parameter_names), text);
  EXPECT_EQ(kind_of([] { model_from_json("{}"); }), ErrorKind::Io);
}

TEST(Csv, ReportRoundTrip) {
  GreedyReport rep;
  rep.n_atoms = {2, 3};
  rep.delta = {0.25, 1.0 / 3.0};
  rep.avg_error = {0.1, 0.05};
  rep.condition = {12.5, INFINITY};
  rep.simplex_volume = {0.3, 0.0};
  rep.nonconverged = {0, 1};
  rep.termination = Termination::MaxAtoms;
  const std::string text = report_csv(rep);
  EXPECT_EQ(text.substr(0, text.find('\n')), "iteration,n_atoms,delta,mean_error,condition,volume,nonconverged,criterion");
  EXPECT_NE(text.find(",continue\n"), std::string::npos);
  EXPECT_NE(text.find(",max_atoms\n"), std::string::npos);
  const GreedyReport back = parse_report_csv(text);
  EXPECT_EQ(back.delta, rep.delta);
  EXPECT_EQ(back.condition, rep.condition);
  EXPECT_EQ(back.termination, rep.termination);
  EXPECT_EQ(back.n_atoms, rep.n_atoms);
}

TEST(Csv, NumbersRoundTripExactly) {
  for (const double v : {0.1, 1.0 / 3.0, 6e-14, 1e300, -2.5})
    EXPECT_EQ(parse_number(format_number(v)), v);
  EXPECT_TRUE(std::isinf(parse_number("inf")));
  EXPECT_THROW(parse_number("1.2.3"), Error);
}

TEST(Tables, ToleranceLookupAndSentinel) {
  std::vector<TrainingErrorRow> rows;
  for (std::size_t n = 2; n <= 6; ++n) rows.push_back({n, 0.2 / static_cast<double>(n), 0.5 / static_cast<double>(n), 0, 0});
  EXPECT_EQ(atoms_for_tolerance(rows, 0.1), 3U);
  EXPECT_EQ(atoms_for_tolerance(rows, 1.0), 2U);
  EXPECT_FALSE(atoms_for_tolerance(rows, 0.01).has_value());
  EXPECT_EQ(atoms_for_tolerance(rows, 0.1, true), 6U);

  PodErrorCurve pod{{0.5, 0.08, 0.02}, {0.9, 0.2, 0.04}};
  EXPECT_EQ(pod_modes_for_tolerance(pod, 1.0, false), 1U);
  const auto table = tolerance_table({0.1, 0.05, 0.01}, &rows, &pod);
  ASSERT_EQ(table.size(), 3U);
  EXPECT_EQ(table[0].n_gbar, 3U);
  EXPECT_EQ(table[0].n_pod, 2U);
  EXPECT_FALSE(table[2].n_gbar.has_value());
  const std::string csv = tolerance_table_csv(table, true, true);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "eps,n_gbar,n_pod,n_gbar_max,n_pod_max");
  EXPECT_NE(csv.find("0.01,-,"), std::string::npos) << csv;
}

TEST(Tables, TrainingErrorCsvRoundTrip) {
  const std::vector<TrainingErrorRow> rows{{2, 0.1, 0.4, 0.01, 0.03}, {3, 0.05, 0.2, 0.005, 0.02}};
  const auto back = parse_training_errors_csv(training_errors_csv(rows));
  ASSERT_EQ(back.size(), 2U);
  EXPECT_EQ(back[1].n_atoms, 3U);
  EXPECT_EQ(back[1].max_w2, 0.02);
}

TEST(Errors, CategoriesHaveNames) {
  EXPECT_STREQ(to_string(ErrorKind::NonTensorGrid), "non-tensor-grid");
  EXPECT_STREQ(to_string(ErrorKind::Io), "io");
}

}  // namespace
