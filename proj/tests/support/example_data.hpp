#pragma once

// Snapshot stores of the two bundled experiments, generated once into the
// build tree and reused by every test binary that needs them.

#include <cstdio>
#include <filesystem>
#include <string>

#include "wbrom/config.hpp"
#include "wbrom/experiment.hpp"
#include "wbrom/store.hpp"

namespace wbrom::testing {

inline std::filesystem::path preset_path(int example) {
  return std::filesystem::path(WBROM_PRESET_DIR) / ("example" + std::to_string(example) + ".json");
}

inline ExperimentConfig example_config(int example) { return load_config(preset_path(example)); }

inline SnapshotSet example_store(int example) {
  const auto dir = std::filesystem::path(WBROM_TEST_DATA_DIR) / ("example" + std::to_string(example)) / "store";
  const ExperimentConfig config = example_config(example);
  if (!std::filesystem::exists(dir / "manifest.json"))
    std::fprintf(stderr, "generating example %d snapshots into %s\n", example, dir.string().c_str());
  return generate_store(config, dir, {});
}

}  // namespace wbrom::testing
