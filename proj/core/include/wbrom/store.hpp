#pragma once

// On-disk snapshot store:
//
//   manifest.json   config, parameter names, points, masses, completion flag
//   snapshots.bin   K x N little-endian float64 values, one snapshot per row
//   runs/           per-parameter-point chunks kept while a sweep is resumable

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "wbrom/config.hpp"
#include "wbrom/snapshot.hpp"

namespace wbrom {

inline constexpr int kStoreSchemaVersion = 1;

/// Writes manifest and array file atomically (each via a temporary file).
void write_snapshot_store(const std::filesystem::path& dir, const ExperimentConfig& config,
                          const SnapshotSet& set);

/// Throws Error(Io) when the store is missing, incomplete or inconsistent.
SnapshotSet load_snapshot_store(const std::filesystem::path& dir);

/// Config text recorded in the manifest of an existing store.
std::string stored_config_json(const std::filesystem::path& dir);

/// Chunk with the snapshots of one parameter point (all times).
std::filesystem::path chunk_path(const std::filesystem::path& dir, std::size_t run_index);
void write_chunk(const std::filesystem::path& path, const std::vector<Snapshot>& snapshots);
std::vector<Snapshot> read_chunk(const std::filesystem::path& path);

}  // namespace wbrom
