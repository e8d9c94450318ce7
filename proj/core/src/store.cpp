#include "wbrom/store.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wbrom/csv.hpp"
#include "wbrom/error.hpp"

namespace wbrom {

using nlohmann::json;
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "store format assumes a little-endian host");

namespace {

constexpr char kChunkMagic[8] = {'W', 'B', 'R', 'O', 'M', 'C', 'H', '1'};

void put_u64(std::string& out, std::uint64_t v) { out.append(reinterpret_cast<const char*>(&v), sizeof v); }
void put_f64(std::string& out, double v) { out.append(reinterpret_cast<const char*>(&v), sizeof v); }

struct Reader {
  const std::string& data;
  std::size_t pos = 0;
  std::string what;

  void need(std::size_t bytes) {
    if (pos + bytes > data.size()) throw Error(ErrorKind::Io, what + ": truncated file");
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, data.data() + pos, 8);
    pos += 8;
    return v;
  }
  double f64() {
    need(8);
    double v;
    std::memcpy(&v, data.data() + pos, 8);
    pos += 8;
    return v;
  }
};

}  // namespace

Eigen::MatrixXd SnapshotSet::matrix() const {
  Eigen::MatrixXd s(static_cast<Eigen::Index>(n_cells), static_cast<Eigen::Index>(snapshots.size()));
  for (std::size_t k = 0; k < snapshots.size(); ++k) s.col(static_cast<Eigen::Index>(k)) = snapshots[k].values;
  return s;
}

std::vector<ParameterPoint> SnapshotSet::params() const {
  std::vector<ParameterPoint> out;
  out.reserve(snapshots.size());
  for (const auto& s : snapshots) out.push_back(s.z);
  return out;
}

std::vector<double> SnapshotSet::masses() const {
  std::vector<double> out;
  out.reserve(snapshots.size());
  for (const auto& s : snapshots) out.push_back(s.mass);
  return out;
}

void write_snapshot_store(const fs::path& dir, const ExperimentConfig& config, const SnapshotSet& set) {
  std::string array;
  array.reserve(set.size() * set.n_cells * 8);
  for (const Snapshot& s : set.snapshots) {
    if (static_cast<std::size_t>(s.values.size()) != set.n_cells)
      throw Error(ErrorKind::SizeMismatch, "snapshot length differs from the store cell count");
    array.append(reinterpret_cast<const char*>(s.values.data()), set.n_cells * 8);
  }
  write_text_file(dir / "snapshots.bin", array);

  json m;
  m["schema_version"] = kStoreSchemaVersion;
  m["config"] = json::parse(config_to_json(config));
  m["parameter_names"] = set.parameter_names;
  m["n_cells"] = set.n_cells;
  m["count"] = set.size();
  m["value_file"] = "snapshots.bin";
  m["value_layout"] = "float64 little-endian, row-major count x n_cells";
  json points = json::array();
  json masses = json::array();
  for (const Snapshot& s : set.snapshots) {
    points.push_back(s.z.coordinates());
    masses.push_back(s.mass);
  }
  m["points"] = std::move(points);
  m["masses"] = std::move(masses);
  m["complete"] = true;
  write_text_file(dir / "manifest.json", m.dump(1) + "\n");
}

std::string stored_config_json(const fs::path& dir) {
  const json m = json::parse(read_text_file(dir / "manifest.json"), nullptr, false);
  if (m.is_discarded() || !m.contains("config")) throw Error(ErrorKind::Io, "malformed store manifest in " + dir.string());
  return m.at("config").dump(2) + "\n";
}

SnapshotSet load_snapshot_store(const fs::path& dir) {
  const fs::path manifest = dir / "manifest.json";
  if (!fs::exists(manifest)) throw Error(ErrorKind::Io, "no snapshot store at " + dir.string() + " (run generate first)");
  const json m = json::parse(read_text_file(manifest), nullptr, false);
  if (m.is_discarded()) throw Error(ErrorKind::Io, manifest.string() + ": invalid JSON");
  try {
    if (m.at("schema_version").get<int>() != kStoreSchemaVersion)
      throw Error(ErrorKind::Io, manifest.string() + ": unsupported store schema version");
    if (!m.value("complete", false))
      throw Error(ErrorKind::Io, "snapshot store " + dir.string() + " is incomplete (rerun generate to resume)");
    SnapshotSet set;
    set.parameter_names = m.at("parameter_names").get<std::vector<std::string>>();
    set.n_cells = m.at("n_cells").get<std::size_t>();
    const auto count = m.at("count").get<std::size_t>();
    const auto points = m.at("points").get<std::vector<std::vector<double>>>();
    const auto masses = m.at("masses").get<std::vector<double>>();
    if (points.size() != count || masses.size() != count)
      throw Error(ErrorKind::Io, manifest.string() + ": point or mass list does not match count");
    const std::string data = read_text_file(dir / m.at("value_file").get<std::string>());
    if (data.size() != count * set.n_cells * 8)
      throw Error(ErrorKind::Io, "snapshot array size does not match the manifest in " + dir.string());
    set.snapshots.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
      Snapshot& s = set.snapshots[k];
      if (points[k].size() != set.parameter_names.size() + 1)
        throw Error(ErrorKind::Io, manifest.string() + ": point " + std::to_string(k) + " has the wrong dimension");
      s.z = ParameterPoint::from_coordinates(points[k]);
      s.mass = masses[k];
      s.values.resize(static_cast<Eigen::Index>(set.n_cells));
      std::memcpy(s.values.data(), data.data() + k * set.n_cells * 8, set.n_cells * 8);
    }
    return set;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, manifest.string() + ": " + e.what());
  }
}

fs::path chunk_path(const fs::path& dir, std::size_t run_index) {
  std::ostringstream name;
  name << "run_" << std::setw(5) << std::setfill('0') << run_index << ".bin";
  return dir / "runs" / name.str();
}

void write_chunk(const fs::path& path, const std::vector<Snapshot>& snapshots) {
  std::string out(kChunkMagic, sizeof kChunkMagic);
  const std::size_t n_params = snapshots.empty() ? 0 : snapshots.front().z.y.size();
  const std::size_t n_cells = snapshots.empty() ? 0 : static_cast<std::size_t>(snapshots.front().values.size());
  put_u64(out, snapshots.size());
  put_u64(out, n_params);
  put_u64(out, n_cells);
  for (const Snapshot& s : snapshots) {
    put_f64(out, s.z.t);
    for (const double y : s.z.y) put_f64(out, y);
    put_f64(out, s.mass);
    out.append(reinterpret_cast<const char*>(s.values.data()), n_cells * 8);
  }
  write_text_file(path, out);
}

std::vector<Snapshot> read_chunk(const fs::path& path) {
  const std::string data = read_text_file(path);
  Reader r{data, 0, path.string()};
  r.need(sizeof kChunkMagic);
  if (std::memcmp(data.data(), kChunkMagic, sizeof kChunkMagic) != 0)
    throw Error(ErrorKind::Io, path.string() + ": not a snapshot chunk");
  r.pos = sizeof kChunkMagic;
  const std::uint64_t count = r.u64();
  const std::uint64_t n_params = r.u64();
  const std::uint64_t n_cells = r.u64();
  std::vector<Snapshot> out(count);
  for (Snapshot& s : out) {
    s.z.t = r.f64();
    s.z.y.resize(n_params);
    for (double& y : s.z.y) y = r.f64();
    s.mass = r.f64();
    s.values.resize(static_cast<Eigen::Index>(n_cells));
    for (Eigen::Index i = 0; i < s.values.size(); ++i) s.values[i] = r.f64();
  }
  if (r.pos != data.size()) throw Error(ErrorKind::Io, path.string() + ": trailing bytes");
  return out;
}

}  // namespace wbrom
