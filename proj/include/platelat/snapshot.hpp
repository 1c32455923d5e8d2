#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "platelat/geometry.hpp"

namespace platelat {

/// One recorded configuration. On disk: a header line
/// `{"record":"snapshot","format_version":1,"k":..,"alpha":..,"L":..,"mode":..,"seed":..,"sweep":..,"n":..}`
/// followed by `n` lines `{"x":..,"y":..,"z":..,"o":"3a"}`.
struct Snapshot {
  double k = 2.0;
  double alpha = 1.0;
  double L = 1.0;
  BoundaryMode mode = BoundaryMode::open;
  std::uint64_t seed = 0;
  std::int64_t sweep = 0;
  int boundary_q = 0;  // 0: no boundary condition
  int boundary_depth = 0;
  std::vector<Plate> plates;

  ModelParams params() const { return ModelParams(k, alpha); }
  SimBox box() const { return SimBox{L, mode}; }
};

inline constexpr int kSnapshotFormatVersion = 1;

void write_snapshot(std::ostream& out, const Snapshot& snap);
/// Reads every snapshot in a JSONL stream. Throws std::runtime_error on malformed input.
std::vector<Snapshot> read_snapshots(std::istream& in);
std::vector<Snapshot> read_snapshots_file(const std::string& path);

}  // namespace platelat
