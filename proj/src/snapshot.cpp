#include "platelat/snapshot.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace platelat {

using nlohmann::json;

void write_snapshot(std::ostream& out, const Snapshot& snap) {
  json header = {{"record", "snapshot"},
                 {"format_version", kSnapshotFormatVersion},
                 {"k", snap.k},
                 {"alpha", snap.alpha},
                 {"L", snap.L},
                 {"mode", to_string(snap.mode)},
                 {"seed", snap.seed},
                 {"sweep", snap.sweep},
                 {"boundary_q", snap.boundary_q},
                 {"boundary_depth", snap.boundary_depth},
                 {"n", snap.plates.size()}};
  out << header.dump() << '\n';
  for (const Plate& p : snap.plates) {
    json rec = {{"x", p.center[0]}, {"y", p.center[1]}, {"z", p.center[2]}, {"o", to_token(p.orientation)}};
    out << rec.dump() << '\n';
  }
}

std::vector<Snapshot> read_snapshots(std::istream& in) {
  std::vector<Snapshot> out;
  std::string line;
  std::size_t lineno = 0;
  auto next_json = [&]() -> json {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        return json::parse(line);
      } catch (const json::exception& e) {
        throw std::runtime_error("snapshot line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    return json();
  };
  for (json h = next_json(); !h.is_null(); h = next_json()) {
    if (h.value("record", "") != "snapshot") {
      throw std::runtime_error("snapshot line " + std::to_string(lineno) + ": expected a snapshot header");
    }
    if (h.at("format_version").get<int>() != kSnapshotFormatVersion) {
      throw std::runtime_error("unsupported snapshot format_version");
    }
    Snapshot s;
    s.k = h.at("k").get<double>();
    s.alpha = h.at("alpha").get<double>();
    s.L = h.at("L").get<double>();
    s.mode = parse_boundary_mode(h.at("mode").get<std::string>());
    s.seed = h.at("seed").get<std::uint64_t>();
    s.sweep = h.at("sweep").get<std::int64_t>();
    s.boundary_q = h.value("boundary_q", 0);
    s.boundary_depth = h.value("boundary_depth", 0);
    const auto n = h.at("n").get<std::size_t>();
    s.plates.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      json r = next_json();
      if (r.is_null()) throw std::runtime_error("snapshot truncated: expected " + std::to_string(n) + " plates");
      s.plates.push_back(Plate{{r.at("x").get<double>(), r.at("y").get<double>(), r.at("z").get<double>()},
                               parse_orientation(r.at("o").get<std::string>())});
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Snapshot> read_snapshots_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open snapshot file " + path);
  return read_snapshots(in);
}

}  // namespace platelat
