#include "platelat/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace platelat {

using nlohmann::json;

bool RunConfig::Expansion::operator==(const Expansion& o) const {
  auto same_region = [](const std::optional<Region>& a, const std::optional<Region>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || (a->lo == b->lo && a->hi == b->hi);
  };
  return same_region(region, o.region) && periodic == o.periodic && orientations == o.orientations && z == o.z &&
         n_max == o.n_max && order == o.order && samples == o.samples && tolerance == o.tolerance &&
         polymer_model == o.polymer_model && random_models == o.random_models &&
         random_polymers == o.random_polymers && random_max_size == o.random_max_size &&
         random_max_activity == o.random_max_activity && max_cluster_size == o.max_cluster_size;
}

RunParams RunConfig::run_params() const {
  RunParams r;
  r.z = run.z;
  r.sweeps = run.sweeps;
  r.seed = run.seed;
  r.move_weights = MoveWeights{run.insert, run.remove, run.translate, run.reorient};
  r.boundary_q = run.boundary_q;
  r.boundary_depth = run.boundary_depth;
  r.snapshot_stride = run.snapshot_stride;
  r.sample_stride = run.sample_stride;
  r.burn_in_fraction = run.burn_in_fraction;
  r.hard_core = run.hard_core;
  return r;
}

namespace {

void require_object(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& j, const std::string& where, const char* key, T& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
    }
    out = v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

Region parse_region(const json& j, const std::string& where) {
  require_object(j, where, {"lo", "hi"});
  Region r;
  try {
    r.lo = j.at("lo").get<Vec3>();
    r.hi = j.at("hi").get<Vec3>();
  } catch (const std::exception&) {
    throw ConfigError(where + ": needs lo and hi as three numbers each");
  }
  return r;
}

}  // namespace

RunConfig parse_config(const json& j) {
  require_object(j, "config", {"format_version", "model", "box", "run", "analysis", "expansion"});
  RunConfig c;
  if (!j.contains("format_version")) throw ConfigError("config: missing format_version");
  read(j, "config", "format_version", c.format_version);
  if (c.format_version != kConfigFormatVersion) {
    throw ConfigError("config: unsupported format_version " + std::to_string(c.format_version));
  }
  if (!j.contains("model")) throw ConfigError("config: missing model");
  {
    const json& m = j.at("model");
    require_object(m, "model", {"k", "alpha"});
    if (!m.contains("k") || !m.contains("alpha")) throw ConfigError("model: k and alpha are required");
    read(m, "model", "k", c.model.k);
    read(m, "model", "alpha", c.model.alpha);
  }
  if (j.contains("box")) {
    const json& b = j.at("box");
    require_object(b, "box", {"L", "mode"});
    read(b, "box", "L", c.box.L);
    std::string mode = to_string(c.box.mode);
    read(b, "box", "mode", mode);
    try {
      c.box.mode = parse_boundary_mode(mode);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("box.mode: ") + e.what());
    }
  }
  if (j.contains("run")) {
    const json& r = j.at("run");
    require_object(r, "run",
                   {"z", "sweeps", "seed", "move_weights", "boundary_q", "boundary_depth", "snapshot_stride",
                    "sample_stride", "burn_in_fraction", "replicas", "hard_core"});
    read(r, "run", "z", c.run.z);
    read(r, "run", "sweeps", c.run.sweeps);
    if (r.contains("seed") && !r.at("seed").is_number_unsigned()) throw ConfigError("run.seed: expected an unsigned integer");
    read(r, "run", "seed", c.run.seed);
    if (r.contains("move_weights")) {
      const json& w = r.at("move_weights");
      require_object(w, "run.move_weights", {"insert", "delete", "translate", "reorient"});
      read(w, "run.move_weights", "insert", c.run.insert);
      read(w, "run.move_weights", "delete", c.run.remove);
      read(w, "run.move_weights", "translate", c.run.translate);
      read(w, "run.move_weights", "reorient", c.run.reorient);
    }
    read(r, "run", "boundary_q", c.run.boundary_q);
    read(r, "run", "boundary_depth", c.run.boundary_depth);
    read(r, "run", "snapshot_stride", c.run.snapshot_stride);
    read(r, "run", "sample_stride", c.run.sample_stride);
    read(r, "run", "burn_in_fraction", c.run.burn_in_fraction);
    read(r, "run", "replicas", c.run.replicas);
    read(r, "run", "hard_core", c.run.hard_core);
  }
  if (j.contains("analysis")) {
    const json& a = j.at("analysis");
    require_object(a, "analysis",
                   {"contours", "pebbles", "pair_correlation", "bins", "r_max", "snapshots", "correlation_csv", "series"});
    read(a, "analysis", "contours", c.analysis.contours);
    read(a, "analysis", "pebbles", c.analysis.pebbles);
    read(a, "analysis", "pair_correlation", c.analysis.pair_correlation);
    read(a, "analysis", "bins", c.analysis.bins);
    if (a.contains("r_max") && !a.at("r_max").is_null()) {
      double r = 0.0;
      read(a, "analysis", "r_max", r);
      c.analysis.r_max = r;
    }
    if (a.contains("snapshots")) {
      const json& s = a.at("snapshots");
      if (!s.is_array()) throw ConfigError("analysis.snapshots: expected a list of paths");
      for (const auto& p : s) {
        if (!p.is_string()) throw ConfigError("analysis.snapshots: expected a list of paths");
        c.analysis.snapshots.push_back(p.get<std::string>());
      }
    }
    read(a, "analysis", "correlation_csv", c.analysis.correlation_csv);
    read(a, "analysis", "series", c.analysis.series);
  }
  if (j.contains("expansion")) {
    const json& e = j.at("expansion");
    require_object(e, "expansion",
                   {"region", "periodic", "orientations", "z", "n_max", "order", "samples", "tolerance",
                    "polymer_model", "random_models", "random_polymers", "random_max_size", "random_max_activity",
                    "max_cluster_size"});
    if (e.contains("region") && !e.at("region").is_null()) c.expansion.region = parse_region(e.at("region"), "expansion.region");
    read(e, "expansion", "periodic", c.expansion.periodic);
    if (e.contains("orientations")) {
      const json& os = e.at("orientations");
      if (!os.is_array()) throw ConfigError("expansion.orientations: expected a list of tokens");
      c.expansion.orientations.clear();
      for (const auto& o : os) {
        if (!o.is_string()) throw ConfigError("expansion.orientations: expected a list of tokens");
        c.expansion.orientations.push_back(o.get<std::string>());
      }
    }
    read(e, "expansion", "z", c.expansion.z);
    read(e, "expansion", "n_max", c.expansion.n_max);
    read(e, "expansion", "order", c.expansion.order);
    read(e, "expansion", "samples", c.expansion.samples);
    read(e, "expansion", "tolerance", c.expansion.tolerance);
    if (e.contains("polymer_model") && !e.at("polymer_model").is_null()) c.expansion.polymer_model = e.at("polymer_model");
    read(e, "expansion", "random_models", c.expansion.random_models);
    read(e, "expansion", "random_polymers", c.expansion.random_polymers);
    read(e, "expansion", "random_max_size", c.expansion.random_max_size);
    read(e, "expansion", "random_max_activity", c.expansion.random_max_activity);
    read(e, "expansion", "max_cluster_size", c.expansion.max_cluster_size);
  }
  validate_config(c);
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json serialize_config(const RunConfig& c) {
  json j;
  j["format_version"] = c.format_version;
  j["model"] = {{"k", c.model.k}, {"alpha", c.model.alpha}};
  j["box"] = {{"L", c.box.L}, {"mode", to_string(c.box.mode)}};
  j["run"] = {{"z", c.run.z},
              {"sweeps", c.run.sweeps},
              {"seed", c.run.seed},
              {"move_weights",
               {{"insert", c.run.insert}, {"delete", c.run.remove}, {"translate", c.run.translate}, {"reorient", c.run.reorient}}},
              {"boundary_q", c.run.boundary_q},
              {"boundary_depth", c.run.boundary_depth},
              {"snapshot_stride", c.run.snapshot_stride},
              {"sample_stride", c.run.sample_stride},
              {"burn_in_fraction", c.run.burn_in_fraction},
              {"replicas", c.run.replicas},
              {"hard_core", c.run.hard_core}};
  j["analysis"] = {{"contours", c.analysis.contours},
                   {"pebbles", c.analysis.pebbles},
                   {"pair_correlation", c.analysis.pair_correlation},
                   {"bins", c.analysis.bins},
                   {"r_max", c.analysis.r_max ? json(*c.analysis.r_max) : json(nullptr)},
                   {"snapshots", c.analysis.snapshots},
                   {"correlation_csv", c.analysis.correlation_csv},
                   {"series", c.analysis.series}};
  const auto& e = c.expansion;
  j["expansion"] = {{"region", e.region ? json{{"lo", e.region->lo}, {"hi", e.region->hi}} : json(nullptr)},
                    {"periodic", e.periodic},
                    {"orientations", e.orientations},
                    {"z", e.z},
                    {"n_max", e.n_max},
                    {"order", e.order},
                    {"samples", e.samples},
                    {"tolerance", e.tolerance},
                    {"polymer_model", e.polymer_model ? *e.polymer_model : json(nullptr)},
                    {"random_models", e.random_models},
                    {"random_polymers", e.random_polymers},
                    {"random_max_size", e.random_max_size},
                    {"random_max_activity", e.random_max_activity},
                    {"max_cluster_size", e.max_cluster_size}};
  return j;
}

void validate_config(const RunConfig& c) {
  try {
    (void)c.params();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  if (!(c.box.L > 0.0) || !std::isfinite(c.box.L)) throw ConfigError("box.L must be positive");
  try {
    c.run_params().validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (c.run.replicas < 1) throw ConfigError("run.replicas must be >= 1");
  if (c.analysis.bins < 1) throw ConfigError("analysis.bins must be >= 1");
  if (c.analysis.r_max && !(*c.analysis.r_max > 0.0)) throw ConfigError("analysis.r_max must be positive");
  if (c.analysis.series != "total") {
    const auto dash = c.analysis.series.find('-');
    try {
      if (dash == std::string::npos) throw std::invalid_argument("");
      (void)parse_orientation(c.analysis.series.substr(0, dash));
      (void)parse_orientation(c.analysis.series.substr(dash + 1));
    } catch (const std::exception&) {
      throw ConfigError("analysis.series must be 'total' or '<o1>-<o2>' such as '3a-3b'");
    }
  }
  const auto& e = c.expansion;
  for (const auto& o : e.orientations) {
    try {
      (void)parse_orientation(o);
    } catch (const std::exception&) {
      throw ConfigError("expansion.orientations: bad token '" + o + "'");
    }
  }
  if (e.region) {
    for (int i = 0; i < 3; ++i) {
      if (!(e.region->hi[i] > e.region->lo[i])) throw ConfigError("expansion.region: hi must exceed lo on every axis");
    }
  }
  if (!(e.z >= 0.0)) throw ConfigError("expansion.z must be nonnegative");
  if (e.n_max < 1 || e.n_max > 4) throw ConfigError("expansion.n_max must lie in 1..4");
  if (e.order < 1 || e.order > 2) throw ConfigError("expansion.order must be 1 or 2");
  if (e.samples < 2) throw ConfigError("expansion.samples must be >= 2");
  if (!(e.tolerance > 0.0)) throw ConfigError("expansion.tolerance must be positive");
  if (e.random_models < 0 || e.random_polymers < 0 || e.random_max_size < 1 || e.random_max_size > 4) {
    throw ConfigError("expansion: random model sizes out of range (max size 1..4)");
  }
  if (!(e.random_max_activity >= 0.0)) throw ConfigError("expansion.random_max_activity must be nonnegative");
  if (e.max_cluster_size < 1 || e.max_cluster_size > 8) throw ConfigError("expansion.max_cluster_size must lie in 1..8");
}

}  // namespace platelat
