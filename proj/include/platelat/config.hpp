#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "platelat/gcmc.hpp"
#include "platelat/geometry.hpp"

namespace platelat {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kConfigFormatVersion = 1;

struct RunConfig {
  struct Model {
    double k = 2.0;
    double alpha = 1.0;
    bool operator==(const Model&) const = default;
  };
  struct Box {
    double L = 1.0;
    BoundaryMode mode = BoundaryMode::open;
    bool operator==(const Box&) const = default;
  };
  struct Run {
    double z = 0.0;
    std::int64_t sweeps = 0;
    std::uint64_t seed = 1;
    double insert = 0.35, remove = 0.35, translate = 0.2, reorient = 0.1;
    int boundary_q = 0;
    int boundary_depth = 8;
    std::int64_t snapshot_stride = 0;
    std::int64_t sample_stride = 1;
    double burn_in_fraction = 0.2;
    int replicas = 1;
    bool hard_core = true;
    bool operator==(const Run&) const = default;
  };
  struct Analysis {
    bool contours = false;
    bool pebbles = false;
    bool pair_correlation = false;
    int bins = 20;
    std::optional<double> r_max;
    std::vector<std::string> snapshots;  // inputs for contours / pebbles
    std::string correlation_csv;         // input for fit-decay
    std::string series = "total";        // "total" or "<o1>-<o2>", e.g. "3a-3b"
    bool operator==(const Analysis&) const = default;
  };
  struct Expansion {
    std::optional<Region> region;
    bool periodic = false;
    std::vector<std::string> orientations{"1a", "1b", "2a", "2b", "3a", "3b"};
    double z = 0.0;
    int n_max = 3;
    int order = 2;
    std::int64_t samples = 20000;
    double tolerance = 1e-2;
    std::optional<nlohmann::json> polymer_model;
    int random_models = 0;  // polymer-check: number of random models when no model is given
    int random_polymers = 10;
    int random_max_size = 4;
    double random_max_activity = 1e-3;
    int max_cluster_size = 4;
    bool operator==(const Expansion& o) const;
  };

  int format_version = kConfigFormatVersion;
  Model model;
  Box box;
  Run run;
  Analysis analysis;
  Expansion expansion;

  bool operator==(const RunConfig&) const = default;

  ModelParams params() const { return ModelParams(model.k, model.alpha); }
  SimBox sim_box() const { return SimBox{box.L, box.mode}; }
  RunParams run_params() const;
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);
nlohmann::json serialize_config(const RunConfig& c);

/// Module preconditions that do not depend on the subcommand. Throws ConfigError.
void validate_config(const RunConfig& c);

}  // namespace platelat
