#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "platelat/geometry.hpp"

namespace platelat {

/// Truncated series value with a bound on what was left out.
struct SeriesEstimate {
  double value = 0.0;
  int order = 0;
  double remainder = 0.0;   // bound on |exact - value| from the truncation
  bool rigorous = true;     // false when the remainder is only heuristic
  double stat_error = 0.0;  // 1 sigma, Monte Carlo integrals only
  std::vector<double> coefficients;  // series coefficients by power of the expansion parameter
  std::map<std::string, double> diagnostics;
};

void to_json(nlohmann::json& j, const SeriesEstimate& s);
void from_json(const nlohmann::json& j, SeriesEstimate& s);

class ExpansionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---- Ursell functions -----------------------------------------------------------------------

/// Simple undirected graph on n <= 32 vertices; adj[i] has bit j set iff ij is an edge.
struct OverlapGraph {
  int n = 0;
  std::vector<std::uint32_t> adj;
  bool connected() const;
};

/// Overlap graph of plates in free space.
OverlapGraph overlap_graph(std::span<const Plate> plates, const ModelParams& params);

/// Sum over connected spanning subgraphs G of (-1)^|E(G)|; n <= 10, ExpansionError otherwise.
std::int64_t ursell(const OverlapGraph& g);
std::int64_t ursell(std::span<const Plate> plates, const ModelParams& params);

// ---- plate partition functions --------------------------------------------------------------

/// Centers range over `region`; `periodic` treats the region as a periodic cube (bulk).
struct ExpansionRegion {
  Region region;
  bool periodic = false;
};

struct BruteForceOptions {
  std::int64_t samples = 20000;  // center draws per order n >= 2
  std::uint64_t seed = 1;
  double tolerance = 1e-2;  // maximal accepted truncation remainder on log Z
  bool hard_core = true;
};

/// log Z from the finite sum over n <= n_max (<= 4) plates, each integral a stratified Monte Carlo
/// average over centers with all orientation tuples enumerated. Requires an open region.
/// Throws ExpansionError when the remainder exceeds the tolerance.
SeriesEstimate brute_force_log_z(const ModelParams& params, const Region& region,
                                 std::span<const Orientation> orientations, double z, int n_max,
                                 const BruteForceOptions& options = {});

/// Mayer series of log Z to order <= 2 with exact pair integrals, and a tree-graph bound on all
/// higher orders (infinite when that bound diverges). coefficients = {b1, b2} with
/// log Z ~ b1 z + b2 z^2.
SeriesEstimate mayer_log_z(const ModelParams& params, const ExpansionRegion& region,
                           std::span<const Orientation> orientations, double z, int order);

/// Mean plate density from the coefficients of mayer_log_z: (b1 z + 2 b2 z^2) / |region|.
double mayer_density(const SeriesEstimate& s, double z, double volume);

std::vector<Orientation> all_orientations();
std::vector<Orientation> orientations_of_type(int type);

// ---- polymers -------------------------------------------------------------------------------

using BlockCoord3 = std::array<int, 3>;

struct Polymer {
  std::vector<BlockCoord3> blocks;  // distinct, sorted
  double activity = 0.0;
};

/// Polymers on a finite block lattice. Two polymers are compatible iff no block of one is
/// face-, edge- or corner-adjacent to (or equal to) a block of the other.
class PolymerModel {
 public:
  PolymerModel() = default;
  /// Throws ExpansionError if a polymer is empty, leaves the lattice, or is not D-connected.
  PolymerModel(std::array<int, 3> dims, std::vector<Polymer> polymers);

  const std::array<int, 3>& dims() const { return dims_; }
  const std::vector<Polymer>& polymers() const { return polymers_; }
  std::size_t size() const { return polymers_.size(); }
  bool compatible(std::size_t i, std::size_t j) const;
  /// Bit mask of polymers incompatible with polymer i (i itself included); size() <= 64.
  std::uint64_t incompatible_mask(std::size_t i) const { return incompatible_[i]; }

  static bool d_connected(const std::vector<BlockCoord3>& blocks);

 private:
  std::array<int, 3> dims_{0, 0, 0};
  std::vector<Polymer> polymers_;
  std::vector<std::uint64_t> incompatible_;
};

void to_json(nlohmann::json& j, const PolymerModel& m);
void from_json(const nlohmann::json& j, PolymerModel& m);

/// Random model: `count` distinct D-connected polymers of 1..max_size blocks grown at random,
/// activities uniform in [-max_activity, max_activity].
PolymerModel random_polymer_model(std::array<int, 3> dims, int count, int max_size, double max_activity,
                                  std::uint64_t seed);

/// 1 + sum over sets of pairwise compatible polymers of the product of activities.
/// Throws ExpansionError beyond 4^3 blocks, polymers of more than 4 blocks, or 40 polymers.
double polymer_z_exact(const PolymerModel& model);

/// Ursell function of a polymer tuple: over the incompatibility graph, repeats incompatible.
std::int64_t polymer_ursell(const PolymerModel& model, std::span<const std::size_t> tuple);

/// Clusters of at most `max_cluster_size` polymers. Refuses (ExpansionError) unless the
/// criterion sum_{Y incompatible with X} |K(Y)| e^{a|Y|} <= a|X| holds with a = log 2; the
/// remainder is the tail bound from the largest activity scaling that keeps the criterion,
/// minimized over a grid of a.
SeriesEstimate polymer_log_z_cluster(const PolymerModel& model, int max_cluster_size);

// ---- connected plate integrals --------------------------------------------------------------

struct PlateBoundCheck {
  int l = 1;
  double value = 0.0;       // sum of the n = l and n = l + 1 terms
  double stat_error = 0.0;
  std::vector<double> terms;
  double scale = 0.0;       // z |S| (z k^2)^(l - 1)
  double empirical_constant = 0.0;  // (value / scale)^(1/l)
};

/// (z^n / n!) int |phi^T(p_1..p_n)| with p_1 centered in S, all plates of type q, summed over
/// n = l, l + 1 (l <= 4). n <= 2 exact, higher orders Monte Carlo with a fixed seed.
PlateBoundCheck connected_plate_bound_check(const ModelParams& params, const Region& S, int q, double z, int l,
                                            std::int64_t samples = 20000, std::uint64_t seed = 1);

}  // namespace platelat
