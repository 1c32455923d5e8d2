#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "platelat/configuration.hpp"
#include "platelat/geometry.hpp"
#include "platelat/rng.hpp"
#include "platelat/snapshot.hpp"

namespace platelat {

struct MoveWeights {
  double insert = 0.35;
  double remove = 0.35;
  double translate = 0.2;
  double reorient = 0.1;
};

struct RunParams {
  double z = 0.0;
  std::int64_t sweeps = 0;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  MoveWeights move_weights{};
  int boundary_q = 0;        // 0: free boundary, otherwise the type enforced near the walls
  int boundary_depth = 8;    // in blocks, counted with the rescaled sup-distance to the outside
  double burn_in_fraction = 0.2;
  std::int64_t sample_stride = 1;    // sweeps between recorded samples
  std::int64_t snapshot_stride = 0;  // sweeps between snapshots, 0 = none
  std::optional<double> translate_step;  // default k^alpha
  bool hard_core = true;                 // test hook: false gives an ideal gas
  bool strict_containment = false;
  bool spin_census = false;  // record block-spin counts (needs a commensurate block lattice)
  std::optional<Region> center_region;   // default: the whole box

  /// Throws std::invalid_argument when the parameters violate their invariants.
  void validate() const;
};

enum class MoveKind { insert = 0, remove = 1, translate = 2, reorient = 3 };

struct MoveCounters {
  std::array<std::uint64_t, 4> attempted{};
  std::array<std::uint64_t, 4> accepted{};
  double rate(MoveKind m) const {
    const auto i = static_cast<std::size_t>(m);
    return attempted[i] ? static_cast<double>(accepted[i]) / static_cast<double>(attempted[i]) : 0.0;
  }
};

/// One recorded row of the observable stream.
struct Sample {
  std::int64_t sweep = 0;
  std::array<std::size_t, kNumOrientations> counts{};
  std::size_t total() const;
  double order_parameter = 0.0;  // NaN when the box is empty
  std::array<double, 4> acceptance{};
  std::array<std::size_t, 5> spin_census{};
};

/// Six counts 1a..3b -> S = (3 max_i N_i^type / N - 1) / 2; throws std::domain_error for N = 0.
double order_parameter(const std::array<std::size_t, kNumOrientations>& counts);

/// Per-chain sample streams. Merging is a union keyed by chain id, hence associative and
/// commutative; estimates pool all chains.
class ObservableAccumulator {
 public:
  void add(std::uint64_t chain, const Sample& s) { chains_[chain].push_back(s); }
  void merge(const ObservableAccumulator& other);
  bool empty() const;
  std::size_t sample_count() const;
  const std::map<std::uint64_t, std::vector<Sample>>& chains() const { return chains_; }

  struct Estimate {
    double mean = 0.0;
    double error = 0.0;
    std::size_t samples = 0;
    bool converged = true;
  };
  /// Pooled mean of f(sample) with per-chain blocking errors combined by sample weight.
  Estimate estimate(const std::function<double(const Sample&)>& f) const;
  /// Density of one orientation, N_o / volume.
  Estimate density(int orientation_index, double volume) const;
  Estimate total_density(double volume) const;
  Estimate order_parameter() const;

 private:
  std::map<std::uint64_t, std::vector<Sample>> chains_;
};

void write_observables_header(std::ostream& out);
void write_observable_row(std::ostream& out, const Sample& s);

/// Sweep length: max(1, ceil(min(6 z |R|, |R| / plate volume))) moves.
std::int64_t steps_per_sweep(const RunParams& run, const ModelParams& params, const SimBox& box);

/// Grand-canonical Metropolis chain on a PlateSet.
class Sampler {
 public:
  Sampler(ModelParams params, SimBox box, RunParams run);

  /// One Metropolis move; returns whether it was accepted.
  bool step();
  void sweep();

  const PlateSet& state() const { return state_; }
  PlateSet& state() { return state_; }
  const MoveCounters& counters() const { return counters_; }
  const RunParams& run_params() const { return run_; }
  Philox& rng() { return rng_; }

  /// True iff a plate may sit at this center under the boundary condition.
  bool boundary_compatible(const Plate& p) const;
  double insert_acceptance(std::size_t n_before) const;
  double delete_acceptance(std::size_t n_before) const;

  struct RunOutput {
    ObservableAccumulator observables;
    std::vector<Snapshot> snapshots;
  };
  /// Runs `sweeps` sweeps; the first burn_in_fraction of them are discarded. `on_sample` sees
  /// every recorded sample together with the current state.
  RunOutput run(const std::function<void(const PlateSet&, const Sample&)>& on_sample = {});

 private:
  Plate random_plate();
  bool in_region(const Vec3& x) const;

  ModelParams params_;
  SimBox box_;
  RunParams run_;
  PlateSet state_;
  Philox rng_;
  MoveCounters counters_;
  Region region_;
  double region_volume_ = 0.0;
  double step_ = 1.0;
  std::array<double, 4> cumulative_weights_{};
  int blocks_per_axis_ = 0;
  double block_side_ = 1.0;
};

/// Free-function form of one move.
bool step(Sampler& sampler);

/// Snapshot of the sampler state.
Snapshot make_snapshot(const Sampler& sampler, std::int64_t sweep);

// ---- pair correlation -----------------------------------------------------------------------

struct PairCorrelation {
  std::vector<double> edges;  // bin edges in sup-norm distance
  /// Unordered orientation pair (o1 <= o2) -> truncated correlation per bin; key -1 holds the
  /// orientation-summed function rho_2 - rho^2.
  struct Series {
    std::vector<double> value;
    std::vector<double> error;
  };
  std::map<int, Series> series;
  std::size_t snapshots = 0;

  static int pair_key(int o1, int o2) { return o1 <= o2 ? o1 * kNumOrientations + o2 : o2 * kNumOrientations + o1; }
  static constexpr int kTotal = -1;
};

class InsufficientSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binned rho_2(o1,o2; r) - rho_o1 rho_o2 with jackknife errors over snapshots. Distance is the
/// sup-norm (minimum image when periodic). Needs >= 2 snapshots sharing one box.
PairCorrelation pair_correlation(const std::vector<Snapshot>& snapshots, int bins, double r_max,
                                 std::size_t jackknife_blocks = 20);

/// Measure of {(x, y) in box^2 : lo <= d_inf(x, y) < hi}.
double pair_shell_measure(const SimBox& box, double lo, double hi);

struct DecayFit {
  bool measurable = false;
  double xi = 0.0;
  double xi_error = 0.0;
  double amplitude = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::size_t bins_used = 0;
  double noise_floor = 0.0;
  std::vector<double> residuals;  // normalised, per used bin
  std::string reason;
};

/// Weighted least squares of log|value| against r on the bins above the noise floor
/// (3 x median bin error). Fewer than `min_bins` such bins gives measurable = false.
/// Throws std::invalid_argument for empty or mismatched input.
DecayFit fit_decay(const std::vector<double>& r, const std::vector<double>& value, const std::vector<double>& error,
                   std::size_t min_bins = 5);

// ---- bad block / dipole ratios --------------------------------------------------------------

enum class RatioMode { sampler, quadrature };

struct RatioEstimate {
  double value = 0.0;
  double error = 0.0;      // statistical (1 sigma)
  double remainder = 0.0;  // truncation bound (quadrature mode)
  RatioMode mode = RatioMode::sampler;
  std::size_t samples = 0;
};

class IncompatibleMode : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Z^{>=2}(D) / Z^q(D) for an isolated cube D of side `block_side`: configurations holding at
/// least two plate types against configurations of a single type q (empty included).
///
/// Sampler mode runs the unconstrained chain in the cube and measures the ratio of the two
/// event probabilities. Quadrature mode sums the n <= 3 terms of both partition functions and
/// is only accepted when the truncation tail is below 5% (`IncompatibleMode` otherwise).
RatioEstimate estimate_block_ratio(const ModelParams& params, double z, double block_side, std::int64_t samples,
                                   RatioMode mode = RatioMode::sampler, std::uint64_t seed = 1);

/// Same for two face-adjacent cubes D1 | D2 along axis 1: both cubes non-empty, each holding a
/// single plate type, with the two types different; denominator Z^q(D1 u D2).
RatioEstimate estimate_dipole_ratio(const ModelParams& params, double z, double block_side, std::int64_t samples,
                                    RatioMode mode = RatioMode::sampler, std::uint64_t seed = 1);

}  // namespace platelat
