#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace platelat {

using Vec3 = std::array<double, 3>;

/// Side lengths of a plate are 1 x k^alpha x k (thickness 1 sets the unit of length).
class ModelParams {
 public:
  ModelParams(double k, double alpha);

  double k() const { return k_; }
  double alpha() const { return alpha_; }

  /// Intermediate side k^alpha.
  double intermediate() const { return intermediate_; }
  double block_side() const { return k_ / 2.0; }
  double pebble_side() const { return intermediate_ / 2.0; }
  double smoothing_side() const { return 8.0 * block_side(); }
  double plate_volume() const { return k_ * intermediate_; }

  /// The rigorous nematic result needs 3/4 < alpha <= 1; other alphas are accepted but flagged.
  bool in_theorem_regime() const { return alpha_ > 0.75; }

  /// Pebbles per block edge, k^(1-alpha), when it is an integer.
  std::optional<int> pebbles_per_block_edge() const;

 private:
  double k_;
  double alpha_;
  double intermediate_;
};

/// One of the six allowed orientations. `type_axis` (0,1,2) carries the thickness-1 side.
///
/// Convention for the variant: `a` places the major side k on the axis following the type axis
/// cyclically (1 -> 2, 2 -> 3, 3 -> 1), `b` places it on the remaining axis. So 3_a has
/// extents (k, k^alpha, 1) and 3_b has (k^alpha, k, 1).
struct Orientation {
  int type_axis = 0;  // 0-based axis index
  bool variant_b = false;

  /// Canonical index 0..5 in the order 1a,1b,2a,2b,3a,3b.
  constexpr int index() const { return 2 * type_axis + (variant_b ? 1 : 0); }
  /// Plate type 1, 2 or 3.
  constexpr int type() const { return type_axis + 1; }
  static constexpr Orientation from_index(int i) { return Orientation{i / 2, (i % 2) == 1}; }

  friend constexpr bool operator==(Orientation, Orientation) = default;
};

inline constexpr int kNumOrientations = 6;
inline constexpr int kNumTypes = 3;

std::string to_token(Orientation o);
/// Parses `1a|1b|2a|2b|3a|3b`; throws std::invalid_argument otherwise.
Orientation parse_orientation(std::string_view token);

struct Plate {
  Vec3 center{};
  Orientation orientation{};

  friend bool operator==(const Plate&, const Plate&) = default;
};

enum class BoundaryMode { open, periodic };

/// Cubic box [0, L)^3.
struct SimBox {
  double L = 1.0;
  BoundaryMode mode = BoundaryMode::open;

  double volume() const { return L * L * L; }
  bool contains(const Vec3& x) const;
  /// Displacement b - a, minimum image in periodic mode.
  Vec3 displacement(const Vec3& a, const Vec3& b) const;
  /// Folds a point back into the box (periodic) or returns it unchanged (open).
  Vec3 wrap(Vec3 x) const;
};

/// Axis-aligned region [lo, hi).
struct Region {
  Vec3 lo{};
  Vec3 hi{};
  double volume() const { return (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]); }
  bool contains(const Vec3& x) const {
    for (int i = 0; i < 3; ++i) {
      if (!(x[i] >= lo[i] && x[i] < hi[i])) return false;
    }
    return true;
  }
  static Region cube(double side) { return Region{{0.0, 0.0, 0.0}, {side, side, side}}; }
};

std::string to_string(BoundaryMode mode);
BoundaryMode parse_boundary_mode(std::string_view s);

/// Full side lengths along axes 1,2,3.
Vec3 axis_extents(Orientation o, const ModelParams& params);

/// Strict overlap of the two axis-aligned supports; touching faces do not overlap.
bool overlap(const Plate& p, const Plate& q, const ModelParams& params, const SimBox& box);

/// Overlap in infinite space without images.
bool overlap_free_space(const Plate& p, const Plate& q, const ModelParams& params);

/// Per-axis overlap thresholds (a_i + b_i) / 2.
Vec3 overlap_thresholds(Orientation o, Orientation o2, const ModelParams& params);

/// Volume of centers y such that (y, o2) overlaps (0, o).
double excluded_volume(Orientation o, Orientation o2, const ModelParams& params);

}  // namespace platelat
