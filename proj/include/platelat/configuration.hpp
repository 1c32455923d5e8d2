#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "platelat/geometry.hpp"

namespace platelat {

/// Stable handle to a stored plate; stays valid until that plate is removed.
using PlateId = std::uint32_t;

class PlateSetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hard-plate configuration with a uniform cell index.
///
/// Cells have side >= k, so every overlap partner of a plate lies in the 27-cell neighbourhood of
/// its center's cell. Storage is a slot map: removal is O(1) and ids of other plates do not move.
class PlateSet {
 public:
  struct Options {
    /// Require the whole support (not just the center) inside the box. Open mode only.
    bool strict_containment = false;
    /// Test hook: ignore overlaps entirely (ideal gas of six species).
    bool hard_core = true;
  };

  PlateSet(ModelParams params, SimBox box);
  PlateSet(ModelParams params, SimBox box, Options options);

  const ModelParams& params() const { return params_; }
  const SimBox& box() const { return box_; }
  const Options& options() const { return options_; }

  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

  /// Inserts p and returns its id iff it overlaps no stored plate. Throws PlateSetError when the
  /// center lies outside the box.
  std::optional<PlateId> insert_if_free(const Plate& p);
  bool try_insert(const Plate& p) { return insert_if_free(p).has_value(); }

  /// Removes and returns the plate with this id. Throws PlateSetError for a dead id.
  Plate remove(PlateId id);

  /// Replaces the plate `id` by `p` iff `p` overlaps no other plate. The set is unchanged otherwise.
  bool replace_if_free(PlateId id, const Plate& p);

  /// True iff p overlaps some stored plate other than `ignore`.
  bool overlaps_any(const Plate& p, std::optional<PlateId> ignore = std::nullopt) const;

  /// Same answer via an O(N) scan; kept for checking the cell index.
  bool overlaps_any_bruteforce(const Plate& p, std::optional<PlateId> ignore = std::nullopt) const;

  bool contains(PlateId id) const { return id < slots_.size() && slots_[id].alive; }
  const Plate& at(PlateId id) const;

  /// Id of the i-th live plate, 0 <= i < size(); O(1), used for uniform deletion proposals.
  PlateId id_at_rank(std::size_t i) const { return dense_[i]; }

  /// Live plates in storage order.
  std::vector<Plate> plates() const;
  std::vector<PlateId> ids() const { return dense_; }

  /// Counts per orientation in canonical order 1a,1b,2a,2b,3a,3b.
  std::array<std::size_t, kNumOrientations> count_by_orientation() const;

  /// True iff the support of p lies inside the box (meaningful for strict containment).
  bool support_inside(const Plate& p) const;

  /// Rebuilds cell membership from scratch and compares it with the incremental index.
  bool index_consistent() const;

  /// Full pairwise scan of the hard-core constraint.
  bool hard_core_satisfied() const;

  int cells_per_axis() const { return ncell_; }
  double cell_side() const { return cell_side_; }

 private:
  struct Slot {
    Plate plate;
    std::size_t dense_pos = 0;
    std::size_t cell = 0;
    std::size_t cell_pos = 0;
    bool alive = false;
  };

  std::size_t cell_of(const Vec3& x) const;
  std::array<int, 3> cell_coords(const Vec3& x) const;
  void link(PlateId id);
  void unlink(PlateId id);
  void check_center(const Vec3& x) const;
  template <class Fn>
  bool any_neighbour(const Vec3& x, Fn&& fn) const;

  ModelParams params_;
  SimBox box_;
  Options options_;
  int ncell_ = 1;
  double cell_side_ = 1.0;
  std::vector<Slot> slots_;
  std::vector<PlateId> free_;
  std::vector<PlateId> dense_;
  std::vector<std::vector<PlateId>> cells_;
  std::size_t count_ = 0;
};

}  // namespace platelat
