#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "platelat/configuration.hpp"
#include "platelat/geometry.hpp"

namespace platelat {

class LatticeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A generic block-indexed set: one byte per block, nonzero = member.
using BlockMask = std::vector<std::uint8_t>;
using BlockCoord = std::array<int, 3>;

/// Paving of the box by blocks of side k/2 and of smoothing cubes of side 8 blocks.
///
/// Smoothing cubes start one block outside the box, so smoothing cube a covers block indices
/// [8a - 1, 8a + 6] along each axis; this needs blocks_per_axis + 2 to be a multiple of 8.
class BlockLattice {
 public:
  /// Throws LatticeError unless L is a whole number of blocks.
  BlockLattice(const ModelParams& params, const SimBox& box);

  int n() const { return n_; }
  double side() const { return side_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  const SimBox& box() const { return box_; }

  std::size_t index(const BlockCoord& c) const {
    return (static_cast<std::size_t>(c[0]) * n_ + c[1]) * n_ + c[2];
  }
  BlockCoord coords(std::size_t idx) const {
    return {static_cast<int>(idx / (static_cast<std::size_t>(n_) * n_)), static_cast<int>((idx / n_) % n_),
            static_cast<int>(idx % n_)};
  }
  bool inside(const BlockCoord& c) const {
    return c[0] >= 0 && c[0] < n_ && c[1] >= 0 && c[1] < n_ && c[2] >= 0 && c[2] < n_;
  }
  /// Block holding x (half-open membership).
  BlockCoord block_of(const Vec3& x) const;
  std::size_t block_index_of(const Vec3& x) const { return index(block_of(x)); }
  Region block_region(const BlockCoord& c) const;

  /// Rescaled sup-distance from a block to the blocks outside the box.
  int distance_to_outside(const BlockCoord& c) const;
  /// Rescaled sup-distance between two block centers.
  static int distance(const BlockCoord& a, const BlockCoord& b);

  bool smoothing_aligned() const { return (n_ + 2) % 8 == 0; }
  int smoothing_per_axis() const { return (n_ + 2) / 8; }
  /// Smoothing cube index along one axis for a block index.
  static int smoothing_index(int block) { return (block + 1) / 8; }

 private:
  SimBox box_;
  double side_;
  int n_;
};

/// Boundary condition that forces spin q on blocks within `depth` of the outside.
struct SpinBoundary {
  int q = 0;  // 0: none
  int depth = 8;
};

/// Coarse spin per block: 0 empty, 1..3 single plate type, 4 several types.
struct SpinField {
  int n = 0;
  std::vector<std::uint8_t> spins;

  std::uint8_t at(const BlockCoord& c) const {
    return spins[(static_cast<std::size_t>(c[0]) * n + c[1]) * n + c[2]];
  }
  std::array<std::size_t, 5> census() const;
};

/// Spin assignment; with a boundary condition, empty blocks in the boundary layer carry spin q
/// and a boundary block holding a plate of another type throws LatticeError.
SpinField assign_spins(std::span<const Plate> plates, const BlockLattice& lattice, SpinBoundary boundary = {});
SpinField assign_spins(const PlateSet& config, const BlockLattice& lattice, SpinBoundary boundary = {});

/// Per corner block xi: 0 if the sampling cube S_xi is bad, otherwise its magnetization.
/// Cubes at the upper faces are truncated to the blocks that exist.
std::vector<std::uint8_t> classify_sampling_cubes(const SpinField& sigma);

struct BadRegion {
  BlockMask bad;        // B: union of bad sampling cubes
  BlockMask smoothed;   // B_s: union of smoothing cubes meeting B (restricted to the box)
  BlockMask closure;    // B-bar: blocks within rescaled distance 1 of B_s
};

/// Throws LatticeError when the smoothing grid is misaligned.
BadRegion bad_region(const SpinField& sigma);

struct Contour {
  std::vector<std::size_t> support;  // block indices, ascending
  std::vector<std::uint8_t> spins;   // spins on the support, same order
  std::vector<Plate> plates;         // plates centered in the support
  BlockMask support_mask;
  BlockMask exterior;
  std::vector<BlockMask> interiors;
  int m_ext = 0;
  std::vector<int> m_int;

  std::size_t holes() const { return interiors.size(); }
};

class ContourError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One contour per face-connected component of B-bar. Requires an open box. Throws
/// ContourError if an exterior cannot be identified or a boundary layer is not uniformly
/// magnetized.
std::vector<Contour> extract_contours(const SpinField& sigma, std::span<const Plate> plates,
                                      const BlockLattice& lattice);
std::vector<Contour> extract_contours(const SpinField& sigma, const BadRegion& region, std::span<const Plate> plates,
                                      const BlockLattice& lattice);

/// Face-connected components of a mask; labels are 1..count, 0 outside the mask.
std::vector<int> label_components(const BlockMask& mask, int n, int* count = nullptr);

struct ContourInvariantReport {
  bool ok = true;
  std::vector<std::string> violations;
  int min_complement_separation = -1;  // rescaled, -1 when fewer than two components
  int min_closure_separation = -1;
};

/// Checks B <= B_s <= B-bar, separations of components (>= 2 blocks for the complement of
/// B-bar, > 6 blocks for B-bar), smoothing cubes inside supports meeting a bad sampling cube,
/// and uniform boundary layers.
ContourInvariantReport check_contour_invariants(const SpinField& sigma, const BadRegion& region,
                                                const std::vector<Contour>& contours);

/// 1 iff some plate of `plates` sits outside the support and another inside, or some plate
/// centered in the exterior overlaps a plate of the contour.
int contour_link_indicator(const Contour& contour, std::span<const Plate> plates, const BlockLattice& lattice,
                           const ModelParams& params);

}  // namespace platelat
