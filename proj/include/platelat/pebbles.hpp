#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "platelat/geometry.hpp"

namespace platelat {

class PebbleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Type of the plates centered in a pebble: red/green/blue for types 1/2/3, black when empty.
enum class PebbleColor : std::uint8_t { black = 0, red = 1, green = 2, blue = 3 };

std::string to_string(PebbleColor c);

struct Pebble {
  PebbleColor color = PebbleColor::black;
  bool typical = false;  // holds two plates of different orientations
  int plates = 0;
};

/// Pebbles of one block, m = k^(1-alpha) per edge, indexed (i * m + j) * m + l.
struct PebbleGrid {
  int m = 0;
  std::vector<Pebble> pebbles;

  const Pebble& at(int i, int j, int l) const { return pebbles[(static_cast<std::size_t>(i) * m + j) * m + l]; }
  Pebble& at(int i, int j, int l) { return pebbles[(static_cast<std::size_t>(i) * m + j) * m + l]; }
};

/// Classifies the pebbles of the block `block` (a cube of side k/2). Plates belong to the pebble
/// holding their center; plates centered outside the block are ignored. Throws PebbleError when
/// k^(1-alpha) is not an integer or when a pebble holds two plate types.
PebbleGrid pebble_classify(const Region& block, std::span<const Plate> plates, const ModelParams& params);

int count_atypical(const PebbleGrid& grid);

/// Lower bound k^(2(1-alpha)) / 2 on the atypical pebbles of a block holding two plate types.
double atypical_threshold(const ModelParams& params);

struct TileReport {
  bool ok = true;
  /// One line per failure: property, pebble index triple, offending tile axis.
  std::vector<std::string> witnesses;
};

/// Tiles are the one-pebble-thick slabs of the block orthogonal to each axis.
/// (*1) no tile through a typical pebble holds a typical pebble of another color;
/// (*2) every non-empty atypical pebble has a tile through it without typical pebbles of another
/// color. Works on any grid, including hand-built colorings.
TileReport check_tile_properties(const PebbleGrid& grid);

}  // namespace platelat
