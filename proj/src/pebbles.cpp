#include "platelat/pebbles.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace platelat {

std::string to_string(PebbleColor c) {
  switch (c) {
    case PebbleColor::red: return "red";
    case PebbleColor::green: return "green";
    case PebbleColor::blue: return "blue";
    case PebbleColor::black: break;
  }
  return "black";
}

PebbleGrid pebble_classify(const Region& block, std::span<const Plate> plates, const ModelParams& params) {
  const auto m = params.pebbles_per_block_edge();
  if (!m) {
    throw PebbleError("pebble analysis needs k^(1-alpha) to be an integer (got " +
                      std::to_string(std::pow(params.k(), 1.0 - params.alpha())) + ")");
  }
  PebbleGrid grid;
  grid.m = *m;
  grid.pebbles.assign(static_cast<std::size_t>(grid.m) * grid.m * grid.m, Pebble{});
  const double side = params.pebble_side();
  std::vector<unsigned> orientations(grid.pebbles.size(), 0);
  for (const Plate& p : plates) {
    if (!block.contains(p.center)) continue;
    std::array<int, 3> idx{};
    for (int a = 0; a < 3; ++a) {
      idx[a] = std::clamp(static_cast<int>(std::floor((p.center[a] - block.lo[a]) / side)), 0, grid.m - 1);
    }
    Pebble& pb = grid.at(idx[0], idx[1], idx[2]);
    const auto color = static_cast<PebbleColor>(p.orientation.type());
    if (pb.color != PebbleColor::black && pb.color != color) {
      throw PebbleError("pebble holds plates of two types; the configuration violates the hard core");
    }
    pb.color = color;
    ++pb.plates;
    orientations[(static_cast<std::size_t>(idx[0]) * grid.m + idx[1]) * grid.m + idx[2]] |= 1u
                                                                                           << p.orientation.index();
  }
  for (std::size_t i = 0; i < grid.pebbles.size(); ++i) {
    grid.pebbles[i].typical = orientations[i] != 0 && (orientations[i] & (orientations[i] - 1)) != 0;
  }
  return grid;
}

int count_atypical(const PebbleGrid& grid) {
  return static_cast<int>(std::count_if(grid.pebbles.begin(), grid.pebbles.end(), [](const Pebble& p) { return !p.typical; }));
}

double atypical_threshold(const ModelParams& params) { return std::pow(params.k(), 2.0 * (1.0 - params.alpha())) / 2.0; }

TileReport check_tile_properties(const PebbleGrid& grid) {
  TileReport rep;
  const int m = grid.m;
  // clean[axis][slice][color]: no typical pebble of that color in the slab
  std::vector<std::array<std::array<bool, 4>, 3>> has_typical(m);
  for (auto& s : has_typical) {
    for (auto& a : s) a.fill(false);
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int l = 0; l < m; ++l) {
        const Pebble& p = grid.at(i, j, l);
        if (!p.typical) continue;
        const auto c = static_cast<std::size_t>(p.color);
        has_typical[i][0][c] = true;
        has_typical[j][1][c] = true;
        has_typical[l][2][c] = true;
      }
    }
  }
  auto tile_clean = [&](int axis, int slice, PebbleColor own) {
    for (int c = 1; c <= 3; ++c) {
      if (c != static_cast<int>(own) && has_typical[slice][axis][c]) return false;
    }
    return true;
  };
  auto where = [](int i, int j, int l) {
    return "(" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(l) + ")";
  };
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int l = 0; l < m; ++l) {
        const Pebble& p = grid.at(i, j, l);
        if (p.color == PebbleColor::black) continue;
        const std::array<int, 3> slice{i, j, l};
        if (p.typical) {
          for (int a = 0; a < 3; ++a) {
            if (!tile_clean(a, slice[a], p.color)) {
              rep.ok = false;
              rep.witnesses.push_back("*1 typical pebble " + where(i, j, l) + " tile axis " + std::to_string(a + 1));
            }
          }
        } else {
          bool any = false;
          for (int a = 0; a < 3; ++a) any = any || tile_clean(a, slice[a], p.color);
          if (!any) {
            rep.ok = false;
            rep.witnesses.push_back("*2 atypical pebble " + where(i, j, l) + " has no clean tile");
          }
        }
      }
    }
  }
  return rep;
}

}  // namespace platelat
