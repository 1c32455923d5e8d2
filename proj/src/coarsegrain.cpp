#include "platelat/coarsegrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <bit>

namespace platelat {

BlockLattice::BlockLattice(const ModelParams& params, const SimBox& box) : box_(box), side_(params.block_side()) {
  const double r = box.L / side_;
  n_ = static_cast<int>(std::lround(r));
  if (n_ < 1 || std::abs(r - n_) > 1e-9 * std::max(1.0, r)) {
    throw LatticeError("box side " + std::to_string(box.L) + " is not a whole number of blocks of side " +
                       std::to_string(side_));
  }
}

BlockCoord BlockLattice::block_of(const Vec3& x) const {
  BlockCoord c{};
  for (int i = 0; i < 3; ++i) c[i] = std::clamp(static_cast<int>(std::floor(x[i] / side_)), 0, n_ - 1);
  return c;
}

Region BlockLattice::block_region(const BlockCoord& c) const {
  Region r;
  for (int i = 0; i < 3; ++i) {
    r.lo[i] = c[i] * side_;
    r.hi[i] = (c[i] + 1) * side_;
  }
  return r;
}

int BlockLattice::distance_to_outside(const BlockCoord& c) const {
  int d = n_;
  for (int i = 0; i < 3; ++i) d = std::min({d, c[i] + 1, n_ - c[i]});
  return d;
}

int BlockLattice::distance(const BlockCoord& a, const BlockCoord& b) {
  return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

std::array<std::size_t, 5> SpinField::census() const {
  std::array<std::size_t, 5> c{};
  for (auto s : spins) ++c[s];
  return c;
}

namespace {

SpinField spins_from_masks(const std::vector<unsigned>& masks, const BlockLattice& lattice, SpinBoundary boundary) {
  SpinField f;
  f.n = lattice.n();
  f.spins.assign(lattice.size(), 0);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const unsigned m = masks[i];
    std::uint8_t s = 0;
    if (m != 0) s = std::popcount(m) == 1 ? static_cast<std::uint8_t>(std::countr_zero(m) + 1) : 4;
    if (boundary.q != 0 && lattice.distance_to_outside(lattice.coords(i)) <= boundary.depth) {
      if (m != 0 && m != (1u << (boundary.q - 1))) {
        throw LatticeError("boundary block holds a plate of a type other than " + std::to_string(boundary.q));
      }
      s = static_cast<std::uint8_t>(boundary.q);
    }
    f.spins[i] = s;
  }
  return f;
}

}  // namespace

SpinField assign_spins(std::span<const Plate> plates, const BlockLattice& lattice, SpinBoundary boundary) {
  std::vector<unsigned> masks(lattice.size(), 0);
  for (const Plate& p : plates) masks[lattice.block_index_of(p.center)] |= 1u << (p.orientation.type() - 1);
  return spins_from_masks(masks, lattice, boundary);
}

SpinField assign_spins(const PlateSet& config, const BlockLattice& lattice, SpinBoundary boundary) {
  std::vector<unsigned> masks(lattice.size(), 0);
  for (PlateId id : config.ids()) {
    const Plate& p = config.at(id);
    masks[lattice.block_index_of(p.center)] |= 1u << (p.orientation.type() - 1);
  }
  return spins_from_masks(masks, lattice, boundary);
}

namespace {

template <class Fn>
void for_each_block(int n, Fn&& fn) {
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      for (int z = 0; z < n; ++z) fn(BlockCoord{x, y, z});
    }
  }
}

std::size_t flat(int n, const BlockCoord& c) { return (static_cast<std::size_t>(c[0]) * n + c[1]) * n + c[2]; }

bool in_range(int n, const BlockCoord& c) {
  return c[0] >= 0 && c[0] < n && c[1] >= 0 && c[1] < n && c[2] >= 0 && c[2] < n;
}

// Calls fn on every in-range block of the cube [c - r, c + r].
template <class Fn>
void for_each_near(int n, const BlockCoord& c, int r, Fn&& fn) {
  for (int x = std::max(0, c[0] - r); x <= std::min(n - 1, c[0] + r); ++x) {
    for (int y = std::max(0, c[1] - r); y <= std::min(n - 1, c[1] + r); ++y) {
      for (int z = std::max(0, c[2] - r); z <= std::min(n - 1, c[2] + r); ++z) fn(BlockCoord{x, y, z});
    }
  }
}

constexpr std::array<BlockCoord, 6> kFaces{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};

BlockCoord add(const BlockCoord& a, const BlockCoord& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

bool on_box_surface(int n, const BlockCoord& c) {
  for (int i = 0; i < 3; ++i) {
    if (c[i] == 0 || c[i] == n - 1) return true;
  }
  return false;
}

}  // namespace

std::vector<std::uint8_t> classify_sampling_cubes(const SpinField& sigma) {
  const int n = sigma.n;
  std::vector<std::uint8_t> out(sigma.spins.size(), 0);
  for_each_block(n, [&](const BlockCoord& xi) {
    const std::uint8_t s0 = sigma.at(xi);
    bool good = s0 >= 1 && s0 <= 3;
    for (int d = 0; d < 8 && good; ++d) {
      const BlockCoord eta = add(xi, {d >> 2 & 1, d >> 1 & 1, d & 1});
      if (in_range(n, eta) && sigma.at(eta) != s0) good = false;
    }
    out[flat(n, xi)] = good ? s0 : 0;
  });
  return out;
}

BadRegion bad_region(const SpinField& sigma) {
  const int n = sigma.n;
  if ((n + 2) % 8 != 0) {
    throw LatticeError("smoothing grid misaligned: blocks per axis + 2 = " + std::to_string(n + 2) +
                       " is not a multiple of 8");
  }
  BadRegion r;
  r.bad.assign(sigma.spins.size(), 0);
  r.smoothed.assign(sigma.spins.size(), 0);
  r.closure.assign(sigma.spins.size(), 0);

  const auto cubes = classify_sampling_cubes(sigma);
  for_each_block(n, [&](const BlockCoord& xi) {
    if (cubes[flat(n, xi)] != 0) return;
    for (int d = 0; d < 8; ++d) {
      const BlockCoord eta = add(xi, {d >> 2 & 1, d >> 1 & 1, d & 1});
      if (in_range(n, eta)) r.bad[flat(n, eta)] = 1;
    }
  });

  const int m = (n + 2) / 8;
  std::vector<std::uint8_t> marked(static_cast<std::size_t>(m) * m * m, 0);
  for_each_block(n, [&](const BlockCoord& c) {
    if (!r.bad[flat(n, c)]) return;
    const BlockCoord a{BlockLattice::smoothing_index(c[0]), BlockLattice::smoothing_index(c[1]),
                       BlockLattice::smoothing_index(c[2])};
    marked[flat(m, a)] = 1;
  });
  for_each_block(n, [&](const BlockCoord& c) {
    const BlockCoord a{BlockLattice::smoothing_index(c[0]), BlockLattice::smoothing_index(c[1]),
                       BlockLattice::smoothing_index(c[2])};
    if (marked[flat(m, a)]) r.smoothed[flat(n, c)] = 1;
  });
  for_each_block(n, [&](const BlockCoord& c) {
    if (!r.smoothed[flat(n, c)]) return;
    for_each_near(n, c, 1, [&](const BlockCoord& e) { r.closure[flat(n, e)] = 1; });
  });
  return r;
}

std::vector<int> label_components(const BlockMask& mask, int n, int* count) {
  std::vector<int> label(mask.size(), 0);
  int next = 0;
  std::vector<BlockCoord> stack;
  for_each_block(n, [&](const BlockCoord& start) {
    const std::size_t s = flat(n, start);
    if (!mask[s] || label[s]) return;
    label[s] = ++next;
    stack.push_back(start);
    while (!stack.empty()) {
      const BlockCoord c = stack.back();
      stack.pop_back();
      for (const auto& f : kFaces) {
        const BlockCoord e = add(c, f);
        if (!in_range(n, e)) continue;
        const std::size_t i = flat(n, e);
        if (mask[i] && !label[i]) {
          label[i] = next;
          stack.push_back(e);
        }
      }
    }
  });
  if (count) *count = next;
  return label;
}

namespace {

// Uniform spin on the blocks of `support` within rescaled distance 1 of `region`.
int layer_magnetization(const SpinField& sigma, const BlockMask& support, const BlockMask& region) {
  const int n = sigma.n;
  int m = -1;
  for_each_block(n, [&](const BlockCoord& c) {
    if (!support[flat(n, c)]) return;
    bool near = false;
    for_each_near(n, c, 1, [&](const BlockCoord& e) { near = near || region[flat(n, e)]; });
    if (!near) return;
    const int s = sigma.at(c);
    if (m == -1) {
      m = s;
    } else if (m != s) {
      m = 0;
    }
  });
  if (m < 1 || m > 3) throw ContourError("boundary layer of a contour is not uniformly magnetized");
  return m;
}

}  // namespace

std::vector<Contour> extract_contours(const SpinField& sigma, std::span<const Plate> plates,
                                      const BlockLattice& lattice) {
  return extract_contours(sigma, bad_region(sigma), plates, lattice);
}

std::vector<Contour> extract_contours(const SpinField& sigma, const BadRegion& region, std::span<const Plate> plates,
                                      const BlockLattice& lattice) {
  if (lattice.box().mode != BoundaryMode::open) throw ContourError("contours need an open box");
  const int n = sigma.n;
  int count = 0;
  const auto labels = label_components(region.closure, n, &count);
  std::vector<Contour> out(static_cast<std::size_t>(count));
  for (int id = 1; id <= count; ++id) {
    Contour& c = out[id - 1];
    c.support_mask.assign(labels.size(), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == id) {
        c.support_mask[i] = 1;
        c.support.push_back(i);
        c.spins.push_back(sigma.spins[i]);
      }
    }
    BlockMask rest(labels.size(), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) rest[i] = c.support_mask[i] ? 0 : 1;
    int parts = 0;
    const auto comp = label_components(rest, n, &parts);
    int exterior = 0;
    for (int p = 1; p <= parts; ++p) {
      bool touches = false;
      for (std::size_t i = 0; i < comp.size() && !touches; ++i) {
        touches = comp[i] == p && on_box_surface(n, lattice.coords(i));
      }
      if (!touches) continue;
      if (exterior != 0) throw ContourError("contour separates the box boundary; no unique exterior");
      exterior = p;
    }
    if (exterior == 0) throw ContourError("contour covers the box boundary; no exterior");
    c.exterior.assign(labels.size(), 0);
    for (std::size_t i = 0; i < comp.size(); ++i) c.exterior[i] = comp[i] == exterior;
    c.m_ext = layer_magnetization(sigma, c.support_mask, c.exterior);
    for (int p = 1; p <= parts; ++p) {
      if (p == exterior) continue;
      BlockMask inner(labels.size(), 0);
      for (std::size_t i = 0; i < comp.size(); ++i) inner[i] = comp[i] == p;
      c.m_int.push_back(layer_magnetization(sigma, c.support_mask, inner));
      c.interiors.push_back(std::move(inner));
    }
    for (const Plate& p : plates) {
      if (c.support_mask[lattice.block_index_of(p.center)]) c.plates.push_back(p);
    }
  }
  return out;
}

namespace {

// Smallest rescaled distance between blocks carrying different positive labels, looking at most
// `reach` blocks away; returns reach + 1 when no pair is that close.
int min_label_separation(const std::vector<int>& labels, int n, int reach) {
  int best = reach + 1;
  for_each_block(n, [&](const BlockCoord& c) {
    const int l = labels[flat(n, c)];
    if (l == 0) return;
    bool surface = false;
    for (const auto& f : kFaces) {
      const BlockCoord e = add(c, f);
      surface = surface || !in_range(n, e) || labels[flat(n, e)] != l;
    }
    if (!surface) return;
    for_each_near(n, c, std::min(reach, best - 1), [&](const BlockCoord& e) {
      const int le = labels[flat(n, e)];
      if (le != 0 && le != l) best = std::min(best, BlockLattice::distance(c, e));
    });
  });
  return best;
}

}  // namespace

ContourInvariantReport check_contour_invariants(const SpinField& sigma, const BadRegion& region,
                                                const std::vector<Contour>& contours) {
  ContourInvariantReport rep;
  const int n = sigma.n;
  auto fail = [&](std::string msg) {
    rep.ok = false;
    rep.violations.push_back(std::move(msg));
  };
  for (std::size_t i = 0; i < sigma.spins.size(); ++i) {
    if (region.bad[i] && !region.smoothed[i]) {
      fail("bad block outside the smoothed region");
      break;
    }
  }
  for (std::size_t i = 0; i < sigma.spins.size(); ++i) {
    if (region.smoothed[i] && !region.closure[i]) {
      fail("smoothed block outside the closure");
      break;
    }
  }

  constexpr int kReach = 7;
  int ncomp = 0;
  BlockMask outside(region.closure.size());
  for (std::size_t i = 0; i < outside.size(); ++i) outside[i] = region.closure[i] ? 0 : 1;
  const auto comp_labels = label_components(outside, n, &ncomp);
  if (ncomp >= 2) {
    rep.min_complement_separation = min_label_separation(comp_labels, n, kReach);
    if (rep.min_complement_separation < 2) {
      fail("complement components at rescaled distance " + std::to_string(rep.min_complement_separation) + " < 2");
    }
  }
  int nclos = 0;
  const auto clos_labels = label_components(region.closure, n, &nclos);
  if (nclos >= 2) {
    rep.min_closure_separation = min_label_separation(clos_labels, n, kReach);
    if (rep.min_closure_separation <= 6) {
      fail("bad-region components at rescaled distance " + std::to_string(rep.min_closure_separation) + " <= 6");
    }
  }

  // Each smoothing cube inside the smoothed region meets a bad sampling cube.
  const int m = (n + 2) / 8;
  std::vector<int> smoothed_hits(static_cast<std::size_t>(m) * m * m, 0), bad_hits(smoothed_hits.size(), 0),
      sizes(smoothed_hits.size(), 0);
  for_each_block(n, [&](const BlockCoord& c) {
    const std::size_t a = flat(m, {BlockLattice::smoothing_index(c[0]), BlockLattice::smoothing_index(c[1]),
                                   BlockLattice::smoothing_index(c[2])});
    ++sizes[a];
    smoothed_hits[a] += region.smoothed[flat(n, c)];
    bad_hits[a] += region.bad[flat(n, c)];
  });
  for (std::size_t a = 0; a < sizes.size(); ++a) {
    if (smoothed_hits[a] != 0 && smoothed_hits[a] != sizes[a]) fail("smoothed region is not a union of smoothing cubes");
    if (smoothed_hits[a] == sizes[a] && bad_hits[a] == 0) fail("smoothing cube in the bad region meets no bad cube");
  }

  for (const Contour& c : contours) {
    if (c.m_ext < 1 || c.m_ext > 3) fail("exterior boundary layer not uniformly magnetized");
    for (int mi : c.m_int) {
      if (mi < 1 || mi > 3) fail("interior boundary layer not uniformly magnetized");
    }
  }
  return rep;
}

int contour_link_indicator(const Contour& contour, std::span<const Plate> plates, const BlockLattice& lattice,
                           const ModelParams& params) {
  bool in = false, out = false;
  for (const Plate& p : plates) {
    (contour.support_mask[lattice.block_index_of(p.center)] ? in : out) = true;
  }
  if (in && out) return 1;
  for (const Plate& p : plates) {
    if (!contour.exterior[lattice.block_index_of(p.center)]) continue;
    for (const Plate& q : contour.plates) {
      if (overlap(p, q, params, lattice.box())) return 1;
    }
  }
  return 0;
}

}  // namespace platelat
