#include "platelat/configuration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace platelat {

PlateSet::PlateSet(ModelParams params, SimBox box) : PlateSet(params, box, Options{}) {}

PlateSet::PlateSet(ModelParams params, SimBox box, Options options)
    : params_(params), box_(box), options_(options) {
  if (!(box_.L > 0.0) || !std::isfinite(box_.L)) throw PlateSetError("box side must be positive");
  if (options_.strict_containment && box_.mode == BoundaryMode::periodic) {
    throw PlateSetError("strict containment needs an open box");
  }
  // Cell side max(k, L / floor(L / k)) tiles the box exactly.
  ncell_ = std::max(1, static_cast<int>(std::floor(box_.L / params_.k())));
  cell_side_ = box_.L / ncell_;
  cells_.resize(static_cast<std::size_t>(ncell_) * ncell_ * ncell_);
}

void PlateSet::check_center(const Vec3& x) const {
  if (!box_.contains(x)) {
    throw PlateSetError("plate center (" + std::to_string(x[0]) + ", " + std::to_string(x[1]) + ", " +
                        std::to_string(x[2]) + ") outside the box");
  }
}

std::array<int, 3> PlateSet::cell_coords(const Vec3& x) const {
  std::array<int, 3> c{};
  for (int i = 0; i < 3; ++i) {
    c[i] = std::clamp(static_cast<int>(x[i] / cell_side_), 0, ncell_ - 1);
  }
  return c;
}

std::size_t PlateSet::cell_of(const Vec3& x) const {
  const auto c = cell_coords(x);
  return (static_cast<std::size_t>(c[0]) * ncell_ + c[1]) * ncell_ + c[2];
}

template <class Fn>
bool PlateSet::any_neighbour(const Vec3& x, Fn&& fn) const {
  const auto c = cell_coords(x);
  const bool periodic = box_.mode == BoundaryMode::periodic;
  // With fewer than three cells per axis the stencil would revisit cells.
  std::array<int, 3> lo{}, hi{};
  for (int i = 0; i < 3; ++i) {
    if (ncell_ < 3) {
      lo[i] = 0;
      hi[i] = ncell_ - 1;
    } else if (periodic) {
      lo[i] = c[i] - 1;
      hi[i] = c[i] + 1;
    } else {
      lo[i] = std::max(0, c[i] - 1);
      hi[i] = std::min(ncell_ - 1, c[i] + 1);
    }
  }
  for (int a = lo[0]; a <= hi[0]; ++a) {
    const int ia = (a + ncell_) % ncell_;
    for (int b = lo[1]; b <= hi[1]; ++b) {
      const int ib = (b + ncell_) % ncell_;
      for (int d = lo[2]; d <= hi[2]; ++d) {
        const int id = (d + ncell_) % ncell_;
        const auto& cell = cells_[(static_cast<std::size_t>(ia) * ncell_ + ib) * ncell_ + id];
        for (PlateId other : cell) {
          if (fn(other)) return true;
        }
      }
    }
  }
  return false;
}

bool PlateSet::overlaps_any(const Plate& p, std::optional<PlateId> ignore) const {
  if (!options_.hard_core) return false;
  return any_neighbour(p.center, [&](PlateId other) {
    return (!ignore || other != *ignore) && overlap(p, slots_[other].plate, params_, box_);
  });
}

bool PlateSet::overlaps_any_bruteforce(const Plate& p, std::optional<PlateId> ignore) const {
  if (!options_.hard_core) return false;
  for (PlateId id : dense_) {
    if (ignore && id == *ignore) continue;
    if (overlap(p, slots_[id].plate, params_, box_)) return true;
  }
  return false;
}

bool PlateSet::support_inside(const Plate& p) const {
  const Vec3 e = axis_extents(p.orientation, params_);
  for (int i = 0; i < 3; ++i) {
    if (p.center[i] - 0.5 * e[i] < 0.0 || p.center[i] + 0.5 * e[i] > box_.L) return false;
  }
  return true;
}

void PlateSet::link(PlateId id) {
  Slot& s = slots_[id];
  s.alive = true;
  s.dense_pos = dense_.size();
  dense_.push_back(id);
  s.cell = cell_of(s.plate.center);
  s.cell_pos = cells_[s.cell].size();
  cells_[s.cell].push_back(id);
  ++count_;
}

void PlateSet::unlink(PlateId id) {
  Slot& s = slots_[id];
  // swap-remove from the dense list
  const PlateId moved = dense_.back();
  dense_[s.dense_pos] = moved;
  slots_[moved].dense_pos = s.dense_pos;
  dense_.pop_back();
  // swap-remove from the cell
  auto& cell = cells_[s.cell];
  const PlateId cmoved = cell.back();
  cell[s.cell_pos] = cmoved;
  slots_[cmoved].cell_pos = s.cell_pos;
  cell.pop_back();
  s.alive = false;
  --count_;
}

std::optional<PlateId> PlateSet::insert_if_free(const Plate& p) {
  check_center(p.center);
  if (options_.strict_containment && !support_inside(p)) return std::nullopt;
  if (overlaps_any(p)) return std::nullopt;
  PlateId id;
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
  } else {
    id = static_cast<PlateId>(slots_.size());
    slots_.emplace_back();
  }
  slots_[id].plate = p;
  link(id);
  return id;
}

Plate PlateSet::remove(PlateId id) {
  if (!contains(id)) throw PlateSetError("remove: no live plate with id " + std::to_string(id));
  Plate p = slots_[id].plate;
  unlink(id);
  free_.push_back(id);
  return p;
}

bool PlateSet::replace_if_free(PlateId id, const Plate& p) {
  if (!contains(id)) throw PlateSetError("replace: no live plate with id " + std::to_string(id));
  check_center(p.center);
  if (options_.strict_containment && !support_inside(p)) return false;
  if (overlaps_any(p, id)) return false;
  const std::size_t new_cell = cell_of(p.center);
  Slot& s = slots_[id];
  if (new_cell == s.cell) {
    s.plate = p;
    return true;
  }
  auto& cell = cells_[s.cell];
  const PlateId cmoved = cell.back();
  cell[s.cell_pos] = cmoved;
  slots_[cmoved].cell_pos = s.cell_pos;
  cell.pop_back();
  s.plate = p;
  s.cell = new_cell;
  s.cell_pos = cells_[new_cell].size();
  cells_[new_cell].push_back(id);
  return true;
}

const Plate& PlateSet::at(PlateId id) const {
  if (!contains(id)) throw PlateSetError("no live plate with id " + std::to_string(id));
  return slots_[id].plate;
}

std::vector<Plate> PlateSet::plates() const {
  std::vector<Plate> out;
  out.reserve(dense_.size());
  for (PlateId id : dense_) out.push_back(slots_[id].plate);
  return out;
}

std::array<std::size_t, kNumOrientations> PlateSet::count_by_orientation() const {
  std::array<std::size_t, kNumOrientations> counts{};
  for (PlateId id : dense_) ++counts[slots_[id].plate.orientation.index()];
  return counts;
}

bool PlateSet::index_consistent() const {
  std::vector<std::vector<PlateId>> rebuilt(cells_.size());
  for (PlateId id : dense_) rebuilt[cell_of(slots_[id].plate.center)].push_back(id);
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    auto a = cells_[c];
    auto b = rebuilt[c];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) return false;
    for (std::size_t i = 0; i < cells_[c].size(); ++i) {
      const Slot& s = slots_[cells_[c][i]];
      if (!s.alive || s.cell != c || s.cell_pos != i) return false;
    }
  }
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    if (slots_[dense_[i]].dense_pos != i) return false;
  }
  return dense_.size() == count_;
}

bool PlateSet::hard_core_satisfied() const {
  if (!options_.hard_core) return true;
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    for (std::size_t j = i + 1; j < dense_.size(); ++j) {
      if (overlap(slots_[dense_[i]].plate, slots_[dense_[j]].plate, params_, box_)) return false;
    }
  }
  return true;
}

}  // namespace platelat
