#include "platelat/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace platelat {

ModelParams::ModelParams(double k, double alpha) : k_(k), alpha_(alpha) {
  if (!(k > 1.0) || !std::isfinite(k)) {
    throw std::invalid_argument("model: k must be a finite number > 1");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("model: alpha must lie in (0, 1]");
  }
  intermediate_ = std::pow(k, alpha);
}

std::optional<int> ModelParams::pebbles_per_block_edge() const {
  const double n = std::pow(k_, 1.0 - alpha_);
  const double r = std::round(n);
  if (std::abs(n - r) > 1e-9 * std::max(1.0, n)) return std::nullopt;
  return static_cast<int>(r);
}

std::string to_token(Orientation o) {
  std::string s;
  s += static_cast<char>('1' + o.type_axis);
  s += o.variant_b ? 'b' : 'a';
  return s;
}

Orientation parse_orientation(std::string_view token) {
  if (token.size() == 2 && token[0] >= '1' && token[0] <= '3' && (token[1] == 'a' || token[1] == 'b')) {
    return Orientation{token[0] - '1', token[1] == 'b'};
  }
  throw std::invalid_argument("unknown orientation token '" + std::string(token) + "'");
}

bool SimBox::contains(const Vec3& x) const {
  for (double c : x) {
    if (!(c >= 0.0 && c < L)) return false;
  }
  return true;
}

Vec3 SimBox::displacement(const Vec3& a, const Vec3& b) const {
  Vec3 d{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  if (mode == BoundaryMode::periodic) {
    for (double& c : d) c -= L * std::nearbyint(c / L);
  }
  return d;
}

Vec3 SimBox::wrap(Vec3 x) const {
  if (mode == BoundaryMode::periodic) {
    for (double& c : x) {
      c -= L * std::floor(c / L);
      if (c >= L) c = 0.0;  // rounding of tiny negatives
    }
  }
  return x;
}

std::string to_string(BoundaryMode mode) { return mode == BoundaryMode::open ? "open" : "periodic"; }

BoundaryMode parse_boundary_mode(std::string_view s) {
  if (s == "open") return BoundaryMode::open;
  if (s == "periodic") return BoundaryMode::periodic;
  throw std::invalid_argument("unknown box mode '" + std::string(s) + "'");
}

Vec3 axis_extents(Orientation o, const ModelParams& params) {
  Vec3 e{};
  const int t = o.type_axis;
  const int next = (t + 1) % 3;
  const int last = (t + 2) % 3;
  e[t] = 1.0;
  e[o.variant_b ? last : next] = params.k();
  e[o.variant_b ? next : last] = params.intermediate();
  return e;
}

Vec3 overlap_thresholds(Orientation o, Orientation o2, const ModelParams& params) {
  const Vec3 a = axis_extents(o, params);
  const Vec3 b = axis_extents(o2, params);
  return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
}

namespace {
bool within(const Vec3& d, const Vec3& t) {
  return std::abs(d[0]) < t[0] && std::abs(d[1]) < t[1] && std::abs(d[2]) < t[2];
}
}  // namespace

bool overlap(const Plate& p, const Plate& q, const ModelParams& params, const SimBox& box) {
  return within(box.displacement(p.center, q.center), overlap_thresholds(p.orientation, q.orientation, params));
}

bool overlap_free_space(const Plate& p, const Plate& q, const ModelParams& params) {
  const Vec3 d{q.center[0] - p.center[0], q.center[1] - p.center[1], q.center[2] - p.center[2]};
  return within(d, overlap_thresholds(p.orientation, q.orientation, params));
}

double excluded_volume(Orientation o, Orientation o2, const ModelParams& params) {
  const Vec3 t = overlap_thresholds(o, o2, params);
  return 8.0 * t[0] * t[1] * t[2];
}

}  // namespace platelat
