#include "platelat/integrals.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace platelat {

double pair_measure_1d(double a1, double b1, double a2, double b2, double t) {
  if (!(b1 > a1) || !(b2 > a2) || !(t > 0.0)) return 0.0;
  // h(x) = |(x - t, x + t) n [a2, b2]| is linear between these breakpoints.
  const auto h = [&](double x) { return std::max(0.0, std::min(x + t, b2) - std::max(x - t, a2)); };
  std::array<double, 6> pts{a1, b1, a2 - t, a2 + t, b2 - t, b2 + t};
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double lo = std::clamp(pts[i], a1, b1);
    const double hi = std::clamp(pts[i + 1], a1, b1);
    if (hi > lo) total += 0.5 * (hi - lo) * (h(lo) + h(hi));
  }
  return total;
}

double pair_overlap_measure(const Region& r1, const Region& r2, Orientation o1, Orientation o2,
                            const ModelParams& params) {
  const Vec3 t = overlap_thresholds(o1, o2, params);
  double m = 1.0;
  for (int i = 0; i < 3; ++i) m *= pair_measure_1d(r1.lo[i], r1.hi[i], r2.lo[i], r2.hi[i], t[i]);
  return m;
}

double exp_tail(double x, int from) {
  if (x <= 0.0) return from == 0 ? 1.0 : 0.0;
  double term = 1.0;
  for (int n = 1; n <= from; ++n) term *= x / n;
  double sum = 0.0;
  for (int n = from; n < from + 10000; ++n) {
    if (n > from) term *= x / n;
    sum += term;
    if (n > x && term < 1e-18 * sum) break;
  }
  return sum;
}

}  // namespace platelat
