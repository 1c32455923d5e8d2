#pragma once

#include "platelat/geometry.hpp"

namespace platelat {

/// Measure of {(x, y) in [a1, b1] x [a2, b2] : |x - y| < t}. Exact (piecewise linear integrand).
double pair_measure_1d(double a1, double b1, double a2, double b2, double t);

/// Measure of center pairs (x in r1, y in r2) for which (x, o1) and (y, o2) overlap in free space.
double pair_overlap_measure(const Region& r1, const Region& r2, Orientation o1, Orientation o2,
                            const ModelParams& params);

/// sum_{n >= from} x^n / n!  for x >= 0.
double exp_tail(double x, int from);

}  // namespace platelat
