#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <functional>
#include <span>

#include "platelat/gcmc.hpp"
#include "platelat/integrals.hpp"
#include "platelat/stats.hpp"

namespace platelat {

namespace {

// Which types are present, as a bit mask over types 1..3 (bit t-1).
template <class Range>
unsigned type_mask(const Range& plates) {
  unsigned m = 0;
  for (const Plate& p : plates) m |= 1u << (p.orientation.type() - 1);
  return m;
}

// (numerator indicator, averaged denominator indicator) for one configuration.
using EventFn = std::function<std::array<double, 2>(std::span<const Plate>)>;

// Probability of a configuration being all of type q (empty included), averaged over q.
double single_type_average(unsigned mask) {
  if (mask == 0) return 1.0;
  return std::popcount(mask) == 1 ? 1.0 / 3.0 : 0.0;
}

RatioEstimate sampler_ratio(const ModelParams& params, double z, double box_side, const Region& region,
                            std::int64_t samples, std::uint64_t seed, const EventFn& events) {
  RunParams run;
  run.z = z;
  run.seed = seed;
  run.burn_in_fraction = 0.2;
  run.sweeps = static_cast<std::int64_t>(std::ceil(static_cast<double>(samples) / 0.8)) + 1;
  run.center_region = region;
  Sampler sampler(params, SimBox{box_side, BoundaryMode::open}, run);
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(samples));
  sampler.run([&](const PlateSet& state, const Sample&) {
    if (static_cast<std::int64_t>(rows.size()) >= samples) return;
    const auto plates = state.plates();
    const auto ev = events(plates);
    rows.push_back({ev[0], ev[1]});
  });
  RatioEstimate out;
  out.mode = RatioMode::sampler;
  out.samples = rows.size();
  if (rows.size() < 40) throw InsufficientSamples("ratio estimate needs at least 40 samples");
  const auto est = stats::JackknifeSet(rows, 40).estimate([](const std::vector<double>& v) { return v[0] / v[1]; });
  out.value = est.mean;
  out.error = est.error;
  return out;
}

struct LowOrder {
  double num2 = 0.0;  // exact n = 2 contribution to the numerator
  double den2 = 0.0;  // exact n <= 2 contribution to the denominator
};

// Adds the n = 3 term by Monte Carlo over centers with all 216 orientation triples per draw,
// and bounds the n >= 4 tails by the ideal-gas series.
RatioEstimate quadrature_ratio(const ModelParams& params, double z, const Region& region, const LowOrder& low,
                               std::int64_t samples, std::uint64_t seed, const EventFn& events) {
  if (samples < 40) throw InsufficientSamples("quadrature needs at least 40 samples");
  const double V = region.volume();
  Philox rng(seed, 0x9e3779b9ULL);
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(samples));
  std::array<Plate, 3> ps;
  for (std::int64_t s = 0; s < samples; ++s) {
    std::array<Vec3, 3> c;
    for (auto& x : c) {
      for (int i = 0; i < 3; ++i) x[i] = rng.uniform(region.lo[i], region.hi[i]);
    }
    double num = 0.0, den = 0.0;
    for (int a = 0; a < kNumOrientations; ++a) {
      for (int b = 0; b < kNumOrientations; ++b) {
        for (int d = 0; d < kNumOrientations; ++d) {
          ps[0] = Plate{c[0], Orientation::from_index(a)};
          ps[1] = Plate{c[1], Orientation::from_index(b)};
          ps[2] = Plate{c[2], Orientation::from_index(d)};
          if (overlap_free_space(ps[0], ps[1], params) || overlap_free_space(ps[0], ps[2], params) ||
              overlap_free_space(ps[1], ps[2], params)) {
            continue;
          }
          const auto ev = events(ps);
          num += ev[0];
          den += ev[1];
        }
      }
    }
    rows.push_back({num, den});
  }
  const double c3 = z * z * z / 6.0 * V * V * V;
  const stats::JackknifeSet jk(rows, 40);
  const auto est = jk.estimate([&](const std::vector<double>& v) { return (low.num2 + c3 * v[0]) / (low.den2 + c3 * v[1]); });
  const auto num3 = jk.estimate([&](const std::vector<double>& v) { return low.num2 + c3 * v[0]; });
  const auto den3 = jk.estimate([&](const std::vector<double>& v) { return low.den2 + c3 * v[1]; });

  const double tail_num = exp_tail(kNumOrientations * z * V, 4);
  const double tail_den = exp_tail(2.0 * z * V, 4);
  const double lo = num3.mean / (den3.mean + tail_den);
  const double hi = (num3.mean + tail_num) / den3.mean;
  RatioEstimate out;
  out.mode = RatioMode::quadrature;
  out.samples = rows.size();
  out.value = est.mean;
  out.error = est.error;
  out.remainder = std::max(est.mean - lo, hi - est.mean);
  if (!(out.remainder <= 0.05 * std::abs(out.value))) {
    throw IncompatibleMode("quadrature truncation remainder " + std::to_string(out.remainder) +
                           " exceeds 5% of the estimate; use the sampler mode");
  }
  return out;
}

double same_type_pair_integral(const Region& r, int type, const ModelParams& params) {
  const double V = r.volume();
  double s = 0.0;
  for (int a = 2 * (type - 1); a < 2 * type; ++a) {
    for (int b = 2 * (type - 1); b < 2 * type; ++b) {
      s += V * V - pair_overlap_measure(r, r, Orientation::from_index(a), Orientation::from_index(b), params);
    }
  }
  return s;
}

double denominator_low_order(const Region& r, double z, const ModelParams& params) {
  double pair = 0.0;
  for (int q = 1; q <= kNumTypes; ++q) pair += same_type_pair_integral(r, q, params);
  return 1.0 + 2.0 * z * r.volume() + 0.5 * z * z * pair / kNumTypes;
}

void check_ratio_inputs(double z, double block_side, std::int64_t samples) {
  if (!(z > 0.0) || !std::isfinite(z)) throw std::invalid_argument("ratio: z must be positive");
  if (!(block_side > 0.0)) throw std::invalid_argument("ratio: block side must be positive");
  if (samples < 1) throw std::invalid_argument("ratio: samples must be positive");
}

}  // namespace

RatioEstimate estimate_block_ratio(const ModelParams& params, double z, double block_side, std::int64_t samples,
                                   RatioMode mode, std::uint64_t seed) {
  check_ratio_inputs(z, block_side, samples);
  const Region cube = Region::cube(block_side);
  const EventFn events = [](std::span<const Plate> plates) -> std::array<double, 2> {
    const unsigned m = type_mask(plates);
    return {std::popcount(m) >= 2 ? 1.0 : 0.0, single_type_average(m)};
  };
  if (mode == RatioMode::sampler) return sampler_ratio(params, z, block_side, cube, samples, seed, events);

  LowOrder low;
  const double V = cube.volume();
  for (int a = 0; a < kNumOrientations; ++a) {
    for (int b = 0; b < kNumOrientations; ++b) {
      const auto oa = Orientation::from_index(a);
      const auto ob = Orientation::from_index(b);
      if (oa.type() == ob.type()) continue;
      low.num2 += 0.5 * z * z * (V * V - pair_overlap_measure(cube, cube, oa, ob, params));
    }
  }
  low.den2 = denominator_low_order(cube, z, params);
  return quadrature_ratio(params, z, cube, low, samples, seed, events);
}

RatioEstimate estimate_dipole_ratio(const ModelParams& params, double z, double block_side, std::int64_t samples,
                                    RatioMode mode, std::uint64_t seed) {
  check_ratio_inputs(z, block_side, samples);
  const double s = block_side;
  const Region both{{0.0, 0.0, 0.0}, {2.0 * s, s, s}};
  const Region d1{{0.0, 0.0, 0.0}, {s, s, s}};
  const Region d2{{s, 0.0, 0.0}, {2.0 * s, s, s}};
  const EventFn events = [s](std::span<const Plate> plates) -> std::array<double, 2> {
    unsigned m1 = 0, m2 = 0;
    for (const Plate& p : plates) (p.center[0] < s ? m1 : m2) |= 1u << (p.orientation.type() - 1);
    const bool dipole = std::popcount(m1) == 1 && std::popcount(m2) == 1 && m1 != m2;
    return {dipole ? 1.0 : 0.0, single_type_average(m1 | m2)};
  };
  if (mode == RatioMode::sampler) return sampler_ratio(params, z, 2.0 * s, both, samples, seed, events);

  LowOrder low;
  for (int a = 0; a < kNumOrientations; ++a) {
    for (int b = 0; b < kNumOrientations; ++b) {
      const auto oa = Orientation::from_index(a);
      const auto ob = Orientation::from_index(b);
      if (oa.type() == ob.type()) continue;
      // one plate in each block; the labelled pair can sit either way round, cancelling the 1/2!
      low.num2 += z * z * (d1.volume() * d2.volume() - pair_overlap_measure(d1, d2, oa, ob, params));
    }
  }
  low.den2 = denominator_low_order(both, z, params);
  return quadrature_ratio(params, z, both, low, samples, seed, events);
}

}  // namespace platelat
