#include "platelat/gcmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "platelat/coarsegrain.hpp"
#include "platelat/stats.hpp"

namespace platelat {

void RunParams::validate() const {
  if (!(z >= 0.0) || !std::isfinite(z)) throw std::invalid_argument("run: z must be finite and >= 0");
  if (sweeps < 0) throw std::invalid_argument("run: sweeps must be >= 0");
  const auto& w = move_weights;
  if (w.insert < 0 || w.remove < 0 || w.translate < 0 || w.reorient < 0) {
    throw std::invalid_argument("run: move weights must be nonnegative");
  }
  if (std::abs(w.insert + w.remove + w.translate + w.reorient - 1.0) > 1e-9) {
    throw std::invalid_argument("run: move weights must sum to 1");
  }
  if (std::abs(w.insert - w.remove) > 1e-12) {
    throw std::invalid_argument("run: insert and delete weights must be equal");
  }
  if (boundary_q < 0 || boundary_q > 3) throw std::invalid_argument("run: boundary_q must be 0 (none) or 1..3");
  if (boundary_depth < 0) throw std::invalid_argument("run: boundary_depth must be >= 0");
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
    throw std::invalid_argument("run: burn_in_fraction must lie in [0, 1)");
  }
  if (sample_stride < 1) throw std::invalid_argument("run: sample_stride must be >= 1");
  if (snapshot_stride < 0) throw std::invalid_argument("run: snapshot_stride must be >= 0");
  if (translate_step && !(*translate_step > 0.0)) throw std::invalid_argument("run: translate_step must be > 0");
}

std::size_t Sample::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

double order_parameter(const std::array<std::size_t, kNumOrientations>& counts) {
  const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (n == 0) throw std::domain_error("order parameter undefined for an empty configuration");
  std::size_t best = 0;
  for (int t = 0; t < kNumTypes; ++t) best = std::max(best, counts[2 * t] + counts[2 * t + 1]);
  return (3.0 * static_cast<double>(best) / static_cast<double>(n) - 1.0) / 2.0;
}

// ---- accumulator ----------------------------------------------------------------------------

void ObservableAccumulator::merge(const ObservableAccumulator& other) {
  for (const auto& [id, series] : other.chains_) {
    if (chains_.count(id)) throw std::invalid_argument("merge: duplicate chain id " + std::to_string(id));
  }
  for (const auto& [id, series] : other.chains_) chains_[id] = series;
}

bool ObservableAccumulator::empty() const { return sample_count() == 0; }

std::size_t ObservableAccumulator::sample_count() const {
  std::size_t n = 0;
  for (const auto& [id, s] : chains_) n += s.size();
  return n;
}

ObservableAccumulator::Estimate ObservableAccumulator::estimate(const std::function<double(const Sample&)>& f) const {
  Estimate e;
  double weighted = 0.0;
  double var = 0.0;
  for (const auto& [id, series] : chains_) {
    std::vector<double> xs;
    xs.reserve(series.size());
    for (const Sample& s : series) {
      const double v = f(s);
      if (!std::isnan(v)) xs.push_back(v);
    }
    if (xs.empty()) continue;
    const auto b = stats::blocking(xs);
    const auto n = static_cast<double>(xs.size());
    weighted += n * b.mean;
    var += n * n * b.error * b.error;
    e.samples += xs.size();
    e.converged = e.converged && b.converged;
  }
  if (e.samples == 0) {
    e.mean = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  const auto n = static_cast<double>(e.samples);
  e.mean = weighted / n;
  e.error = std::sqrt(var) / n;
  return e;
}

ObservableAccumulator::Estimate ObservableAccumulator::density(int o, double volume) const {
  return estimate([=](const Sample& s) { return static_cast<double>(s.counts[o]) / volume; });
}

ObservableAccumulator::Estimate ObservableAccumulator::total_density(double volume) const {
  return estimate([=](const Sample& s) { return static_cast<double>(s.total()) / volume; });
}

ObservableAccumulator::Estimate ObservableAccumulator::order_parameter() const {
  return estimate([](const Sample& s) { return s.order_parameter; });
}

namespace {
void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}
}  // namespace

void write_observables_header(std::ostream& out) {
  out << "sweep,N,N_1a,N_1b,N_2a,N_2b,N_3a,N_3b,S,acc_insert,acc_delete,acc_translate,acc_reorient\n";
}

void write_observable_row(std::ostream& out, const Sample& s) {
  out << s.sweep << ',' << s.total();
  for (auto c : s.counts) out << ',' << c;
  out << ',';
  if (std::isnan(s.order_parameter)) {
    out << "nan";
  } else {
    put(out, s.order_parameter);
  }
  for (double a : s.acceptance) {
    out << ',';
    put(out, a);
  }
  out << '\n';
}

// ---- sampler --------------------------------------------------------------------------------

std::int64_t steps_per_sweep(const RunParams& run, const ModelParams& params, const SimBox& box) {
  const double vol = run.center_region ? run.center_region->volume() : box.volume();
  double target = 6.0 * run.z * vol;
  if (run.hard_core) target = std::min(target, vol / params.plate_volume());
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(target)));
}

Sampler::Sampler(ModelParams params, SimBox box, RunParams run)
    : params_(params),
      box_(box),
      run_(run),
      state_(params, box, PlateSet::Options{run.strict_containment, run.hard_core}),
      rng_(run.seed, run.stream) {
  run_.validate();
  region_ = run_.center_region.value_or(Region::cube(box_.L));
  for (int i = 0; i < 3; ++i) {
    if (region_.lo[i] < 0.0 || region_.hi[i] > box_.L || !(region_.hi[i] > region_.lo[i])) {
      throw std::invalid_argument("run: center region must be a nonempty sub-box of the box");
    }
  }
  region_volume_ = region_.volume();
  step_ = run_.translate_step.value_or(params_.intermediate());
  const auto& w = run_.move_weights;
  cumulative_weights_ = {w.insert, w.insert + w.remove, w.insert + w.remove + w.translate, 1.0};
  if (run_.boundary_q != 0 || run_.spin_census) {
    const BlockLattice lattice(params_, box_);
    blocks_per_axis_ = lattice.n();
    block_side_ = lattice.side();
  }
}

bool Sampler::in_region(const Vec3& x) const { return region_.contains(x); }

bool Sampler::boundary_compatible(const Plate& p) const {
  if (run_.boundary_q == 0 || p.orientation.type() == run_.boundary_q) return true;
  int dist = std::numeric_limits<int>::max();
  for (int i = 0; i < 3; ++i) {
    const int b = std::clamp(static_cast<int>(std::floor(p.center[i] / block_side_)), 0, blocks_per_axis_ - 1);
    dist = std::min({dist, b + 1, blocks_per_axis_ - b});
  }
  return dist > run_.boundary_depth;
}

double Sampler::insert_acceptance(std::size_t n_before) const {
  return std::min(1.0, kNumOrientations * run_.z * region_volume_ / static_cast<double>(n_before + 1));
}

double Sampler::delete_acceptance(std::size_t n_before) const {
  const double denom = kNumOrientations * run_.z * region_volume_;
  if (denom <= 0.0) return 1.0;
  return std::min(1.0, static_cast<double>(n_before) / denom);
}

Plate Sampler::random_plate() {
  Plate p;
  for (int i = 0; i < 3; ++i) p.center[i] = rng_.uniform(region_.lo[i], region_.hi[i]);
  p.orientation = Orientation::from_index(static_cast<int>(rng_.below(kNumOrientations)));
  return p;
}

bool Sampler::step() {
  const double u = rng_.uniform();
  MoveKind kind = MoveKind::reorient;
  for (int m = 0; m < 4; ++m) {
    if (u < cumulative_weights_[m]) {
      kind = static_cast<MoveKind>(m);
      break;
    }
  }
  const auto k = static_cast<std::size_t>(kind);
  ++counters_.attempted[k];
  const std::size_t n = state_.size();
  bool accepted = false;
  switch (kind) {
    case MoveKind::insert: {
      const Plate p = random_plate();
      const double acc = insert_acceptance(n);
      if (boundary_compatible(p) && rng_.uniform() < acc) accepted = state_.try_insert(p);
      break;
    }
    case MoveKind::remove: {
      if (n == 0) break;
      const PlateId id = state_.id_at_rank(rng_.below(n));
      if (rng_.uniform() < delete_acceptance(n)) {
        state_.remove(id);
        accepted = true;
      }
      break;
    }
    case MoveKind::translate: {
      if (n == 0) break;
      const PlateId id = state_.id_at_rank(rng_.below(n));
      Plate p = state_.at(id);
      for (int i = 0; i < 3; ++i) p.center[i] += step_ * (rng_.uniform() - 0.5);
      p.center = box_.wrap(p.center);
      if (!in_region(p.center) || !boundary_compatible(p)) break;
      accepted = state_.replace_if_free(id, p);
      break;
    }
    case MoveKind::reorient: {
      if (n == 0) break;
      const PlateId id = state_.id_at_rank(rng_.below(n));
      Plate p = state_.at(id);
      const int shift = 1 + static_cast<int>(rng_.below(kNumOrientations - 1));
      p.orientation = Orientation::from_index((p.orientation.index() + shift) % kNumOrientations);
      if (!boundary_compatible(p)) break;
      accepted = state_.replace_if_free(id, p);
      break;
    }
  }
  if (accepted) ++counters_.accepted[k];
  return accepted;
}

bool step(Sampler& sampler) { return sampler.step(); }

void Sampler::sweep() {
  const std::int64_t steps = steps_per_sweep(run_, params_, box_);
  for (std::int64_t i = 0; i < steps; ++i) step();
}

Snapshot make_snapshot(const Sampler& sampler, std::int64_t sweep) {
  Snapshot s;
  s.k = sampler.state().params().k();
  s.alpha = sampler.state().params().alpha();
  s.L = sampler.state().box().L;
  s.mode = sampler.state().box().mode;
  s.seed = sampler.run_params().seed;
  s.sweep = sweep;
  s.boundary_q = sampler.run_params().boundary_q;
  s.boundary_depth = sampler.run_params().boundary_depth;
  s.plates = sampler.state().plates();
  return s;
}

Sampler::RunOutput Sampler::run(const std::function<void(const PlateSet&, const Sample&)>& on_sample) {
  RunOutput out;
  const auto burn = static_cast<std::int64_t>(std::floor(run_.burn_in_fraction * static_cast<double>(run_.sweeps)));
  std::optional<BlockLattice> lattice;
  if (run_.spin_census) lattice.emplace(params_, box_);
  for (std::int64_t s = 0; s < run_.sweeps; ++s) {
    sweep();
    if (s < burn) continue;
    const std::int64_t since = s - burn;
    if (since % run_.sample_stride == 0) {
      Sample smp;
      smp.sweep = s;
      smp.counts = state_.count_by_orientation();
      smp.order_parameter =
          smp.total() ? order_parameter(smp.counts) : std::numeric_limits<double>::quiet_NaN();
      for (int m = 0; m < 4; ++m) smp.acceptance[m] = counters_.rate(static_cast<MoveKind>(m));
      if (lattice) {
        const SpinBoundary bc{run_.boundary_q, run_.boundary_depth};
        smp.spin_census = assign_spins(state_, *lattice, bc).census();
      }
      out.observables.add(run_.stream, smp);
      if (on_sample) on_sample(state_, smp);
    }
    if (run_.snapshot_stride > 0 && since % run_.snapshot_stride == 0) {
      out.snapshots.push_back(make_snapshot(*this, s));
    }
  }
  return out;
}

// ---- pair correlation -----------------------------------------------------------------------

double pair_shell_measure(const SimBox& box, double lo, double hi) {
  const double L = box.L;
  auto inner = [&](double t) {
    // measure of pairs with d_inf < t
    if (t <= 0.0) return 0.0;
    if (box.mode == BoundaryMode::periodic) {
      const double w = std::min(2.0 * t, L);
      return box.volume() * w * w * w;
    }
    const double g = t >= L ? L * L : 2.0 * t * L - t * t;
    return g * g * g;
  };
  return inner(hi) - inner(lo);
}

namespace {

std::array<int, kNumOrientations * kNumOrientations> pair_slot_table() {
  std::array<int, kNumOrientations * kNumOrientations> t{};
  t.fill(-1);
  int slot = 0;
  for (int a = 0; a < kNumOrientations; ++a) {
    for (int b = a; b < kNumOrientations; ++b) t[a * kNumOrientations + b] = slot++;
  }
  return t;
}

constexpr int kPairSlots = kNumOrientations * (kNumOrientations + 1) / 2;

}  // namespace

PairCorrelation pair_correlation(const std::vector<Snapshot>& snapshots, int bins, double r_max,
                                 std::size_t jackknife_blocks) {
  if (snapshots.size() < 2) throw InsufficientSamples("pair correlation needs at least two snapshots");
  if (bins < 1 || !(r_max > 0.0)) throw std::invalid_argument("pair correlation: bins >= 1 and r_max > 0 required");
  const Snapshot& first = snapshots.front();
  for (const auto& s : snapshots) {
    if (s.L != first.L || s.mode != first.mode || s.k != first.k || s.alpha != first.alpha) {
      throw std::invalid_argument("pair correlation: snapshots must share model and box");
    }
  }
  const SimBox box = first.box();
  if (box.mode == BoundaryMode::periodic && r_max > 0.5 * box.L) {
    throw std::invalid_argument("pair correlation: r_max must not exceed L/2 in a periodic box");
  }
  if (r_max > box.L) throw std::invalid_argument("pair correlation: r_max exceeds the box");

  const auto slots = pair_slot_table();
  const std::size_t dim = kNumOrientations + static_cast<std::size_t>(kPairSlots) * bins;
  const int ncell = std::max(1, static_cast<int>(std::floor(box.L / r_max)));
  const double cell = box.L / ncell;
  const bool periodic = box.mode == BoundaryMode::periodic;

  std::vector<std::vector<double>> samples;
  samples.reserve(snapshots.size());
  std::vector<std::vector<std::size_t>> grid(static_cast<std::size_t>(ncell) * ncell * ncell);
  for (const auto& snap : snapshots) {
    std::vector<double> row(dim, 0.0);
    for (auto& g : grid) g.clear();
    std::vector<std::array<int, 3>> where(snap.plates.size());
    for (std::size_t i = 0; i < snap.plates.size(); ++i) {
      const Plate& p = snap.plates[i];
      row[p.orientation.index()] += 1.0;
      for (int a = 0; a < 3; ++a) where[i][a] = std::clamp(static_cast<int>(p.center[a] / cell), 0, ncell - 1);
      grid[(static_cast<std::size_t>(where[i][0]) * ncell + where[i][1]) * ncell + where[i][2]].push_back(i);
    }
    for (std::size_t i = 0; i < snap.plates.size(); ++i) {
      const Plate& p = snap.plates[i];
      std::array<int, 3> lo{}, hi{};
      for (int a = 0; a < 3; ++a) {
        if (ncell < 3) {
          lo[a] = 0;
          hi[a] = ncell - 1;
        } else if (periodic) {
          lo[a] = where[i][a] - 1;
          hi[a] = where[i][a] + 1;
        } else {
          lo[a] = std::max(0, where[i][a] - 1);
          hi[a] = std::min(ncell - 1, where[i][a] + 1);
        }
      }
      for (int x = lo[0]; x <= hi[0]; ++x) {
        for (int y = lo[1]; y <= hi[1]; ++y) {
          for (int w = lo[2]; w <= hi[2]; ++w) {
            const auto& g = grid[(static_cast<std::size_t>((x + ncell) % ncell) * ncell + (y + ncell) % ncell) * ncell +
                                 (w + ncell) % ncell];
            for (std::size_t j : g) {
              if (j <= i) continue;
              const Plate& q = snap.plates[j];
              const Vec3 d = box.displacement(p.center, q.center);
              const double dist = std::max({std::abs(d[0]), std::abs(d[1]), std::abs(d[2])});
              if (dist >= r_max) continue;
              const int b = std::min(bins - 1, static_cast<int>(dist / r_max * bins));
              const int a1 = p.orientation.index();
              const int a2 = q.orientation.index();
              const int slot = slots[std::min(a1, a2) * kNumOrientations + std::max(a1, a2)];
              row[kNumOrientations + static_cast<std::size_t>(slot) * bins + b] += 1.0;
            }
          }
        }
      }
    }
    samples.push_back(std::move(row));
  }

  PairCorrelation out;
  out.snapshots = snapshots.size();
  out.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) out.edges[b] = r_max * b / bins;
  std::vector<double> measure(bins);
  for (int b = 0; b < bins; ++b) measure[b] = pair_shell_measure(box, out.edges[b], out.edges[b + 1]);
  const double vol = box.volume();
  const stats::JackknifeSet jk(samples, std::min(jackknife_blocks, samples.size()));

  for (int a = 0; a < kNumOrientations; ++a) {
    for (int c = a; c < kNumOrientations; ++c) {
      const int slot = slots[a * kNumOrientations + c];
      const double mult = (a == c) ? 2.0 : 1.0;
      PairCorrelation::Series s;
      for (int b = 0; b < bins; ++b) {
        const std::size_t col = kNumOrientations + static_cast<std::size_t>(slot) * bins + b;
        const double m = measure[b];
        const auto est = jk.estimate(
            [&](const std::vector<double>& v) { return mult * v[col] / m - v[a] * v[c] / (vol * vol); });
        s.value.push_back(est.mean);
        s.error.push_back(est.error);
      }
      out.series[PairCorrelation::pair_key(a, c)] = std::move(s);
    }
  }
  PairCorrelation::Series total;
  for (int b = 0; b < bins; ++b) {
    const double m = measure[b];
    const auto est = jk.estimate([&](const std::vector<double>& v) {
      double pairs = 0.0;
      double n = 0.0;
      for (int o = 0; o < kNumOrientations; ++o) n += v[o];
      for (int slot = 0; slot < kPairSlots; ++slot) pairs += v[kNumOrientations + static_cast<std::size_t>(slot) * bins + b];
      return 2.0 * pairs / m - n * n / (vol * vol);
    });
    total.value.push_back(est.mean);
    total.error.push_back(est.error);
  }
  out.series[PairCorrelation::kTotal] = std::move(total);
  return out;
}

DecayFit fit_decay(const std::vector<double>& r, const std::vector<double>& value, const std::vector<double>& error,
                   std::size_t min_bins) {
  if (r.empty()) throw std::invalid_argument("fit_decay: empty input");
  if (r.size() != value.size() || r.size() != error.size()) throw std::invalid_argument("fit_decay: length mismatch");
  DecayFit fit;
  std::vector<double> errs(error);
  std::nth_element(errs.begin(), errs.begin() + static_cast<std::ptrdiff_t>(errs.size() / 2), errs.end());
  fit.noise_floor = 3.0 * errs[errs.size() / 2];

  std::vector<double> x, y, sy;
  int positive = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(error[i] > 0.0) || !(std::abs(value[i]) > fit.noise_floor)) continue;
    x.push_back(r[i]);
    y.push_back(std::log(std::abs(value[i])));
    sy.push_back(error[i] / std::abs(value[i]));
    positive += value[i] > 0.0 ? 1 : -1;
  }
  fit.bins_used = x.size();
  if (x.size() < min_bins) {
    fit.reason = "no-decay-measurable: " + std::to_string(x.size()) + " bins above the noise floor";
    return fit;
  }
  const auto lf = stats::weighted_linear_fit(x, y, sy);
  if (!(lf.slope < 0.0)) {
    fit.reason = "no-decay-measurable: fitted slope is not negative";
    return fit;
  }
  fit.measurable = true;
  fit.xi = -1.0 / lf.slope;
  fit.xi_error = lf.slope_error / (lf.slope * lf.slope);
  fit.amplitude = (positive >= 0 ? 1.0 : -1.0) * std::exp(lf.intercept);
  fit.window_lo = *std::min_element(x.begin(), x.end());
  fit.window_hi = *std::max_element(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) fit.residuals.push_back((y[i] - lf.intercept - lf.slope * x[i]) / sy[i]);
  return fit;
}

}  // namespace platelat
