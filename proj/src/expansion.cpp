#include "platelat/expansion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <functional>
#include <set>

#include "platelat/integrals.hpp"
#include "platelat/rng.hpp"

namespace platelat {

void to_json(nlohmann::json& j, const SeriesEstimate& s) {
  j = nlohmann::json{{"value", s.value},
                     {"order", s.order},
                     {"remainder", std::isfinite(s.remainder) ? nlohmann::json(s.remainder) : nlohmann::json("inf")},
                     {"rigorous", s.rigorous},
                     {"stat_error", s.stat_error},
                     {"coefficients", s.coefficients},
                     {"diagnostics", s.diagnostics}};
}

void from_json(const nlohmann::json& j, SeriesEstimate& s) {
  s.value = j.at("value").get<double>();
  s.order = j.at("order").get<int>();
  const auto& r = j.at("remainder");
  s.remainder = r.is_string() ? std::numeric_limits<double>::infinity() : r.get<double>();
  s.rigorous = j.at("rigorous").get<bool>();
  s.stat_error = j.at("stat_error").get<double>();
  s.coefficients = j.at("coefficients").get<std::vector<double>>();
  s.diagnostics = j.at("diagnostics").get<std::map<std::string, double>>();
}

// ---- Ursell ---------------------------------------------------------------------------------

bool OverlapGraph::connected() const {
  if (n == 0) return true;
  std::uint32_t seen = 1, frontier = 1;
  while (frontier) {
    std::uint32_t next = 0;
    for (int i = 0; i < n; ++i) {
      if (frontier >> i & 1u) next |= adj[i];
    }
    frontier = next & ~seen;
    seen |= next;
  }
  return seen == ((n == 32) ? ~0u : ((1u << n) - 1));
}

OverlapGraph overlap_graph(std::span<const Plate> plates, const ModelParams& params) {
  OverlapGraph g;
  g.n = static_cast<int>(plates.size());
  if (g.n > 32) throw ExpansionError("overlap graph limited to 32 plates");
  g.adj.assign(plates.size(), 0);
  for (int i = 0; i < g.n; ++i) {
    for (int j = i + 1; j < g.n; ++j) {
      if (overlap_free_space(plates[i], plates[j], params)) {
        g.adj[i] |= 1u << j;
        g.adj[j] |= 1u << i;
      }
    }
  }
  return g;
}

namespace {

// Connected part C(S) from Z(S) = sum_{T subset S, T contains min S} C(T) Z(S \ T), where Z(S)
// is 1 for an independent set and 0 otherwise.
std::int64_t connected_sum(const std::vector<std::uint32_t>& adj, int n) {
  const std::uint32_t full = (1u << n) - 1;
  std::vector<std::int64_t> C(std::size_t{1} << n, 0);
  auto independent = [&](std::uint32_t s) {
    for (int i = 0; i < n; ++i) {
      if ((s >> i & 1u) && (adj[i] & s)) return false;
    }
    return true;
  };
  for (std::uint32_t s = 1; s <= full; ++s) {
    const std::uint32_t low = s & (~s + 1);
    std::int64_t c = independent(s) ? 1 : 0;
    const std::uint32_t rest = s & ~low;
    // proper subsets T = low | u with u a proper subset of rest
    for (std::uint32_t u = (rest - 1) & rest;; u = (u - 1) & rest) {
      if (u != rest) {
        const std::uint32_t t = low | u;
        if (C[t] != 0 && independent(s & ~t)) c -= C[t];
      }
      if (u == 0) break;
    }
    C[s] = c;
  }
  return C[full];
}

}  // namespace

std::int64_t ursell(const OverlapGraph& g) {
  if (g.n > 10) throw ExpansionError("ursell function limited to 10 vertices");
  if (g.n == 0) return 0;
  return connected_sum(g.adj, g.n);
}

std::int64_t ursell(std::span<const Plate> plates, const ModelParams& params) {
  if (plates.size() > 10) throw ExpansionError("ursell function limited to 10 plates");
  return ursell(overlap_graph(plates, params));
}

// ---- plate partition functions --------------------------------------------------------------

std::vector<Orientation> all_orientations() {
  std::vector<Orientation> out;
  for (int i = 0; i < kNumOrientations; ++i) out.push_back(Orientation::from_index(i));
  return out;
}

std::vector<Orientation> orientations_of_type(int type) {
  if (type < 1 || type > kNumTypes) throw std::invalid_argument("plate type must be 1, 2 or 3");
  return {Orientation{type - 1, false}, Orientation{type - 1, true}};
}

namespace {

void check_orientations(std::span<const Orientation> os) {
  if (os.empty()) throw ExpansionError("at least one orientation is required");
  std::set<int> seen;
  for (auto o : os) {
    if (!seen.insert(o.index()).second) throw ExpansionError("orientations must be distinct");
  }
}

}  // namespace

SeriesEstimate brute_force_log_z(const ModelParams& params, const Region& region,
                                 std::span<const Orientation> orientations, double z, int n_max,
                                 const BruteForceOptions& options) {
  check_orientations(orientations);
  if (n_max < 1 || n_max > 4) throw ExpansionError("brute force supports 1 <= n_max <= 4");
  if (!(z >= 0.0)) throw ExpansionError("activity must be nonnegative");
  if (!(region.volume() > 0.0)) throw ExpansionError("region must have positive volume");
  const double V = region.volume();
  const auto m = static_cast<int>(orientations.size());
  SeriesEstimate out;
  out.order = n_max;
  out.diagnostics["z_m_V"] = m * z * V;
  if (!options.hard_core) {
    out.value = m * z * V;
    out.coefficients = {m * V};
    return out;
  }
  if (options.samples < 2) throw ExpansionError("brute force needs at least two samples");

  double zt = 1.0 + m * z * V;
  double var = 0.0;
  out.coefficients = {1.0, m * V};
  Philox rng(options.seed, 0xb7e15163ULL);
  constexpr int kStrata = 4;  // per axis, for the first center
  for (int n = 2; n <= n_max; ++n) {
    int tuples = 1;
    for (int i = 0; i < n; ++i) tuples *= m;
    double sum = 0.0, sum2 = 0.0;
    std::array<Plate, 4> ps;
    for (std::int64_t s = 0; s < options.samples; ++s) {
      const auto cell = static_cast<int>(s % (kStrata * kStrata * kStrata));
      const std::array<int, 3> st{cell / (kStrata * kStrata), (cell / kStrata) % kStrata, cell % kStrata};
      for (int i = 0; i < 3; ++i) {
        const double w = (region.hi[i] - region.lo[i]) / kStrata;
        ps[0].center[i] = region.lo[i] + w * (st[i] + rng.uniform());
      }
      for (int p = 1; p < n; ++p) {
        for (int i = 0; i < 3; ++i) ps[p].center[i] = rng.uniform(region.lo[i], region.hi[i]);
      }
      int free_tuples = 0;
      for (int t = 0; t < tuples; ++t) {
        int r = t;
        for (int p = 0; p < n; ++p) {
          ps[p].orientation = orientations[r % m];
          r /= m;
        }
        bool ok = true;
        for (int a = 0; a < n && ok; ++a) {
          for (int b = a + 1; b < n && ok; ++b) ok = !overlap_free_space(ps[a], ps[b], params);
        }
        free_tuples += ok;
      }
      sum += free_tuples;
      sum2 += static_cast<double>(free_tuples) * free_tuples;
    }
    const auto N = static_cast<double>(options.samples);
    const double mean = sum / N;
    const double sem = std::sqrt(std::max(0.0, sum2 / N - mean * mean) / (N - 1.0));
    const double scale = std::pow(z * V, n) / std::tgamma(n + 1.0);
    zt += scale * mean;
    var += scale * scale * sem * sem;
    out.coefficients.push_back(std::pow(V, n) / std::tgamma(n + 1.0) * mean);
  }
  out.value = std::log(zt);
  out.stat_error = std::sqrt(var) / zt;
  // 0 <= phi <= 1, so Z_T <= Z <= Z_T + sum_{n > n_max} (m z V)^n / n!
  out.remainder = std::log1p(exp_tail(m * z * V, n_max + 1) / zt);
  if (out.remainder > options.tolerance) {
    throw ExpansionError("truncation remainder " + std::to_string(out.remainder) + " exceeds tolerance " +
                         std::to_string(options.tolerance) + " at n_max = " + std::to_string(n_max));
  }
  return out;
}

SeriesEstimate mayer_log_z(const ModelParams& params, const ExpansionRegion& er,
                           std::span<const Orientation> orientations, double z, int order) {
  check_orientations(orientations);
  if (order < 1 || order > 2) throw ExpansionError("mayer_log_z supports order 1 or 2");
  if (!(z >= 0.0)) throw ExpansionError("activity must be nonnegative");
  const Region& r = er.region;
  const double V = r.volume();
  if (!(V > 0.0)) throw ExpansionError("region must have positive volume");
  if (er.periodic) {
    const double L = r.hi[0] - r.lo[0];
    for (int i = 1; i < 3; ++i) {
      if (std::abs((r.hi[i] - r.lo[i]) - L) > 1e-12 * L) throw ExpansionError("periodic region must be a cube");
    }
  }
  const auto m = static_cast<double>(orientations.size());

  // pair[o][o'] = measure of overlapping center pairs in the region
  double pair_sum = 0.0;
  double reach = 0.0;  // max_o sum_o' min(excluded volume, V)
  for (auto o : orientations) {
    double row = 0.0;
    for (auto o2 : orientations) {
      double pm;
      if (er.periodic) {
        const double L = r.hi[0] - r.lo[0];
        const Vec3 t = overlap_thresholds(o, o2, params);
        pm = V;
        for (int i = 0; i < 3; ++i) pm *= std::min(2.0 * t[i], L);
      } else {
        pm = pair_overlap_measure(r, r, o, o2, params);
      }
      pair_sum += pm;
      row += std::min(excluded_volume(o, o2, params), V);
    }
    reach = std::max(reach, row);
  }
  SeriesEstimate out;
  out.order = order;
  const double b1 = m * V;
  const double b2 = -0.5 * pair_sum;
  out.coefficients = {b1};
  out.value = b1 * z;
  if (order >= 2) {
    out.coefficients.push_back(b2);
    out.value += b2 * z * z;
  }
  // |b_n| z^n <= n^(n-2) / n! * m z V * (z reach)^(n-1)   (tree-graph bound)
  const double x = z * reach;
  if (z == 0.0) {
    out.remainder = 0.0;
  } else if (std::exp(1.0) * x >= 1.0) {
    out.remainder = std::numeric_limits<double>::infinity();
  } else {
    double tail = 0.0;
    for (int n = order + 1; n < 10000; ++n) {
      const double logterm = (n - 2) * std::log(static_cast<double>(n)) - std::lgamma(n + 1.0) + std::log(m * z * V) +
                             (n - 1) * std::log(x);
      const double term = std::exp(logterm);
      tail += term;
      if (term < 1e-17 * tail) break;
    }
    out.remainder = tail;
  }
  out.diagnostics["z_k_1_plus_alpha"] = z * std::pow(params.k(), 1.0 + params.alpha());
  out.diagnostics["z_k_squared"] = z * params.k() * params.k();
  out.diagnostics["exp_minus_z_k_2_plus_alpha"] = std::exp(-z * std::pow(params.k(), 2.0 + params.alpha()));
  out.diagnostics["tree_bound_ratio"] = std::exp(1.0) * x;
  return out;
}

double mayer_density(const SeriesEstimate& s, double z, double volume) {
  double d = 0.0;
  for (std::size_t i = 0; i < s.coefficients.size(); ++i) d += (i + 1) * s.coefficients[i] * std::pow(z, i + 1);
  return d / volume;
}

// ---- polymers -------------------------------------------------------------------------------

namespace {

bool d_adjacent(const BlockCoord3& a, const BlockCoord3& b) {
  return std::abs(a[0] - b[0]) <= 1 && std::abs(a[1] - b[1]) <= 1 && std::abs(a[2] - b[2]) <= 1;
}

}  // namespace

bool PolymerModel::d_connected(const std::vector<BlockCoord3>& blocks) {
  if (blocks.empty()) return false;
  std::vector<bool> seen(blocks.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < blocks.size(); ++j) {
      if (!seen[j] && d_adjacent(blocks[i], blocks[j])) {
        seen[j] = true;
        ++count;
        stack.push_back(j);
      }
    }
  }
  return count == blocks.size();
}

PolymerModel::PolymerModel(std::array<int, 3> dims, std::vector<Polymer> polymers)
    : dims_(dims), polymers_(std::move(polymers)) {
  for (int d : dims_) {
    if (d < 1) throw ExpansionError("lattice dimensions must be positive");
  }
  if (polymers_.size() > 64) throw ExpansionError("at most 64 polymers");
  for (auto& p : polymers_) {
    std::sort(p.blocks.begin(), p.blocks.end());
    if (std::adjacent_find(p.blocks.begin(), p.blocks.end()) != p.blocks.end()) {
      throw ExpansionError("polymer lists a block twice");
    }
    for (const auto& b : p.blocks) {
      for (int i = 0; i < 3; ++i) {
        if (b[i] < 0 || b[i] >= dims_[i]) throw ExpansionError("polymer block outside the lattice");
      }
    }
    if (!d_connected(p.blocks)) throw ExpansionError("polymer is not D-connected");
    if (!std::isfinite(p.activity)) throw ExpansionError("polymer activity must be finite");
  }
  incompatible_.assign(polymers_.size(), 0);
  for (std::size_t i = 0; i < polymers_.size(); ++i) {
    for (std::size_t j = 0; j < polymers_.size(); ++j) {
      if (!compatible(i, j)) incompatible_[i] |= std::uint64_t{1} << j;
    }
  }
}

bool PolymerModel::compatible(std::size_t i, std::size_t j) const {
  if (i == j) return false;
  for (const auto& a : polymers_[i].blocks) {
    for (const auto& b : polymers_[j].blocks) {
      if (d_adjacent(a, b)) return false;
    }
  }
  return true;
}

void to_json(nlohmann::json& j, const PolymerModel& m) {
  nlohmann::json ps = nlohmann::json::array();
  for (const auto& p : m.polymers()) ps.push_back({{"blocks", p.blocks}, {"activity", p.activity}});
  j = nlohmann::json{{"format_version", 1}, {"dims", m.dims()}, {"polymers", ps}};
}

void from_json(const nlohmann::json& j, PolymerModel& m) {
  if (j.value("format_version", 0) != 1) throw ExpansionError("unsupported polymer model format_version");
  std::vector<Polymer> ps;
  for (const auto& p : j.at("polymers")) {
    ps.push_back(Polymer{p.at("blocks").get<std::vector<BlockCoord3>>(), p.at("activity").get<double>()});
  }
  m = PolymerModel(j.at("dims").get<std::array<int, 3>>(), std::move(ps));
}

PolymerModel random_polymer_model(std::array<int, 3> dims, int count, int max_size, double max_activity,
                                  std::uint64_t seed) {
  if (count < 0 || max_size < 1) throw ExpansionError("random polymer model: bad size parameters");
  Philox rng(seed, 0x7f4a7c15ULL);
  std::set<std::vector<BlockCoord3>> seen;
  std::vector<Polymer> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > 1000 * (count + 1)) throw ExpansionError("random polymer model: could not place polymers");
    const int size = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_size)));
    std::vector<BlockCoord3> blocks{{static_cast<int>(rng.below(dims[0])), static_cast<int>(rng.below(dims[1])),
                                     static_cast<int>(rng.below(dims[2]))}};
    for (int tries = 0; static_cast<int>(blocks.size()) < size && tries < 100; ++tries) {
      BlockCoord3 b = blocks[rng.below(blocks.size())];
      for (int i = 0; i < 3; ++i) b[i] += static_cast<int>(rng.below(3)) - 1;
      bool inside = true;
      for (int i = 0; i < 3; ++i) inside = inside && b[i] >= 0 && b[i] < dims[i];
      if (inside && std::find(blocks.begin(), blocks.end(), b) == blocks.end()) blocks.push_back(b);
    }
    std::sort(blocks.begin(), blocks.end());
    if (!seen.insert(blocks).second) continue;
    out.push_back(Polymer{blocks, max_activity * (2.0 * rng.uniform() - 1.0)});
  }
  return PolymerModel(dims, std::move(out));
}

double polymer_z_exact(const PolymerModel& model) {
  const auto& d = model.dims();
  if (static_cast<long>(d[0]) * d[1] * d[2] > 64) throw ExpansionError("exact enumeration limited to 4^3 blocks");
  if (model.size() > 40) throw ExpansionError("exact enumeration limited to 40 polymers");
  for (const auto& p : model.polymers()) {
    if (p.blocks.size() > 4) throw ExpansionError("exact enumeration limited to polymers of 4 blocks");
  }
  const std::size_t n = model.size();
  // Sum over independent sets by recursion on the lowest undecided polymer.
  std::function<double(std::size_t, std::uint64_t)> rec = [&](std::size_t i, std::uint64_t blocked) -> double {
    while (i < n && (blocked >> i & 1u)) ++i;
    if (i >= n) return 1.0;
    const double skip = rec(i + 1, blocked);
    const double take = model.polymers()[i].activity * rec(i + 1, blocked | model.incompatible_mask(i));
    return skip + take;
  };
  return rec(0, 0);
}

std::int64_t polymer_ursell(const PolymerModel& model, std::span<const std::size_t> tuple) {
  const int n = static_cast<int>(tuple.size());
  if (n > 10) throw ExpansionError("polymer ursell function limited to 10 polymers");
  if (n == 0) return 0;
  std::vector<std::uint32_t> adj(tuple.size(), 0);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (!model.compatible(tuple[a], tuple[b])) {
        adj[a] |= 1u << b;
        adj[b] |= 1u << a;
      }
    }
  }
  return connected_sum(adj, n);
}

namespace {

// Largest lambda for which lambda K satisfies the criterion with weight a |X|; zero model gives inf.
double criterion_scale(const PolymerModel& model, double a) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < model.size(); ++i) {
    double s = 0.0;
    const std::uint64_t mask = model.incompatible_mask(i);
    for (std::size_t j = 0; j < model.size(); ++j) {
      if (mask >> j & 1u) {
        const auto& y = model.polymers()[j];
        s += std::abs(y.activity) * std::exp(a * static_cast<double>(y.blocks.size()));
      }
    }
    if (s > 0.0) best = std::min(best, a * static_cast<double>(model.polymers()[i].blocks.size()) / s);
  }
  return best;
}

double weighted_activity_sum(const PolymerModel& model, double a) {
  double s = 0.0;
  for (const auto& p : model.polymers()) s += std::abs(p.activity) * std::exp(a * static_cast<double>(p.blocks.size()));
  return s;
}

}  // namespace

SeriesEstimate polymer_log_z_cluster(const PolymerModel& model, int max_cluster_size) {
  if (max_cluster_size < 1 || max_cluster_size > 8) throw ExpansionError("cluster size must lie in 1..8");
  SeriesEstimate out;
  out.order = max_cluster_size;
  double eps = 0.0;
  for (const auto& p : model.polymers()) {
    eps = std::max(eps, std::pow(std::abs(p.activity), 1.0 / static_cast<double>(p.blocks.size())));
  }
  out.diagnostics["sup_activity_root"] = eps;
  const double a0 = std::log(2.0);
  const double lambda0 = criterion_scale(model, a0);
  out.diagnostics["criterion_margin"] = lambda0;
  if (!(lambda0 >= 1.0)) {
    throw ExpansionError("activities violate the convergence criterion with a = log 2 (margin " +
                         std::to_string(lambda0) + " < 1); the cluster expansion is not certified");
  }

  const std::size_t n = model.size();
  std::vector<double> by_size(static_cast<std::size_t>(max_cluster_size), 0.0);
  std::vector<std::size_t> tuple;
  std::function<void(std::size_t, double, double)> rec = [&](std::size_t start, double weight, double mult_fact) {
    // weight = product of activities, mult_fact = product of multiplicity factorials
    if (!tuple.empty()) {
      const auto phi = polymer_ursell(model, tuple);
      if (phi != 0) by_size[tuple.size() - 1] += static_cast<double>(phi) * weight / mult_fact;
    }
    if (static_cast<int>(tuple.size()) == max_cluster_size) return;
    for (std::size_t i = start; i < n; ++i) {
      // extending a cluster by a polymer compatible with all members can still connect later,
      // so only the multiplicity bookkeeping prunes here
      std::size_t reps = 1;
      for (auto t : tuple) reps += t == i;
      tuple.push_back(i);
      rec(i, weight * model.polymers()[i].activity, mult_fact * static_cast<double>(reps));
      tuple.pop_back();
    }
  };
  rec(0, 1.0, 1.0);
  out.coefficients = by_size;
  out.value = std::accumulate(by_size.begin(), by_size.end(), 0.0);

  double best = std::numeric_limits<double>::infinity();
  if (n == 0 || weighted_activity_sum(model, 0.0) == 0.0) {
    best = 0.0;
  } else {
    for (int g = 1; g <= 200; ++g) {
      const double a = 0.05 * g;
      const double lam = criterion_scale(model, a);
      if (!(lam > 1.0)) continue;
      const double bound = std::pow(lam, -static_cast<double>(max_cluster_size)) * weighted_activity_sum(model, a);
      best = std::min(best, bound);
    }
  }
  out.remainder = best;
  return out;
}

// ---- connected plate integrals --------------------------------------------------------------

PlateBoundCheck connected_plate_bound_check(const ModelParams& params, const Region& S, int q, double z, int l,
                                            std::int64_t samples, std::uint64_t seed) {
  if (l < 1 || l > 4) throw ExpansionError("connected plate check supports 1 <= l <= 4");
  if (!(z >= 0.0)) throw ExpansionError("activity must be nonnegative");
  if (samples < 2) throw ExpansionError("connected plate check needs at least two samples");
  const auto os = orientations_of_type(q);
  const double vs = S.volume();
  PlateBoundCheck out;
  out.l = l;
  double var = 0.0;
  for (int n = l; n <= l + 1; ++n) {
    const double pref = std::pow(z, n) / std::tgamma(n + 1.0) * vs;
    double term = 0.0;
    if (n == 1) {
      term = pref * static_cast<double>(os.size());
    } else if (n == 2) {
      double s = 0.0;
      for (auto a : os) {
        for (auto b : os) s += excluded_volume(a, b, params);
      }
      term = pref * s;
    } else {
      // Plates 2..n relative to plate 1 in the cube of half-width (n-1)k that holds every
      // connected configuration.
      const double half = (n - 1) * params.k();
      const double w = std::pow(2.0 * half, 3.0 * (n - 1));
      Philox rng(seed, 0x1000u + static_cast<std::uint64_t>(n));
      double sum = 0.0, sum2 = 0.0;
      std::vector<Plate> ps(static_cast<std::size_t>(n));
      const int tuples = 1 << n;
      for (std::int64_t s = 0; s < samples; ++s) {
        ps[0].center = {0.0, 0.0, 0.0};
        for (int p = 1; p < n; ++p) {
          for (int i = 0; i < 3; ++i) ps[p].center[i] = rng.uniform(-half, half);
        }
        double acc = 0.0;
        for (int t = 0; t < tuples; ++t) {
          for (int p = 0; p < n; ++p) ps[p].orientation = os[t >> p & 1];
          acc += static_cast<double>(std::llabs(ursell(ps, params)));
        }
        sum += acc;
        sum2 += acc * acc;
      }
      const auto N = static_cast<double>(samples);
      const double mean = sum / N;
      const double sem = std::sqrt(std::max(0.0, sum2 / N - mean * mean) / (N - 1.0));
      term = pref * w * mean;
      var += std::pow(pref * w * sem, 2);
    }
    out.terms.push_back(term);
  }
  out.value = out.terms[0] + out.terms[1];
  out.stat_error = std::sqrt(var);
  out.scale = z * vs * std::pow(z * params.k() * params.k(), l - 1);
  out.empirical_constant = out.scale > 0.0 ? std::pow(out.value / out.scale, 1.0 / l) : 0.0;
  return out;
}

}  // namespace platelat
