#include "platelat/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>

#include "platelat/coarsegrain.hpp"
#include "platelat/config.hpp"
#include "platelat/expansion.hpp"
#include "platelat/gcmc.hpp"
#include "platelat/pebbles.hpp"
#include "platelat/snapshot.hpp"

namespace platelat {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kReportFormatVersion = 1;

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

void write_json(const fs::path& p, const json& j) {
  auto f = open_out(p);
  f << j.dump(2) << '\n';
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json estimate_json(const ObservableAccumulator::Estimate& e) {
  return {{"mean", finite_or_null(e.mean)}, {"error", finite_or_null(e.error)}, {"samples", e.samples},
          {"converged", e.converged}};
}

std::string replica_suffix(int replicas, int i, const std::string& ext) {
  return replicas == 1 ? ext : "_r" + std::to_string(i) + ext;
}

std::optional<BlockLattice> try_lattice(const ModelParams& params, const SimBox& box) {
  try {
    return BlockLattice(params, box);
  } catch (const LatticeError&) {
    return std::nullopt;
  }
}

// ---- analysis passes shared by simulate / contours / pebbles ---------------------------------

struct ContourPass {
  json per_snapshot = json::array();
  std::map<std::size_t, std::size_t> histogram;  // contours per snapshot -> frequency
  double bad_fraction_sum = 0.0;
  std::size_t snapshots = 0;
  std::size_t violations = 0;
  json spin_dumps = json::array();
};

json contour_json(const Contour& c, const BlockLattice& lattice) {
  json support = json::array();
  for (auto idx : c.support) {
    const auto b = lattice.coords(idx);
    support.push_back({b[0], b[1], b[2]});
  }
  return {{"support", support},
          {"size", c.support.size()},
          {"holes", c.holes()},
          {"m_ext", c.m_ext},
          {"m_int", c.m_int},
          {"plates", c.plates.size()}};
}

void analyze_contours(const Snapshot& snap, ContourPass& pass, bool dump_spins) {
  const ModelParams params = snap.params();
  const SimBox box = snap.box();
  if (box.mode != BoundaryMode::open) throw ConfigError("contour analysis needs open-box snapshots");
  const BlockLattice lattice(params, box);
  if (!lattice.smoothing_aligned()) {
    throw ConfigError("contour analysis needs (L / (k/2) + 2) to be a multiple of 8");
  }
  json rec = {{"sweep", snap.sweep}, {"seed", snap.seed}, {"plates", snap.plates.size()}};
  std::size_t count = 0;
  try {
    const SpinField sigma = assign_spins(snap.plates, lattice, SpinBoundary{snap.boundary_q, snap.boundary_depth});
    const BadRegion region = bad_region(sigma);
    std::size_t bad = 0;
    for (auto b : region.bad) bad += b;
    pass.bad_fraction_sum += static_cast<double>(bad) / static_cast<double>(lattice.size());
    const auto contours = extract_contours(sigma, region, snap.plates, lattice);
    const auto rep = check_contour_invariants(sigma, region, contours);
    json cs = json::array();
    for (const auto& c : contours) cs.push_back(contour_json(c, lattice));
    count = contours.size();
    rec["contours"] = cs;
    rec["bad_blocks"] = bad;
    rec["invariants"] = {{"ok", rep.ok},
                         {"violations", rep.violations},
                         {"min_complement_separation", rep.min_complement_separation},
                         {"min_closure_separation", rep.min_closure_separation}};
    pass.violations += rep.violations.size();
    if (dump_spins) pass.spin_dumps.push_back({{"sweep", snap.sweep}, {"n", sigma.n}, {"spins", sigma.spins}});
  } catch (const ContourError& e) {
    rec["invariants"] = {{"ok", false}, {"violations", {e.what()}}};
    ++pass.violations;
  } catch (const LatticeError& e) {
    rec["invariants"] = {{"ok", false}, {"violations", {e.what()}}};
    ++pass.violations;
  }
  ++pass.histogram[count];
  ++pass.snapshots;
  pass.per_snapshot.push_back(rec);
}

json contour_summary(const ContourPass& pass) {
  json hist = json::object();
  for (const auto& [k, v] : pass.histogram) hist[std::to_string(k)] = v;
  return {{"snapshots", pass.snapshots},
          {"bad_block_fraction", pass.snapshots ? pass.bad_fraction_sum / static_cast<double>(pass.snapshots) : 0.0},
          {"contour_count_histogram", hist},
          {"violations", pass.violations}};
}

struct PebblePass {
  std::size_t blocks = 0;
  std::size_t two_type_blocks = 0;
  int min_atypical_two_type = -1;
  std::size_t below_threshold = 0;
  std::size_t tile_failures = 0;
  std::size_t mixed_pebbles = 0;
  json witnesses = json::array();
};

void analyze_pebbles(const Snapshot& snap, PebblePass& pass) {
  const ModelParams params = snap.params();
  const BlockLattice lattice(params, snap.box());
  const double threshold = atypical_threshold(params);
  std::vector<std::vector<Plate>> by_block(lattice.size());
  for (const Plate& p : snap.plates) by_block[lattice.block_index_of(p.center)].push_back(p);
  for (std::size_t b = 0; b < by_block.size(); ++b) {
    if (by_block[b].empty()) continue;
    ++pass.blocks;
    unsigned types = 0;
    for (const Plate& p : by_block[b]) types |= 1u << p.orientation.type();
    try {
      const auto grid = pebble_classify(lattice.block_region(lattice.coords(b)), by_block[b], params);
      const auto tiles = check_tile_properties(grid);
      if (!tiles.ok) {
        ++pass.tile_failures;
        if (pass.witnesses.size() < 20) pass.witnesses.push_back({{"sweep", snap.sweep}, {"block", b}, {"witnesses", tiles.witnesses}});
      }
      if ((types & (types - 1)) != 0) {
        ++pass.two_type_blocks;
        const int a = count_atypical(grid);
        if (pass.min_atypical_two_type < 0 || a < pass.min_atypical_two_type) pass.min_atypical_two_type = a;
        if (a < threshold) ++pass.below_threshold;
      }
    } catch (const PebbleError& e) {
      ++pass.mixed_pebbles;
      if (pass.witnesses.size() < 20) pass.witnesses.push_back({{"sweep", snap.sweep}, {"block", b}, {"error", e.what()}});
    }
  }
}

json pebble_summary(const PebblePass& p, const ModelParams& params) {
  return {{"occupied_blocks", p.blocks},
          {"two_type_blocks", p.two_type_blocks},
          {"atypical_threshold", atypical_threshold(params)},
          {"min_atypical_in_two_type_blocks", p.min_atypical_two_type},
          {"blocks_below_threshold", p.below_threshold},
          {"tile_property_failures", p.tile_failures},
          {"mixed_type_pebbles", p.mixed_pebbles},
          {"witnesses", p.witnesses}};
}

std::size_t pebble_violations(const PebblePass& p) { return p.below_threshold + p.tile_failures + p.mixed_pebbles; }

struct HardCoreViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<Snapshot> load_snapshot_inputs(const RunConfig& c) {
  if (c.analysis.snapshots.empty()) throw ConfigError("analysis.snapshots lists no snapshot files");
  std::vector<Snapshot> all;
  for (const auto& path : c.analysis.snapshots) {
    auto s = read_snapshots_file(path);
    for (const auto& snap : s) {
      PlateSet set(snap.params(), snap.box());
      for (const auto& p : snap.plates) {
        if (!set.try_insert(p)) throw HardCoreViolation(path + ": snapshot at sweep " + std::to_string(snap.sweep) +
                                                        " contains overlapping plates");
      }
    }
    all.insert(all.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  return all;
}

std::string series_name(int key) {
  if (key == PairCorrelation::kTotal) return "total";
  return to_token(Orientation::from_index(key / kNumOrientations)) + "-" +
         to_token(Orientation::from_index(key % kNumOrientations));
}

void write_correlation_csv(const fs::path& p, const PairCorrelation& pc) {
  auto f = open_out(p);
  f << "series,r_lo,r_hi,r,value,error\n";
  char buf[160];
  for (const auto& [key, s] : pc.series) {
    for (std::size_t b = 0; b < s.value.size(); ++b) {
      const double lo = pc.edges[b], hi = pc.edges[b + 1];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g", lo, hi, 0.5 * (lo + hi), s.value[b], s.error[b]);
      f << series_name(key) << ',' << buf << '\n';
    }
  }
}

// ---- subcommands -----------------------------------------------------------------------------

int cmd_simulate(const RunConfig& c, const fs::path& out, std::ostream& err) {
  const ModelParams params = c.params();
  const SimBox box = c.sim_box();
  RunParams rp = c.run_params();
  const auto lattice = try_lattice(params, box);
  if (rp.boundary_q != 0 && !lattice) throw ConfigError("boundary_q needs L to be a whole number of blocks (k/2)");
  if (c.analysis.contours) {
    if (box.mode != BoundaryMode::open) throw ConfigError("analysis.contours needs an open box");
    if (!lattice || !lattice->smoothing_aligned()) {
      throw ConfigError("analysis.contours needs L / (k/2) + 2 to be a multiple of 8");
    }
  }
  if (c.analysis.pebbles && (!lattice || !params.pebbles_per_block_edge())) {
    throw ConfigError("analysis.pebbles needs whole blocks and an integer k^(1-alpha)");
  }
  rp.spin_census = lattice.has_value();

  const int replicas = c.run.replicas;
  std::vector<std::future<std::pair<Sampler::RunOutput, MoveCounters>>> jobs;
  for (int i = 0; i < replicas; ++i) {
    RunParams r = rp;
    r.stream = static_cast<std::uint64_t>(i);
    jobs.push_back(std::async(std::launch::async, [params, box, r] {
      Sampler s(params, box, r);
      auto o = s.run();
      return std::make_pair(std::move(o), s.counters());
    }));
  }
  ObservableAccumulator all;
  std::vector<Snapshot> snapshots;
  MoveCounters counters;
  std::size_t boundary_violations = 0;
  for (int i = 0; i < replicas; ++i) {
    auto [o, cnt] = jobs[i].get();
    {
      auto f = open_out(out / ("observables" + replica_suffix(replicas, i, ".csv")));
      write_observables_header(f);
      for (const auto& [chain, series] : o.observables.chains()) {
        for (const auto& smp : series) write_observable_row(f, smp);
      }
    }
    if (rp.snapshot_stride > 0) {
      auto f = open_out(out / ("snapshots" + replica_suffix(replicas, i, ".jsonl")));
      for (const auto& s : o.snapshots) write_snapshot(f, s);
    }
    for (int m = 0; m < 4; ++m) {
      counters.attempted[m] += cnt.attempted[m];
      counters.accepted[m] += cnt.accepted[m];
    }
    all.merge(o.observables);
    if (rp.boundary_q != 0) {
      for (const auto& s : o.snapshots) {
        for (const Plate& p : s.plates) {
          if (p.orientation.type() != rp.boundary_q &&
              lattice->distance_to_outside(lattice->block_of(p.center)) <= rp.boundary_depth) {
            ++boundary_violations;
          }
        }
      }
    }
    snapshots.insert(snapshots.end(), std::make_move_iterator(o.snapshots.begin()),
                     std::make_move_iterator(o.snapshots.end()));
  }

  const double V = box.volume();
  json summary;
  summary["format_version"] = kReportFormatVersion;
  summary["config"] = serialize_config(c);
  summary["samples"] = all.sample_count();
  json dens = json::object();
  for (int o = 0; o < kNumOrientations; ++o) dens[to_token(Orientation::from_index(o))] = estimate_json(all.density(o, V));
  summary["density"] = dens;
  summary["total_density"] = estimate_json(all.total_density(V));
  json frac = json::object();
  for (int t = 1; t <= kNumTypes; ++t) {
    frac[std::to_string(t)] = estimate_json(all.estimate([t](const Sample& s) {
      const auto n = s.total();
      if (n == 0) return std::numeric_limits<double>::quiet_NaN();
      return static_cast<double>(s.counts[2 * t - 2] + s.counts[2 * t - 1]) / static_cast<double>(n);
    }));
  }
  summary["type_fraction"] = frac;
  summary["order_parameter"] = estimate_json(all.order_parameter());
  json acc = json::object();
  const char* names[] = {"insert", "delete", "translate", "reorient"};
  for (int m = 0; m < 4; ++m) acc[names[m]] = counters.rate(static_cast<MoveKind>(m));
  summary["acceptance"] = acc;
  if (lattice) {
    json census = json::object();
    for (int s = 0; s <= 4; ++s) {
      census[std::to_string(s)] = estimate_json(all.estimate([s, n = lattice->size()](const Sample& x) {
        return static_cast<double>(x.spin_census[s]) / static_cast<double>(n);
      }));
    }
    summary["spin_fraction"] = census;
  }
  summary["boundary_violations"] = boundary_violations;
  summary["snapshots"] = snapshots.size();

  std::size_t violations = boundary_violations;
  if (c.analysis.contours) {
    ContourPass pass;
    for (const auto& s : snapshots) analyze_contours(s, pass, false);
    summary["contours"] = contour_summary(pass);
    violations += pass.violations;
  }
  if (c.analysis.pebbles) {
    PebblePass pass;
    for (const auto& s : snapshots) analyze_pebbles(s, pass);
    summary["pebbles"] = pebble_summary(pass, params);
    violations += pebble_violations(pass);
  }
  int code = kExitOk;
  if (c.analysis.pair_correlation) {
    const double r_max = c.analysis.r_max.value_or(0.5 * box.L);
    try {
      const auto pc = pair_correlation(snapshots, c.analysis.bins, r_max);
      write_correlation_csv(out / "correlation.csv", pc);
      summary["pair_correlation"] = {{"file", "correlation.csv"}, {"snapshots", pc.snapshots}, {"r_max", r_max}};
    } catch (const HardCoreViolation& e) {
    err << "platelat: invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const PlateSetError& e) {
    err << "platelat: invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const PlateSetError& e) {
    err << "platelat: invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const InsufficientSamples& e) {
      summary["pair_correlation"] = {{"error", e.what()}};
      err << "platelat: " << e.what() << '\n';
      code = kExitStatistics;
    }
  }
  summary["invariant_violations"] = violations;
  write_json(out / "summary.json", summary);
  if (violations > 0) {
    err << "platelat: " << violations << " invariant violation(s); see summary.json\n";
    return kExitInvariant;
  }
  return code;
}

int cmd_virial(const RunConfig& c, const fs::path& out, std::ostream&) {
  const ModelParams params = c.params();
  json matrix = json::array();
  {
    auto f = open_out(out / "excluded_volume.csv");
    f << "o";
    for (int b = 0; b < kNumOrientations; ++b) f << ',' << to_token(Orientation::from_index(b));
    f << '\n';
    char buf[40];
    for (int a = 0; a < kNumOrientations; ++a) {
      json row = json::array();
      f << to_token(Orientation::from_index(a));
      for (int b = 0; b < kNumOrientations; ++b) {
        const double v = excluded_volume(Orientation::from_index(a), Orientation::from_index(b), params);
        row.push_back(v);
        std::snprintf(buf, sizeof buf, "%.17g", v);
        f << ',' << buf;
      }
      f << '\n';
      matrix.push_back(row);
    }
  }
  // Scaling class of each pair: the leading power of k in the product of per-axis sums.
  auto exponent_of = [&](Orientation o, Orientation o2) {
    auto power = [&](Orientation x, int axis) {
      if (axis == x.type_axis) return 0.0;
      return axis_extents(x, params)[axis] == params.k() ? 1.0 : params.alpha();
    };
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += std::max(power(o, i), power(o2, i));
    return s;
  };
  const Orientation ref{2, false};  // 3a
  std::map<double, std::vector<std::string>> classes;
  std::map<double, std::pair<double, double>> ranges;
  for (int b = 0; b < kNumOrientations; ++b) {
    const auto o = Orientation::from_index(b);
    const double e = exponent_of(ref, o);
    const double v = excluded_volume(ref, o, params);
    classes[e].push_back(to_token(o));
    auto [it, fresh] = ranges.try_emplace(e, v, v);
    if (!fresh) it->second = {std::min(it->second.first, v), std::max(it->second.second, v)};
  }
  json cls = json::array();
  bool ordered = true;
  double prev_max = -1.0;
  for (const auto& [e, members] : classes) {
    cls.push_back({{"exponent", e}, {"partners_of_3a", members}, {"min", ranges[e].first}, {"max", ranges[e].second}});
    ordered = ordered && ranges[e].first > prev_max;
    prev_max = ranges[e].second;
  }
  json report = {{"format_version", kReportFormatVersion},
                 {"k", params.k()},
                 {"alpha", params.alpha()},
                 {"orientations", {"1a", "1b", "2a", "2b", "3a", "3b"}},
                 {"excluded_volume", matrix},
                 {"classes_vs_3a", cls},
                 {"hierarchy_ordered", ordered}};
  const auto& e = c.expansion;
  if (e.region) {
    std::vector<Orientation> os;
    for (const auto& t : e.orientations) os.push_back(parse_orientation(t));
    const auto mayer = mayer_log_z(params, ExpansionRegion{*e.region, e.periodic}, os, e.z, e.order);
    json cross = {{"mayer", mayer}};
    if (!e.periodic) {
      try {
        BruteForceOptions opt;
        opt.samples = e.samples;
        opt.seed = c.run.seed;
        opt.tolerance = e.tolerance;
        const auto brute = brute_force_log_z(params, *e.region, os, e.z, e.n_max, opt);
        const double diff = std::abs(brute.value - mayer.value);
        const double allowed = brute.remainder + mayer.remainder + 3.0 * brute.stat_error;
        cross["brute_force"] = brute;
        cross["difference"] = diff;
        cross["allowed"] = allowed;
        cross["agree"] = diff <= allowed;
      } catch (const ExpansionError& ex) {
        cross["brute_force"] = {{"error", ex.what()}};
      }
    }
    report["log_z"] = cross;
  }
  write_json(out / "virial.json", report);
  return kExitOk;
}

int cmd_contours(const RunConfig& c, const fs::path& out, std::ostream& err) {
  const auto snaps = load_snapshot_inputs(c);
  ContourPass pass;
  for (const auto& s : snaps) {
    if (s.mode != BoundaryMode::open) throw ConfigError("contours: periodic snapshots are rejected");
  }
  for (const auto& s : snaps) analyze_contours(s, pass, true);
  json report = {{"format_version", kReportFormatVersion},
                 {"summary", contour_summary(pass)},
                 {"snapshots", pass.per_snapshot}};
  write_json(out / "contours.json", report);
  {
    auto f = open_out(out / "spins.jsonl");
    for (const auto& d : pass.spin_dumps) f << d.dump() << '\n';
  }
  if (pass.violations > 0) {
    err << "platelat: " << pass.violations << " contour invariant violation(s)\n";
    return kExitInvariant;
  }
  return kExitOk;
}

int cmd_pebbles(const RunConfig& c, const fs::path& out, std::ostream& err) {
  const auto snaps = load_snapshot_inputs(c);
  PebblePass pass;
  std::optional<ModelParams> params;
  for (const auto& s : snaps) {
    params = s.params();
    if (!params->pebbles_per_block_edge()) throw ConfigError("pebbles: k^(1-alpha) must be an integer");
    if (!try_lattice(*params, s.box())) throw ConfigError("pebbles: L must be a whole number of blocks");
  }
  for (const auto& s : snaps) analyze_pebbles(s, pass);
  json report = {{"format_version", kReportFormatVersion}, {"snapshots", snaps.size()}};
  if (params) report["pebbles"] = pebble_summary(pass, *params);
  write_json(out / "pebbles.json", report);
  if (pebble_violations(pass) > 0) {
    err << "platelat: pebble lemma violated; see pebbles.json\n";
    return kExitInvariant;
  }
  return kExitOk;
}

int cmd_polymer_check(const RunConfig& c, const fs::path& out, std::ostream& err) {
  const auto& e = c.expansion;
  std::vector<PolymerModel> models;
  if (e.polymer_model) {
    try {
      models.push_back(e.polymer_model->get<PolymerModel>());
    } catch (const json::exception& ex) {
      throw ConfigError(std::string("expansion.polymer_model: ") + ex.what());
    } catch (const ExpansionError& ex) {
      throw ConfigError(std::string("expansion.polymer_model: ") + ex.what());
    }
  }
  for (int i = 0; i < e.random_models; ++i) {
    models.push_back(random_polymer_model({4, 4, 4}, e.random_polymers, e.random_max_size, e.random_max_activity,
                                          c.run.seed + static_cast<std::uint64_t>(i)));
  }
  if (models.empty()) throw ConfigError("polymer-check: give expansion.polymer_model or expansion.random_models");
  json results = json::array();
  std::size_t failures = 0;
  for (const auto& m : models) {
    json r = {{"model", m}};
    const double exact = std::log(polymer_z_exact(m));
    try {
      const auto cl = polymer_log_z_cluster(m, e.max_cluster_size);
      const double diff = std::abs(cl.value - exact);
      r["log_exact"] = exact;
      r["cluster"] = cl;
      r["difference"] = diff;
      r["within_remainder"] = diff <= cl.remainder;
      if (!(diff <= cl.remainder)) ++failures;
    } catch (const ExpansionError& ex) {
      throw ConfigError(std::string("polymer-check: ") + ex.what());
    }
    results.push_back(r);
  }
  write_json(out / "polymer_check.json",
             {{"format_version", kReportFormatVersion}, {"models", results}, {"failures", failures}});
  if (failures) {
    err << "platelat: " << failures << " model(s) outside the stated remainder\n";
    return kExitInvariant;
  }
  return kExitOk;
}

int cmd_fit_decay(const RunConfig& c, const fs::path& out, std::ostream& err) {
  if (c.analysis.correlation_csv.empty()) throw ConfigError("analysis.correlation_csv is not set");
  std::ifstream in(c.analysis.correlation_csv);
  if (!in) throw std::runtime_error("cannot open " + c.analysis.correlation_csv);
  std::string line;
  std::getline(in, line);
  if (line.rfind("series,r_lo,r_hi,r,value,error", 0) != 0) throw std::runtime_error("unexpected correlation CSV header");
  std::vector<double> r, v, e;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string name, cell;
    std::getline(ss, name, ',');
    if (name != c.analysis.series) continue;
    std::vector<double> cols;
    while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
    if (cols.size() != 5) throw std::runtime_error("malformed correlation CSV row");
    r.push_back(cols[2]);
    v.push_back(cols[3]);
    e.push_back(cols[4]);
  }
  if (r.empty()) {
    err << "platelat: no bins for series '" << c.analysis.series << "'\n";
    return kExitStatistics;
  }
  const DecayFit fit = fit_decay(r, v, e);
  json j = {{"format_version", kReportFormatVersion},
            {"series", c.analysis.series},
            {"measurable", fit.measurable},
            {"result", fit.measurable ? "decay-fitted" : "no-decay-measurable"},
            {"reason", fit.reason},
            {"bins_used", fit.bins_used},
            {"noise_floor", fit.noise_floor}};
  if (fit.measurable) {
    j["xi"] = fit.xi;
    j["xi_error"] = fit.xi_error;
    j["amplitude"] = fit.amplitude;
    j["window"] = {fit.window_lo, fit.window_hi};
    j["residuals"] = fit.residuals;
  }
  write_json(out / "fit.json", j);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& err) {
  CLI::App app{"Hard-plate simulation and analysis toolkit", "platelat"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "Run the grand-canonical sampler and optional analysis passes"},
      {"virial", "Excluded volumes, scaling classes and low-order log Z cross-checks"},
      {"contours", "Bad regions and contours of snapshot files"},
      {"pebbles", "Pebble classification of the occupied blocks of snapshot files"},
      {"polymer-check", "Cluster expansion of polymer models against exact enumeration"},
      {"fit-decay", "Exponential fit of a truncated correlation function"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--config", config_path, "Run configuration (JSON)")->required();
    s->add_option("--out", out_dir, "Output directory")->required();
    s->add_option("--seed", seed, "Override run.seed");
    subs.push_back(s);
  }
  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    err << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "platelat: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    RunConfig c = load_config(config_path);
    if (seed) c.run.seed = *seed;
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const std::string& name = commands[i].first;
      if (name == "simulate") return cmd_simulate(c, out, err);
      if (name == "virial") return cmd_virial(c, out, err);
      if (name == "contours") return cmd_contours(c, out, err);
      if (name == "pebbles") return cmd_pebbles(c, out, err);
      if (name == "polymer-check") return cmd_polymer_check(c, out, err);
      if (name == "fit-decay") return cmd_fit_decay(c, out, err);
    }
  } catch (const ConfigError& e) {
    err << "platelat: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const LatticeError& e) {
    err << "platelat: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const HardCoreViolation& e) {
    err << "platelat: invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const PlateSetError& e) {
    err << "platelat: invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const PlateSetError& e) {
    err << "platelat: invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const InsufficientSamples& e) {
    err << "platelat: insufficient statistics: " << e.what() << '\n';
    return kExitStatistics;
  } catch (const std::exception& e) {
    err << "platelat: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace platelat
