#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "platelat/gcmc.hpp"
#include "platelat/geometry.hpp"
#include "platelat/rng.hpp"

using namespace platelat;

TEST_SUITE("gcmc") {
  TEST_CASE("order parameter") {
    CHECK(order_parameter({0, 0, 0, 0, 5, 7}) == doctest::Approx(1.0));
    CHECK(order_parameter({3, 3, 3, 3, 3, 3}) == doctest::Approx(0.0));
    CHECK(order_parameter({8, 0, 2, 0, 2, 0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(order_parameter({0, 0, 0, 0, 0, 0}), std::domain_error);
  }

  TEST_CASE("run parameters are validated") {
    RunParams r;
    r.z = 0.1;
    CHECK_NOTHROW(r.validate());
    r.move_weights = MoveWeights{0.4, 0.3, 0.2, 0.1};
    CHECK_THROWS(r.validate());
    r.move_weights = MoveWeights{0.3, 0.3, 0.2, 0.1};
    CHECK_THROWS(r.validate());
    r.move_weights = {};
    r.boundary_q = 4;
    CHECK_THROWS(r.validate());
  }

  TEST_CASE("acceptance probabilities") {
    const ModelParams p(4.0, 0.8);
    RunParams r;
    r.z = 0.002;
    Sampler s(p, SimBox{10.0, BoundaryMode::open}, r);
    const double x = 6 * 0.002 * 1000.0;  // 6 z |box| = 12
    CHECK(s.delete_acceptance(1) == doctest::Approx(1.0 / x));
    CHECK(s.insert_acceptance(0) == doctest::Approx(1.0));
    CHECK(s.insert_acceptance(23) == doctest::Approx(12.0 / 24.0));
  }

  TEST_CASE("z = 0 empties the box") {
    const ModelParams p(4.0, 0.8);
    RunParams r;
    r.z = 0.0;
    r.move_weights = MoveWeights{0.5, 0.5, 0.0, 0.0};
    Sampler s(p, SimBox{20.0, BoundaryMode::open}, r);
    Philox rng(1);
    for (int i = 0; i < 30; ++i) {
      s.state().try_insert(Plate{{rng.uniform(0, 20), rng.uniform(0, 20), rng.uniform(0, 20)}, Orientation{2, false}});
    }
    REQUIRE(s.state().size() > 0);
    for (int i = 0; i < 2000; ++i) s.step();
    CHECK(s.state().size() == 0);
    CHECK(s.counters().accepted[0] == 0);
  }

  TEST_CASE("two-state box matches the exact Gibbs occupancy") {
    // side 0.5: any two plates overlap, so N is 0 or 1 and P(1) = 6 z V / (1 + 6 z V)
    const ModelParams p(4.0, 0.8);
    RunParams r;
    r.z = 2.0;
    r.sweeps = 200000;
    r.seed = 12;
    const SimBox box{0.5, BoundaryMode::open};
    Sampler s(p, box, r);
    auto out = s.run([](const PlateSet& st, const Sample&) { REQUIRE(st.size() <= 1); });
    const auto e = out.observables.estimate([](const Sample& x) { return static_cast<double>(x.total()); });
    const double x = 6 * 2.0 * box.volume();
    CHECK(std::abs(e.mean - x / (1 + x)) < 3 * e.error);
  }

  TEST_CASE("ideal gas density is 6 z") {
    const ModelParams p(4.0, 0.8);
    RunParams r;
    r.z = 0.01;
    r.sweeps = 20000;
    r.hard_core = false;
    const SimBox box{20.0, BoundaryMode::periodic};
    Sampler s(p, box, r);
    const auto out = s.run();
    const auto d = out.observables.total_density(box.volume());
    CHECK(std::abs(d.mean - 0.06) < 3 * d.error);
  }

  TEST_CASE("zero sweeps, determinism and stream independence") {
    const ModelParams p(4.0, 0.8);
    RunParams r;
    r.z = 0.01;
    const SimBox box{16.0, BoundaryMode::periodic};
    {
      Sampler s(p, box, r);
      CHECK(s.run().observables.empty());
    }
    r.sweeps = 300;
    r.snapshot_stride = 50;
    auto render = [&](std::uint64_t seed) {
      RunParams rr = r;
      rr.seed = seed;
      Sampler s(p, box, rr);
      const auto out = s.run();
      std::ostringstream os;
      write_observables_header(os);
      for (const auto& [c, series] : out.observables.chains()) {
        for (const auto& smp : series) write_observable_row(os, smp);
      }
      for (const auto& snap : out.snapshots) write_snapshot(os, snap);
      return os.str();
    };
    CHECK(render(5) == render(5));
    CHECK(render(5) != render(6));
  }

  TEST_CASE("sample schedule follows burn-in and stride") {
    const ModelParams p(4.0, 0.8);
    RunParams r;
    r.z = 0.01;
    r.sweeps = 100;
    r.sample_stride = 4;
    r.snapshot_stride = 10;
    Sampler s(p, SimBox{16.0, BoundaryMode::open}, r);
    const auto out = s.run();
    CHECK(out.observables.sample_count() == 20);  // sweeps 20..99, every 4th
    CHECK(out.snapshots.size() == 8);
    CHECK(out.observables.chains().at(0).front().sweep == 20);
  }

  TEST_CASE("two seeds agree at low z") {
    const ModelParams p(4.0, 0.8);
    const SimBox box{24.0, BoundaryMode::periodic};
    ObservableAccumulator a, b;
    for (std::uint64_t seed : {1u, 2u}) {
      RunParams r;
      r.z = 0.002;
      r.sweeps = 4000;
      r.seed = seed;
      r.stream = seed;
      Sampler s(p, box, r);
      (seed == 1 ? a : b).merge(s.run().observables);
    }
    const auto da = a.total_density(box.volume()), db = b.total_density(box.volume());
    CHECK(std::abs(da.mean - db.mean) < 3 * std::hypot(da.error, db.error));
    ObservableAccumulator ab = a, ba = b;
    ab.merge(b);
    ba.merge(a);
    CHECK(ab.total_density(1.0).mean == ba.total_density(1.0).mean);
    CHECK_THROWS(ab.merge(a));
  }

  TEST_CASE("boundary condition keeps the layer single-typed") {
    const ModelParams p(4.0, 0.8);
    RunParams r;
    r.z = 0.03;
    r.sweeps = 200;
    r.boundary_q = 2;
    r.boundary_depth = 3;
    r.snapshot_stride = 5;
    const SimBox box{40.0, BoundaryMode::open};
    Sampler s(p, box, r);
    const auto out = s.run();
    std::size_t inner_other = 0;
    for (const auto& snap : out.snapshots) {
      for (const auto& q : snap.plates) {
        int d = 1000;
        for (int i = 0; i < 3; ++i) {
          const int b = static_cast<int>(q.center[i] / 2.0);
          d = std::min({d, b + 1, 20 - b});
        }
        if (d <= 3) REQUIRE(q.orientation.type() == 2);
        if (d > 3 && q.orientation.type() != 2) ++inner_other;
      }
    }
    CHECK(inner_other > 0);
  }

  TEST_CASE("pair correlation") {
    const ModelParams p(4.0, 0.8);
    const SimBox box{24.0, BoundaryMode::periodic};
    SUBCASE("ideal gas is uncorrelated") {
      RunParams r;
      r.z = 0.005;
      r.sweeps = 3000;
      r.hard_core = false;
      r.snapshot_stride = 5;
      Sampler s(p, box, r);
      const auto out = s.run();
      const auto pc = pair_correlation(out.snapshots, 8, 8.0);
      int outliers = 0, bins = 0;
      for (const auto& [key, series] : pc.series) {
        for (std::size_t b = 0; b < series.value.size(); ++b) {
          ++bins;
          outliers += std::abs(series.value[b]) > 3 * series.error[b];
        }
      }
      CHECK(outliers <= bins / 50 + 2);
      const auto& tot = pc.series.at(PairCorrelation::kTotal);
      for (std::size_t b = 0; b < tot.value.size(); ++b) CHECK(std::abs(tot.value[b]) < 3.5 * tot.error[b]);
    }
    SUBCASE("hard core gives -rho^2 below contact") {
      // every pair closer than 1 in sup norm overlaps, whatever the orientations
      RunParams r;
      r.z = 0.004;
      r.sweeps = 3000;
      r.snapshot_stride = 5;
      Sampler s(p, box, r);
      const auto out = s.run();
      const auto pc = pair_correlation(out.snapshots, 12, 12.0);
      const double rho = out.observables.total_density(box.volume()).mean;
      const auto& tot = pc.series.at(PairCorrelation::kTotal);
      CHECK(std::abs(tot.value[0] + rho * rho) < 3 * tot.error[0] + 1e-3 * rho * rho);
      CHECK(tot.value[0] < 0.0);
    }
    SUBCASE("too few snapshots") {
      CHECK_THROWS_AS(pair_correlation({}, 4, 4.0), InsufficientSamples);
      Snapshot one;
      one.k = 4;
      one.alpha = 0.8;
      one.L = 24;
      CHECK_THROWS_AS(pair_correlation({one}, 4, 4.0), InsufficientSamples);
    }
  }

  TEST_CASE("shell measure of an open box integrates to the pair measure") {
    const SimBox box{5.0, BoundaryMode::open};
    CHECK(pair_shell_measure(box, 0.0, 5.0) == doctest::Approx(std::pow(box.volume(), 2)));
    // Monte Carlo oracle for one shell
    Philox rng(6);
    const int n = 400000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
      double d = 0.0;
      for (int a = 0; a < 3; ++a) d = std::max(d, std::abs(rng.uniform(0, 5) - rng.uniform(0, 5)));
      hits += d >= 1.0 && d < 2.0;
    }
    const double f = static_cast<double>(hits) / n;
    CHECK(pair_shell_measure(box, 1.0, 2.0) ==
          doctest::Approx(f * std::pow(box.volume(), 2)).epsilon(4 * std::sqrt(f * (1 - f) / n) / f));
  }

  TEST_CASE("decay fit") {
    const double k = 4.0, xi0 = 2 * k, A = 0.01;
    Philox rng(10);
    std::vector<double> r, v, e;
    for (int i = 0; i < 30; ++i) {
      const double x = 0.5 * k * (i + 0.5);
      const double clean = A * std::exp(-x / xi0);
      r.push_back(x);
      v.push_back(clean * (1 + 0.05 * rng.normal()));
      e.push_back(0.05 * clean);
    }
    const auto fit = fit_decay(r, v, e);
    REQUIRE(fit.measurable);
    CHECK(std::abs(fit.xi - xi0) < 0.1 * xi0);
    CHECK(fit.amplitude > 0.0);

    std::vector<double> noise;
    for (int i = 0; i < 30; ++i) noise.push_back(1e-3 * rng.normal());
    const auto nf = fit_decay(r, noise, std::vector<double>(30, 1e-3));
    CHECK_FALSE(nf.measurable);
    CHECK(nf.reason.find("no-decay-measurable") != std::string::npos);
    CHECK_THROWS_AS(fit_decay({}, {}, {}), std::invalid_argument);
  }

  TEST_CASE("block and dipole ratios at small z") {
    const ModelParams p(4.0, 0.8);
    SUBCASE("ratio vanishes like z^2") {
      const auto a = estimate_block_ratio(p, 1e-4, 4.0, 4000, RatioMode::quadrature, 3);
      const auto b = estimate_block_ratio(p, 2e-4, 4.0, 4000, RatioMode::quadrature, 3);
      CHECK(b.value / a.value == doctest::Approx(4.0).epsilon(0.02));
    }
    SUBCASE("sampler agrees with quadrature on a tiny block") {
      const double z = 0.0007;  // 6 z |block| ~ 0.27
      const auto q = estimate_block_ratio(p, z, 4.0, 20000, RatioMode::quadrature, 5);
      const auto s = estimate_block_ratio(p, z, 4.0, 400000, RatioMode::sampler, 5);
      CHECK(std::abs(q.value - s.value) < 3 * std::hypot(q.error, s.error) + q.remainder);
    }
    SUBCASE("dipole sampler agrees with quadrature") {
      const double z = 0.0003;
      const auto q = estimate_dipole_ratio(p, z, 4.0, 20000, RatioMode::quadrature, 5);
      const auto s = estimate_dipole_ratio(p, z, 4.0, 400000, RatioMode::sampler, 5);
      CHECK(std::abs(q.value - s.value) < 3 * std::hypot(q.error, s.error) + q.remainder);
    }
    SUBCASE("quadrature refuses large activities") {
      CHECK_THROWS_AS(estimate_block_ratio(p, 0.05, 4.0, 1000, RatioMode::quadrature, 1), IncompatibleMode);
    }
  }
}
