#include <doctest.h>

#include <cmath>
#include <numeric>

#include "platelat/expansion.hpp"
#include "platelat/geometry.hpp"
#include "platelat/rng.hpp"

using namespace platelat;

namespace {

OverlapGraph make_graph(int n, std::initializer_list<std::pair<int, int>> edges) {
  OverlapGraph g;
  g.n = n;
  g.adj.assign(static_cast<std::size_t>(n), 0u);
  for (auto [a, b] : edges) {
    g.adj[static_cast<std::size_t>(a)] |= 1u << b;
    g.adj[static_cast<std::size_t>(b)] |= 1u << a;
  }
  return g;
}

// Sum over edge subsets that connect all vertices of (-1)^|E|.
std::int64_t ursell_edge_subsets(const OverlapGraph& g) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < g.n; ++i) {
    for (int j = i + 1; j < g.n; ++j) {
      if (g.adj[static_cast<std::size_t>(i)] >> j & 1u) edges.emplace_back(i, j);
    }
  }
  std::int64_t sum = 0;
  for (std::uint64_t mask = 0; mask < (1ull << edges.size()); ++mask) {
    std::vector<int> parent(static_cast<std::size_t>(g.n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
      return x;
    };
    int comps = g.n;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (!(mask >> e & 1u)) continue;
      const int a = find(edges[e].first), b = find(edges[e].second);
      if (a != b) {
        parent[static_cast<std::size_t>(a)] = b;
        --comps;
      }
    }
    if (comps == 1) sum += (std::popcount(mask) % 2 == 0) ? 1 : -1;
  }
  return sum;
}

OverlapGraph random_graph(Philox& rng, int n, double p) {
  OverlapGraph g;
  g.n = n;
  g.adj.assign(static_cast<std::size_t>(n), 0u);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) {
        g.adj[static_cast<std::size_t>(i)] |= 1u << j;
        g.adj[static_cast<std::size_t>(j)] |= 1u << i;
      }
    }
  }
  return g;
}

// 1 + sum over pairwise compatible subsets, by direct subset enumeration.
double polymer_z_subsets(const PolymerModel& m) {
  const std::size_t n = m.size();
  double z = 0.0;
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    double w = 1.0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask >> i & 1u)) continue;
      w *= m.polymers()[i].activity;
      for (std::size_t j = i + 1; j < n && ok; ++j) {
        if ((mask >> j & 1u) && !m.compatible(i, j)) ok = false;
      }
    }
    if (ok) z += w;
  }
  return z;
}

}  // namespace

TEST_SUITE("expansion") {
  TEST_CASE("ursell of small graphs") {
    CHECK(ursell(make_graph(1, {})) == 1);
    CHECK(ursell(make_graph(2, {{0, 1}})) == -1);
    CHECK(ursell(make_graph(2, {})) == 0);
    CHECK(ursell(make_graph(3, {{0, 1}, {1, 2}, {0, 2}})) == 2);
    CHECK(ursell(make_graph(3, {{0, 1}, {1, 2}})) == 1);
    CHECK(ursell(make_graph(4, {{0, 1}, {2, 3}})) == 0);
    // complete graphs: (-1)^(n-1) (n-1)!
    for (int n = 1; n <= 8; ++n) {
      OverlapGraph g;
      g.n = n;
      g.adj.assign(static_cast<std::size_t>(n), 0u);
      for (int i = 0; i < n; ++i) g.adj[static_cast<std::size_t>(i)] = ((1u << n) - 1u) & ~(1u << i);
      std::int64_t f = 1;
      for (int i = 2; i < n; ++i) f *= i;
      CHECK(ursell(g) == ((n % 2 == 1) ? f : -f));
    }
  }

  TEST_CASE("ursell agrees with edge-subset enumeration") {
    Philox rng(5);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(6));
      const auto g = random_graph(rng, n, rng.uniform(0.2, 0.9));
      REQUIRE(ursell(g) == ursell_edge_subsets(g));
      CHECK((ursell(g) == 0) == !g.connected());
    }
  }

  TEST_CASE("ursell is invariant under relabeling") {
    Philox rng(8);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(6));
      const auto g = random_graph(rng, n, 0.5);
      std::vector<int> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = n - 1; i > 0; --i) std::swap(perm[static_cast<std::size_t>(i)], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
      OverlapGraph h;
      h.n = n;
      h.adj.assign(static_cast<std::size_t>(n), 0u);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (g.adj[static_cast<std::size_t>(i)] >> j & 1u) h.adj[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] |= 1u << perm[static_cast<std::size_t>(j)];
        }
      }
      CHECK(ursell(g) == ursell(h));
    }
  }

  TEST_CASE("ursell of plates") {
    const ModelParams p(8.0, 0.8);
    const Plate a{{0, 0, 0}, parse_orientation("3a")};
    const Plate b{{0, 0, 0.5}, parse_orientation("3a")};
    const Plate c{{50, 0, 0}, parse_orientation("3a")};
    CHECK(ursell(std::vector<Plate>{a}, p) == 1);
    CHECK(ursell(std::vector<Plate>{a, b}, p) == -1);
    CHECK(ursell(std::vector<Plate>{a, c}, p) == 0);
    CHECK(ursell(std::vector<Plate>{a, b, c}, p) == 0);
    OverlapGraph big;
    big.n = 11;
    big.adj.assign(11, 0u);
    CHECK_THROWS_AS(ursell(big), ExpansionError);
  }

  TEST_CASE("brute force ideal gas") {
    const ModelParams p(4.0, 0.8);
    const Region r{{0, 0, 0}, {3, 3, 3}};
    BruteForceOptions o;
    o.hard_core = false;
    const auto all = all_orientations();
    const auto s = brute_force_log_z(p, r, all, 0.01, 3, o);
    CHECK(s.value == doctest::Approx(6 * 0.01 * 27).epsilon(1e-12));
  }

  TEST_CASE("brute force with all pairs overlapping") {
    const ModelParams p(4.0, 0.8);
    const Region r{{0, 0, 0}, {0.5, 0.5, 0.5}};
    const auto one = orientations_of_type(3);
    const std::vector<Orientation> single{one[0]};
    const double z = 0.5, v = 0.125;
    const auto s = brute_force_log_z(p, r, single, z, 3);
    CHECK(s.value == doctest::Approx(std::log1p(z * v)).epsilon(1e-12));
    CHECK(s.stat_error == doctest::Approx(0.0));
  }

  TEST_CASE("brute force orders agree within the remainder") {
    const ModelParams p(4.0, 0.8);
    const Region r{{0, 0, 0}, {4, 4, 4}};
    const auto all = all_orientations();
    BruteForceOptions o;
    o.samples = 40000;
    o.tolerance = 1.0;
    const auto s2 = brute_force_log_z(p, r, all, 0.004, 2, o);
    const auto s3 = brute_force_log_z(p, r, all, 0.004, 3, o);
    CHECK(std::abs(s3.value - s2.value) <= s2.remainder + 3 * (s2.stat_error + s3.stat_error));
    CHECK(s3.remainder < s2.remainder);
    o.tolerance = 1e-12;
    CHECK_THROWS_AS(brute_force_log_z(p, r, all, 0.004, 2, o), ExpansionError);
  }

  TEST_CASE("mayer coefficients") {
    const ModelParams p(8.0, 0.8);
    const double L = 40.0;
    const ExpansionRegion per{Region{{0, 0, 0}, {L, L, L}}, true};
    const std::vector<Orientation> single{parse_orientation("3a")};
    const auto s = mayer_log_z(p, per, single, 1e-5, 2);
    REQUIRE(s.coefficients.size() == 2);
    const double V = L * L * L;
    CHECK(s.coefficients[0] == doctest::Approx(V));
    CHECK(s.coefficients[1] == doctest::Approx(-0.5 * V * 8.0 * std::pow(8.0, 1.8)));
    CHECK(mayer_density(s, 1e-5, V) == doctest::Approx((V * 1e-5 + 2 * s.coefficients[1] * 1e-10) / V));
    const auto s1 = mayer_log_z(p, per, single, 1e-5, 1);
    CHECK(s1.value == doctest::Approx(1e-5 * V));
    CHECK(s1.remainder > s.remainder);
    const auto big = mayer_log_z(p, per, all_orientations(), 0.5, 2);
    CHECK(std::isinf(big.remainder));
    CHECK(big.diagnostics.at("z_k_1_plus_alpha") == doctest::Approx(0.5 * std::pow(8.0, 1.8)));
    CHECK(big.diagnostics.at("z_k_squared") == doctest::Approx(32.0));
  }

  TEST_CASE("mayer and brute force agree on a small open region") {
    const ModelParams p(4.0, 0.8);
    const Region r{{0, 0, 0}, {3, 3, 3}};
    const auto all = all_orientations();
    const double z = 0.001;
    const auto m = mayer_log_z(p, ExpansionRegion{r, false}, all, z, 2);
    REQUIRE(std::isfinite(m.remainder));
    BruteForceOptions o;
    o.samples = 40000;
    const auto b = brute_force_log_z(p, r, all, z, 3, o);
    CHECK(std::abs(m.value - b.value) <= m.remainder + b.remainder + 3 * b.stat_error);
  }

  TEST_CASE("polymer partition functions") {
    const PolymerModel one({4, 4, 4}, {Polymer{{{1, 1, 1}}, 0.1}});
    CHECK(polymer_z_exact(one) == doctest::Approx(1.1));
    const PolymerModel apart({4, 4, 4}, {Polymer{{{0, 0, 0}}, 0.1}, Polymer{{{3, 0, 0}}, 0.2}});
    CHECK(apart.compatible(0, 1));
    CHECK(polymer_z_exact(apart) == doctest::Approx(1.1 * 1.2));
    const PolymerModel touching({4, 4, 4}, {Polymer{{{0, 0, 0}}, 0.1}, Polymer{{{1, 1, 1}}, 0.2}});
    CHECK_FALSE(touching.compatible(0, 1));
    CHECK(polymer_z_exact(touching) == doctest::Approx(1.3));
    CHECK_THROWS_AS(PolymerModel({4, 4, 4}, {Polymer{{{0, 0, 0}, {2, 0, 0}}, 0.1}}), ExpansionError);
    CHECK_THROWS_AS(PolymerModel({4, 4, 4}, {Polymer{{{4, 0, 0}}, 0.1}}), ExpansionError);
    CHECK(PolymerModel::d_connected({{0, 0, 0}, {1, 1, 1}}));
  }

  TEST_CASE("exact polymer Z matches subset enumeration") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto m = random_polymer_model({4, 4, 4}, 14, 3, 0.3, seed);
      REQUIRE(m.size() == 14);
      CHECK(polymer_z_exact(m) == doctest::Approx(polymer_z_subsets(m)).epsilon(1e-12));
    }
  }

  TEST_CASE("polymer ursell") {
    const PolymerModel m({4, 4, 4}, {Polymer{{{0, 0, 0}}, 0.1}, Polymer{{{3, 3, 3}}, 0.1}});
    const std::vector<std::size_t> same{0, 0, 0};
    CHECK(polymer_ursell(m, same) == 2);
    const std::vector<std::size_t> apart{0, 1};
    CHECK(polymer_ursell(m, apart) == 0);
  }

  TEST_CASE("cluster expansion of a single polymer") {
    const double k = 0.1;
    const PolymerModel m({4, 4, 4}, {Polymer{{{1, 1, 1}}, k}});
    const auto s = polymer_log_z_cluster(m, 3);
    CHECK(s.value == doctest::Approx(k - k * k / 2 + k * k * k / 3).epsilon(1e-13));
    CHECK(std::abs(std::log1p(k) - s.value) <= s.remainder);
    const PolymerModel zero({4, 4, 4}, {Polymer{{{1, 1, 1}}, 0.0}, Polymer{{{2, 2, 2}}, 0.0}});
    CHECK(polymer_log_z_cluster(zero, 4).value == 0.0);
    const PolymerModel strong({4, 4, 4}, {Polymer{{{1, 1, 1}}, 0.5}});
    CHECK_THROWS_AS(polymer_log_z_cluster(strong, 3), ExpansionError);
  }

  TEST_CASE("cluster expansion of random models is within its remainder") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto m = random_polymer_model({4, 4, 4}, 12, 3, 1e-3, seed);
      const auto s = polymer_log_z_cluster(m, 3);
      const double exact = std::log(polymer_z_exact(m));
      CHECK(std::abs(exact - s.value) <= s.remainder);
      CHECK(s.remainder < 1e-5);
      ++checked;
    }
    CHECK(checked == 20);
  }

  TEST_CASE("connected plate integrals") {
    const ModelParams p(8.0, 0.8);
    const Region S{{0, 0, 0}, {10, 10, 10}};
    const double z = 1e-4;
    const auto b1 = connected_plate_bound_check(p, S, 3, z, 1);
    REQUIRE(!b1.terms.empty());
    CHECK(b1.terms[0] == doctest::Approx(2 * z * 1000).epsilon(1e-14));
    CHECK(connected_plate_bound_check(p, S, 3, 0.0, 2).value == 0.0);
    const double za = 1e-5, zb = 4e-5;
    const auto a = connected_plate_bound_check(p, S, 3, za, 2);
    const auto b = connected_plate_bound_check(p, S, 3, zb, 2);
    const double slope = std::log(b.value / a.value) / std::log(zb / za);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
    // exact second-order term: (z^2 / 2) |S| sum of excluded volumes over the 2 x 2 type-3 pairs
    const auto t3 = orientations_of_type(3);
    double sum = 0.0;
    for (auto o : t3) {
      for (auto o2 : t3) sum += excluded_volume(o, o2, p);
    }
    CHECK(a.terms[0] == doctest::Approx(0.5 * za * za * 1000 * sum).epsilon(1e-12));
  }

  TEST_CASE("json round trips") {
    SeriesEstimate s;
    s.value = 0.25;
    s.order = 2;
    s.remainder = std::numeric_limits<double>::infinity();
    s.coefficients = {1.0, -2.0};
    s.diagnostics["x"] = 3.0;
    nlohmann::json j = s;
    const auto back = j.get<SeriesEstimate>();
    CHECK(back.value == s.value);
    CHECK(std::isinf(back.remainder));
    CHECK(back.coefficients == s.coefficients);
    CHECK(back.diagnostics == s.diagnostics);
    const auto m = random_polymer_model({4, 4, 4}, 10, 3, 0.01, 3);
    nlohmann::json jm = m;
    const auto m2 = jm.get<PolymerModel>();
    CHECK(nlohmann::json(m2) == jm);
    CHECK(polymer_z_exact(m2) == polymer_z_exact(m));
  }
}
