#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "platelat/cli.hpp"
#include "platelat/config.hpp"
#include "platelat/snapshot.hpp"

using namespace platelat;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("platelat_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& cmd, const fs::path& config, const fs::path& out, std::string* log = nullptr) {
  std::ostringstream err;
  const int rc = run_cli({"platelat", cmd, "--config", config.string(), "--out", out.string()}, err);
  if (log) *log = err.str();
  return rc;
}

const char* kMinimal = R"({"format_version":1,"model":{"k":4,"alpha":0.8},"box":{"L":44,"mode":"open"},"run":{"z":0.01,"sweeps":0}})";

fs::path snapshot_file(const fs::path& dir, const Snapshot& s) {
  const fs::path p = dir / "snaps.jsonl";
  std::ofstream f(p);
  write_snapshot(f, s);
  return p;
}

fs::path config_with_snapshots(const fs::path& dir, const fs::path& snaps) {
  json c = json::parse(kMinimal);
  c["analysis"] = {{"snapshots", {snaps.string()}}};
  return write_file(dir / "c.json", c.dump());
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config round trip") {
    const auto a = parse_config_text(kMinimal);
    CHECK(a.model.k == 4.0);
    const json j = serialize_config(a);
    const auto b = parse_config(j);
    CHECK(a == b);
    CHECK(serialize_config(b) == j);
    json full = j;
    full["expansion"]["region"] = {{"lo", {0, 0, 0}}, {"hi", {3, 3, 3}}};
    full["expansion"]["orientations"] = {"3a", "1b"};
    full["analysis"]["r_max"] = 7.5;
    full["run"]["move_weights"] = {{"insert", 0.3}, {"delete", 0.3}, {"translate", 0.2}, {"reorient", 0.2}};
    const auto c = parse_config(full);
    CHECK(serialize_config(parse_config(serialize_config(c))) == serialize_config(c));
    CHECK(parse_config(serialize_config(c)) == c);
  }

  TEST_CASE("config rejections") {
    CHECK_THROWS_AS(parse_config_text(R"({"model":{"k":4,"alpha":0.8}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"format_version":2,"model":{"k":4,"alpha":0.8}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"format_version":1,"model":{"k":4,"alpha":0.8},"colour":1})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"format_version":1,"model":{"k":4,"alpha":0.8,"beta":1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"format_version":1,"model":{"k":4}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"format_version":1,"model":{"k":"4","alpha":0.8}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"format_version":1,"model":{"k":4,"alpha":1.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"format_version":1,"model":{"k":4,"alpha":0.8},"analysis":{"series":"3a+3b"}})"),
                    ConfigError);
  }

  TEST_CASE("exit codes for config errors") {
    const auto d = scratch("config");
    std::ostringstream err;
    CHECK(run_cli({"platelat", "simulate", "--out", d.string()}, err) == kExitConfig);
    CHECK(run_cli({"platelat", "bogus"}, err) == kExitConfig);
    CHECK(run("simulate", d / "missing.json", d / "o") == kExitConfig);
    const auto bad = write_file(d / "bad.json", R"({"format_version":1,"model":{"k":4,"alpha":0.8},"extra":0})");
    CHECK(run("simulate", bad, d / "o") == kExitConfig);
    const auto misfit = write_file(d / "misfit.json", R"({"format_version":1,"model":{"k":4,"alpha":0.8},"box":{"L":43}})");
    json c = json::parse(slurp(misfit));
    c["analysis"] = {{"contours", true}};
    write_file(misfit, c.dump());
    CHECK(run("simulate", misfit, d / "o") == kExitConfig);
  }

  TEST_CASE("zero sweeps give a header-only observables file") {
    const auto d = scratch("zero");
    const auto cfg = write_file(d / "c.json", kMinimal);
    REQUIRE(run("simulate", cfg, d / "o") == kExitOk);
    const auto text = slurp(d / "o" / "observables.csv");
    CHECK(text == "sweep,N,N_1a,N_1b,N_2a,N_2b,N_3a,N_3b,S,acc_insert,acc_delete,acc_translate,acc_reorient\n");
    CHECK(read_json(d / "o" / "summary.json").at("invariant_violations") == 0);
  }

  TEST_CASE("simulate is reproducible and the seed flag overrides the config") {
    const auto d = scratch("seed");
    json c = json::parse(kMinimal);
    c["run"]["sweeps"] = 30;
    const auto cfg = write_file(d / "c.json", c.dump());
    REQUIRE(run("simulate", cfg, d / "a") == kExitOk);
    REQUIRE(run("simulate", cfg, d / "b") == kExitOk);
    CHECK(slurp(d / "a" / "observables.csv") == slurp(d / "b" / "observables.csv"));
    std::ostringstream err;
    REQUIRE(run_cli({"platelat", "simulate", "--config", cfg.string(), "--out", (d / "c").string(), "--seed", "99"}, err) ==
            kExitOk);
    CHECK(slurp(d / "a" / "observables.csv") != slurp(d / "c" / "observables.csv"));
  }

  TEST_CASE("contours command") {
    const auto d = scratch("contours");
    // a snapshot file holding no snapshots
    write_file(d / "none.jsonl", "");
    const auto none_cfg = config_with_snapshots(d, d / "none.jsonl");
    REQUIRE(run("contours", none_cfg, d / "none") == kExitOk);
    CHECK(read_json(d / "none" / "contours.json").at("summary").at("snapshots") == 0);

    // k = 8: blocks of side 4, 22 per axis. One 3a plate per block with z offsets colored by
    // (i mod 2, j mod 2) keeps the sea overlap-free; block (10, 10, 10) is left empty.
    Snapshot s;
    s.k = 8;
    s.alpha = 0.8;
    s.L = 88;
    for (int i = 0; i < 22; ++i) {
      for (int j = 0; j < 22; ++j) {
        for (int l = 0; l < 22; ++l) {
          if (i == 10 && j == 10 && l == 10) continue;
          const double dz = 0.5 + 2.0 * (i % 2) + (j % 2);
          s.plates.push_back(Plate{{4.0 * i + 2.0, 4.0 * j + 2.0, 4.0 * l + dz}, parse_orientation("3a")});
        }
      }
    }
    const auto sea_cfg = config_with_snapshots(d, snapshot_file(d, s));
    REQUIRE(run("contours", sea_cfg, d / "sea") == kExitOk);
    const auto rep = read_json(d / "sea" / "contours.json");
    const auto& cs = rep.at("snapshots").at(0).at("contours");
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].at("holes") == 0);
    CHECK(cs[0].at("m_ext") == 3);
    CHECK(rep.at("snapshots").at(0).at("bad_blocks") == 27);
    CHECK(fs::exists(d / "sea" / "spins.jsonl"));

    // an empty box is bad everywhere and has no good exterior
    Snapshot e;
    e.k = 8;
    e.alpha = 0.8;
    e.L = 88;
    const auto empty_cfg = config_with_snapshots(d, snapshot_file(d, e));
    CHECK(run("contours", empty_cfg, d / "empty") == kExitInvariant);

    e.mode = BoundaryMode::periodic;
    const auto per_cfg = config_with_snapshots(d, snapshot_file(d, e));
    CHECK(run("contours", per_cfg, d / "per") == kExitConfig);
  }

  TEST_CASE("overlapping snapshot plates are an invariant violation") {
    const auto d = scratch("overlap");
    Snapshot s;
    s.k = 32;
    s.alpha = 0.8;
    s.L = 32;
    s.plates = {Plate{{1, 1, 1}, parse_orientation("1a")}, Plate{{2, 2, 2}, parse_orientation("2a")}};
    const auto cfg = config_with_snapshots(d, snapshot_file(d, s));
    std::string log;
    CHECK(run("pebbles", cfg, d / "o", &log) == kExitInvariant);
    CHECK(log.find("overlapping") != std::string::npos);
    CHECK(run("contours", cfg, d / "o2") == kExitInvariant);
  }

  TEST_CASE("pebbles command") {
    const auto d = scratch("pebbles");
    Snapshot s;
    s.k = 32;
    s.alpha = 0.8;
    s.L = 32;
    s.plates = {Plate{{2, 2, 2}, parse_orientation("3a")}, Plate{{2, 2, 3.5}, parse_orientation("3b")}};
    const auto cfg = config_with_snapshots(d, snapshot_file(d, s));
    REQUIRE(run("pebbles", cfg, d / "o") == kExitOk);
    CHECK(read_json(d / "o" / "pebbles.json").at("snapshots") == 1);
    s.k = 10;
    const auto bad = config_with_snapshots(d, snapshot_file(d, s));
    CHECK(run("pebbles", bad, d / "o2") == kExitConfig);
  }

  TEST_CASE("fit-decay") {
    const auto d = scratch("fit");
    std::ofstream f(d / "flat.csv");
    f << "series,r_lo,r_hi,r,value,error\n";
    for (int b = 0; b < 10; ++b) f << "total," << b << ',' << b + 1 << ',' << b + 0.5 << ",1e-9,0.01\n";
    f.close();
    json c = json::parse(kMinimal);
    c["analysis"] = {{"correlation_csv", (d / "flat.csv").string()}};
    const auto cfg = write_file(d / "c.json", c.dump());
    REQUIRE(run("fit-decay", cfg, d / "o") == kExitOk);
    const auto j = read_json(d / "o" / "fit.json");
    CHECK(j.at("result") == "no-decay-measurable");
    CHECK(j.at("measurable") == false);

    std::ofstream g(d / "decay.csv");
    g << "series,r_lo,r_hi,r,value,error\n";
    for (int b = 0; b < 12; ++b) g << "total," << b << ',' << b + 1 << ',' << b + 0.5 << ',' << std::exp(-(b + 0.5) / 2.0) << ",1e-5\n";
    g.close();
    c["analysis"]["correlation_csv"] = (d / "decay.csv").string();
    write_file(d / "c2.json", c.dump());
    REQUIRE(run("fit-decay", d / "c2.json", d / "o2") == kExitOk);
    const auto k = read_json(d / "o2" / "fit.json");
    CHECK(k.at("result") == "decay-fitted");
    CHECK(k.at("xi").get<double>() == doctest::Approx(2.0).epsilon(0.01));

    c["analysis"]["series"] = "3a-3b";
    write_file(d / "c3.json", c.dump());
    CHECK(run("fit-decay", d / "c3.json", d / "o3") == kExitStatistics);
  }

  TEST_CASE("polymer-check and virial") {
    const auto d = scratch("poly");
    json c = json::parse(kMinimal);
    c["expansion"] = {{"random_models", 3}, {"random_polymers", 10}, {"random_max_activity", 1e-3}};
    write_file(d / "c.json", c.dump());
    REQUIRE(run("polymer-check", d / "c.json", d / "o") == kExitOk);
    CHECK(read_json(d / "o" / "polymer_check.json").at("failures") == 0);
    c["expansion"] = {{"polymer_model", {{"format_version", 1}, {"dims", {4, 4, 4}}, {"polymers", {{{"blocks", {{1, 1, 1}}}, {"activity", 0.9}}}}}}};
    write_file(d / "c2.json", c.dump());
    CHECK(run("polymer-check", d / "c2.json", d / "o2") == kExitConfig);

    c = json::parse(kMinimal);
    c["model"] = {{"k", 32}, {"alpha", 0.8}};
    write_file(d / "v.json", c.dump());
    REQUIRE(run("virial", d / "v.json", d / "v") == kExitOk);
    const auto v = read_json(d / "v" / "virial.json");
    CHECK(v.at("hierarchy_ordered") == true);
    CHECK(fs::exists(d / "v" / "excluded_volume.csv"));
  }
}
