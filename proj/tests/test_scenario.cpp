#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "shield/errors.hpp"
#include "shield/scenario.hpp"

using namespace shield;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& name) : path(fs::temp_directory_path() / name) {}
  ~TempFile() { std::remove(path.string().c_str()); }
};

}  // namespace

TEST_CASE("bundled default file loads as a 16x5 fleet") {
  const Scenario sc = load_scenario(fs::path(SHIELD_DATA_DIR) / "default_scenario.json");
  CHECK(sc.site_count() == 16);
  CHECK(sc.workload_count() == 5);
  CHECK(sc.epoch_count == 24);
}

TEST_CASE("bundled default file equals the generator output") {
  const std::string bundled = slurp(fs::path(SHIELD_DATA_DIR) / "default_scenario.json");
  CHECK(bundled == scenario_to_json_text(default_scenario(16, 5, 42)));
}

TEST_CASE("negative cop is rejected with the field path") {
  Scenario sc = default_scenario(2, 2, 1);
  sc.datacenters[1].cop = -1.0;
  try {
    validate(sc);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("datacenters[1].cop") != std::string::npos);
  }
}

TEST_CASE("empty workload list is rejected") {
  Scenario sc = default_scenario(2, 2, 1);
  sc.workloads.clear();
  CHECK_THROWS_AS(validate(sc), ValidationError);
}

TEST_CASE("unknown fields are rejected") {
  const Scenario sc = default_scenario(2, 2, 1);
  std::string text = scenario_to_json_text(sc);
  text.insert(text.find("\"label\""), "\"surprise\": 1,\n  ");
  CHECK_THROWS_AS(scenario_from_json_text(text), ValidationError);
}

TEST_CASE("malformed json raises ParseError") {
  CHECK_THROWS_AS(scenario_from_json_text("{ not json"), ParseError);
}

TEST_CASE("demand beyond fleet capacity is rejected") {
  Scenario sc = default_scenario(2, 1, 1);
  sc.workloads[0].gar = Array::Constant(24, 1e9);
  CHECK_THROWS_AS(validate(sc), ValidationError);
}

TEST_CASE("premium and contract regimes are mutually exclusive") {
  Scenario sc = default_scenario(2, 1, 2);
  for (auto& dc : sc.datacenters) {
    dc.annual_contract = true;
    dc.contract_price = 0.15;
    dc.premium_available = true;
    dc.premium_price = 0.05;
  }
  CHECK_THROWS_AS(validate(sc), ValidationError);
}

TEST_CASE("non-positive prices are rejected") {
  Scenario sc = default_scenario(2, 1, 2);
  sc.datacenters[0].tou[7] = 0.0;
  CHECK_THROWS_AS(validate(sc), ValidationError);

  Scenario sc2 = default_scenario(2, 1, 2);
  sc2.datacenters[1].premium_price = 0.05;  // without premium_available
  sc2.datacenters[1].premium_available = false;
  if (sc2.datacenters[1].annual_contract) {
    sc2.datacenters[1].annual_contract = false;
    sc2.datacenters[1].contract_price = 0.0;
  }
  CHECK_THROWS_AS(validate(sc2), ValidationError);
}

TEST_CASE("generator is deterministic") {
  const Scenario a = default_scenario(16, 5, 42);
  const Scenario b = default_scenario(16, 5, 42);
  CHECK(scenario_to_json_text(a) == scenario_to_json_text(b));
  const Scenario c = default_scenario(16, 5, 43);
  CHECK(scenario_to_json_text(a) != scenario_to_json_text(c));
}

TEST_CASE("generated parameters stay inside the documented ranges") {
  const Scenario sc = default_scenario(16, 5, 7);
  int premium_sites = 0, contract_sites = 0;
  for (const auto& dc : sc.datacenters) {
    CHECK(dc.cop >= 3.75);
    CHECK(dc.cop <= 5.72);
    CHECK(dc.ewif >= 0.0);
    CHECK(dc.ewif <= 3.97);
    CHECK(dc.cf >= 99.7);
    CHECK(dc.cf <= 775.0);
    for (int e = 0; e < 24; ++e) {
      CHECK(dc.tou[e] >= 0.018);
      CHECK(dc.tou[e] <= 0.48);
    }
    if (dc.premium_available) {
      ++premium_sites;
      CHECK(dc.premium_price >= 0.0039);
      CHECK(dc.premium_price <= 0.14);
    }
    if (dc.annual_contract) {
      ++contract_sites;
      CHECK(dc.contract_price == 0.15);
    }
    CHECK(dc.node_count() == 4320);
    CHECK(dc.nodes.size() == 3);
    for (const auto& nt : dc.nodes) {
      for (int j = 0; j < 5; ++j) {
        CHECK(nt.active_power[j] >= nt.idle_power);
        CHECK(nt.exec_time[j] > 0.0);
      }
    }
  }
  CHECK(contract_sites == 1);
  CHECK(premium_sites >= 1);
}

TEST_CASE("every generated scenario passes validation") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 99ull}) {
    CHECK_NOTHROW(validate(default_scenario(4, 3, seed)));
    CHECK_NOTHROW(validate(default_scenario(1, 1, seed)));
  }
}

TEST_CASE("under-subscription headroom holds at every epoch") {
  const Scenario sc = default_scenario(8, 4, 11);
  double fleet_nodes = 0.0;
  for (const auto& dc : sc.datacenters) fleet_nodes += dc.node_count();
  for (int e = 0; e < 24; ++e) {
    double worst_nodes = 0.0;
    for (int j = 0; j < sc.workload_count(); ++j) {
      double max_exec = 0.0;
      for (const auto& dc : sc.datacenters) {
        for (const auto& nt : dc.nodes) max_exec = std::max(max_exec, nt.exec_time[j]);
      }
      worst_nodes += sc.workloads[j].gar[e] * max_exec;
    }
    CHECK(worst_nodes <= 0.6 * fleet_nodes * (1.0 + 1e-9));
  }
}

TEST_CASE("save/load round-trip is byte-identical for canonical files") {
  const Scenario sc = default_scenario(3, 2, 5);
  TempFile f("shield_roundtrip_scenario.json");
  save_scenario(sc, f.path);
  const std::string canonical = slurp(f.path);

  const Scenario loaded = load_scenario(f.path);
  TempFile g("shield_roundtrip_scenario2.json");
  save_scenario(loaded, g.path);
  CHECK(slurp(g.path) == canonical);
}

TEST_CASE("epoch_demand returns the per-epoch GAR vector") {
  const Scenario sc = default_scenario(2, 3, 9);
  const Vector gar = epoch_demand(sc, 0);
  REQUIRE(gar.size() == 3);
  for (int j = 0; j < 3; ++j) CHECK(gar[j] == sc.workloads[j].gar[0]);

  const Vector zero_check = epoch_demand(sc, 23);
  CHECK(zero_check.size() == 3);
  CHECK_THROWS_AS(epoch_demand(sc, 24), std::out_of_range);
  CHECK_THROWS_AS(epoch_demand(sc, -1), std::out_of_range);
}

TEST_CASE("zero-demand epochs are representable") {
  Scenario sc = default_scenario(2, 2, 3);
  sc.workloads[0].gar[5] = 0.0;
  sc.workloads[1].gar[5] = 0.0;
  CHECK_NOTHROW(validate(sc));
  CHECK(epoch_demand(sc, 5).sum() == 0.0);
}
