#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shield/model.hpp"
#include "shield/types.hpp"

namespace shield {

struct WorkloadSpec {
  std::string id;
  std::string category;  // "offline analytics" | "artificial intelligence"
  Array gar;             // 24 hourly global arrival rates, jobs/hour
};

struct Scenario {
  std::string label;
  std::uint64_t rng_seed = 0;
  double free_cooling_cop = kDefaultFreeCoolingCop;
  std::vector<DataCenterSpec> datacenters;
  std::vector<WorkloadSpec> workloads;
  int epoch_count = kEpochsPerDay;

  int site_count() const { return static_cast<int>(datacenters.size()); }
  int workload_count() const { return static_cast<int>(workloads.size()); }
};

// Throws ValidationError naming the offending field path.
void validate(const Scenario& scenario);

// Load + full validation. Unknown fields are rejected.
Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_json_text(const std::string& text);

// Canonical serialization: save(load(x)) is byte-identical for files that
// were produced by save.
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);
std::string scenario_to_json_text(const Scenario& scenario);

// Synthetic fleet spanning the documented parameter ranges: per-site CoP,
// EWIF, CF, peak/off-peak TOU shape, a premium subset, exactly one
// annual-contract site, a free-cooling subset with diurnal weather, three
// node types summing to 4320 nodes, and diurnal workload arrival curves
// sized for at most 60% worst-case fleet utilization. Deterministic per seed.
Scenario default_scenario(int d, int t, std::uint64_t seed);

// GAR vector for one epoch (jobs/hour per workload type).
Vector epoch_demand(const Scenario& scenario, int epoch);

}  // namespace shield
