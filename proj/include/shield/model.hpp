#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "shield/types.hpp"

namespace shield {

struct Scenario;
struct Assignment;

// One heterogeneous node type at a site. active_power/exec_time carry one
// entry per workload type.
struct NodeTypeSpec {
  std::string id;
  int count = 0;
  double idle_power = 0.0;               // kW, drawn by a powered-on idle node
  std::vector<double> active_power;      // kW while running workload j
  std::vector<double> exec_time;         // hours per job of workload j
};

struct DataCenterSpec {
  std::string id;
  std::vector<NodeTypeSpec> nodes;
  double cop = 4.0;                  // mechanical cooling coefficient of performance
  double ewif = 0.0;                 // L of source water per brown kWh
  double cf = 500.0;                 // g CO2 per brown kWh
  double concentration_cycle = 5.0;  // dissolved-solids cycles before blowdown
  Array tou;                         // 24 hourly $/kWh
  bool premium_available = false;
  double premium_price = 0.0;        // $/kWh surcharge for clean energy
  bool annual_contract = false;
  double contract_price = 0.0;       // $/kWh, all-clean fixed-price supply
  bool free_cooling_available = false;
  Array temperature;                 // 24 hourly degF
  Array dew_point;                   // 24 hourly degF

  int node_count() const {
    int n = 0;
    for (const auto& nt : nodes) n += nt.count;
    return n;
  }
};

// P_IPCS as a fixed fraction of IT load.
constexpr double kIpcsFactor = 0.13;
// Latent heat of water at the tower operating point, kWh per liter evaporated.
constexpr double kWaterLatentHeatKwhPerL = 0.66;
// Energy intensity of potable water production / wastewater treatment, kWh/ML.
constexpr double kPotableIntensityKwhPerMl = 550.0;
constexpr double kWastewaterIntensityKwhPerMl = 640.0;
// Free air cooling is admissible below these outdoor limits.
constexpr double kFreeCoolingMaxTempF = 75.0;
constexpr double kFreeCoolingMaxDewF = 63.0;
// Effective COP of the fan-only free cooling path (overridable per scenario).
constexpr double kDefaultFreeCoolingCop = 20.0;

// Which nodes run what after local list scheduling: active(k, j) nodes of
// type k run workload j; the rest of type k sit idle.
struct Roster {
  Eigen::MatrixXi active;  // node types x workload types

  int active_of_type(int k) const { return active.row(k).sum(); }
  int total_active() const { return active.sum(); }
};

// Non-throwing scheduling result; unabsorbed[j] > 0 means the site ran out
// of nodes for workload j.
struct PartialSchedule {
  Roster roster;
  Vector unabsorbed;  // jobs/hour per workload type
};

// Greedy list scheduling: per workload type, consume node types in ascending
// exec_time order, rounding busy-node counts up (active nodes hold a full
// p-state regardless of fractional occupancy).
PartialSchedule schedule_local_partial(const DataCenterSpec& dc, const Vector& local_rates);

// Throwing variant; raises CapacityExceeded when demand cannot be absorbed.
Roster schedule_local(const DataCenterSpec& dc, const Vector& local_rates);

// Sum of active-node power plus idle-node power, kW.
double it_power(const Roster& roster, const DataCenterSpec& dc);

// Cooling power and whether the free path was taken. Mechanical cooling puts
// the CRAC at p_it / CoP and the full plant at three times that; free cooling
// runs fans only at p_it / free_cooling_cop.
std::pair<double, bool> cooling_power(double p_it, const DataCenterSpec& dc, int epoch,
                                      double free_cooling_cop = kDefaultFreeCoolingCop);

double ipcs_power(double p_it);

// Evaporative and blowdown volumes (L) driven by IT heat; zero in free mode.
std::pair<double, double> water_site(double e_it, const DataCenterSpec& dc,
                                     bool free_cooling_active);

// Source water of brown generation, L.
double water_source(double e_brown, const DataCenterSpec& dc);

// Electricity- and water-treatment carbon, kg.
std::pair<double, double> carbon_site(double e_brown, double v_e, double v_b, double v_s,
                                      const DataCenterSpec& dc);

struct CostSplit {
  double cost = 0.0;     // USD
  double e_brown = 0.0;  // kWh
  double e_clean = 0.0;  // kWh
};

// Applies the site's price regime: annual contract buys everything clean at
// the contract price; otherwise TOU on the full draw plus the premium
// surcharge on the rho-fraction bought clean.
CostSplit energy_cost(double e_total, double rho, const DataCenterSpec& dc, int epoch);

struct SiteBreakdown {
  std::string dc_id;
  double p_it = 0.0;           // kW
  double p_cooling = 0.0;      // kW
  double p_ipcs = 0.0;         // kW
  double energy_total = 0.0;   // kWh
  double energy_brown = 0.0;   // kWh
  double energy_clean = 0.0;   // kWh
  double v_e = 0.0;            // L evaporated
  double v_b = 0.0;            // L blowdown
  double v_s = 0.0;            // L source water
  double m_electricity = 0.0;  // kg CO2
  double m_water = 0.0;        // kg CO2
  double cost = 0.0;           // USD
  bool free_cooling_active = false;

  double water() const { return v_e + v_b + v_s; }
  double carbon() const { return m_electricity + m_water; }
};

struct Evaluation {
  ObjectiveVector total;
  std::vector<SiteBreakdown> sites;
};

// Pure per-epoch evaluation of one assignment over the whole fleet.
// Deterministic; throws CapacityExceeded / InvalidPremium on contract breaks.
Evaluation evaluate(const Assignment& assignment, const Scenario& scenario, int epoch);

}  // namespace shield
