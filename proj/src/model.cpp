#include "shield/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shield/encoding.hpp"
#include "shield/errors.hpp"
#include "shield/scenario.hpp"

namespace shield {

PartialSchedule schedule_local_partial(const DataCenterSpec& dc, const Vector& local_rates) {
  const int types = static_cast<int>(dc.nodes.size());
  const int workloads = static_cast<int>(local_rates.size());
  PartialSchedule out;
  out.roster.active = Eigen::MatrixXi::Zero(types, workloads);
  out.unabsorbed = Vector::Zero(workloads);

  std::vector<int> free_nodes(types);
  for (int k = 0; k < types; ++k) free_nodes[k] = dc.nodes[k].count;

  std::vector<int> order(types);
  for (int j = 0; j < workloads; ++j) {
    double remaining = local_rates[j];
    if (remaining <= 0.0) continue;
    const double tol = kRateTol * std::max(1.0, local_rates[j]);

    // Fastest node types first for this workload; ties broken by index.
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return dc.nodes[a].exec_time[j] < dc.nodes[b].exec_time[j];
    });

    for (int k : order) {
      if (remaining <= tol) break;
      if (free_nodes[k] == 0) continue;
      const double exec = dc.nodes[k].exec_time[j];
      const double capacity = free_nodes[k] / exec;  // jobs/hour
      const double take = std::min(remaining, capacity);
      int used = static_cast<int>(std::ceil(take * exec - 1e-9));
      used = std::clamp(used, take > 0.0 ? 1 : 0, free_nodes[k]);
      out.roster.active(k, j) = used;
      free_nodes[k] -= used;
      remaining -= take;
    }
    out.unabsorbed[j] = remaining > tol ? remaining : 0.0;
  }
  return out;
}

Roster schedule_local(const DataCenterSpec& dc, const Vector& local_rates) {
  PartialSchedule ps = schedule_local_partial(dc, local_rates);
  for (int j = 0; j < ps.unabsorbed.size(); ++j) {
    if (ps.unabsorbed[j] > 0.0) {
      throw CapacityExceeded("site " + dc.id + " cannot absorb " +
                             std::to_string(ps.unabsorbed[j]) + " jobs/h of workload " +
                             std::to_string(j));
    }
  }
  return ps.roster;
}

double it_power(const Roster& roster, const DataCenterSpec& dc) {
  double p = 0.0;
  for (int k = 0; k < static_cast<int>(dc.nodes.size()); ++k) {
    const NodeTypeSpec& nt = dc.nodes[k];
    int active_k = 0;
    for (int j = 0; j < roster.active.cols(); ++j) {
      p += roster.active(k, j) * nt.active_power[j];
      active_k += roster.active(k, j);
    }
    p += (nt.count - active_k) * nt.idle_power;
  }
  return p;
}

std::pair<double, bool> cooling_power(double p_it, const DataCenterSpec& dc, int epoch,
                                      double free_cooling_cop) {
  const bool free_ok = dc.free_cooling_available &&
                       dc.temperature[epoch] < kFreeCoolingMaxTempF &&
                       dc.dew_point[epoch] < kFreeCoolingMaxDewF;
  if (free_ok) return {p_it / free_cooling_cop, true};
  const double p_crac = p_it / dc.cop;
  return {3.0 * p_crac, false};
}

double ipcs_power(double p_it) { return kIpcsFactor * p_it; }

std::pair<double, double> water_site(double e_it, const DataCenterSpec& dc,
                                     bool free_cooling_active) {
  if (free_cooling_active) return {0.0, 0.0};
  const double v_e = e_it / kWaterLatentHeatKwhPerL;
  const double v_b = v_e / (dc.concentration_cycle - 1.0);
  return {v_e, v_b};
}

double water_source(double e_brown, const DataCenterSpec& dc) { return e_brown * dc.ewif; }

std::pair<double, double> carbon_site(double e_brown, double v_e, double v_b, double v_s,
                                      const DataCenterSpec& dc) {
  const double m_electricity = e_brown * dc.cf / 1000.0;  // g/kWh -> kg
  const double treatment_kwh = ((v_b + v_e) * kPotableIntensityKwhPerMl +
                                v_s * kWastewaterIntensityKwhPerMl) /
                               1e6;  // volumes are L; intensities per ML
  const double m_water = treatment_kwh * dc.cf / 1000.0;
  return {m_electricity, m_water};
}

CostSplit energy_cost(double e_total, double rho, const DataCenterSpec& dc, int epoch) {
  if (dc.annual_contract) {
    return {e_total * dc.contract_price, 0.0, e_total};
  }
  if (rho > 0.0 && !dc.premium_available) {
    throw InvalidPremium("rho=" + std::to_string(rho) + " on site " + dc.id +
                         " without premium or contract");
  }
  CostSplit split;
  split.e_clean = rho * e_total;
  split.e_brown = (1.0 - rho) * e_total;
  split.cost = e_total * dc.tou[epoch] + split.e_clean * dc.premium_price;
  return split;
}

Evaluation evaluate(const Assignment& assignment, const Scenario& scenario, int epoch) {
  Evaluation ev;
  const int d = static_cast<int>(scenario.datacenters.size());
  ev.sites.reserve(d);
  for (int i = 0; i < d; ++i) {
    const DataCenterSpec& dc = scenario.datacenters[i];
    const Vector local_rates = assignment.rates.row(i);

    const Roster roster = schedule_local(dc, local_rates);
    SiteBreakdown b;
    b.dc_id = dc.id;
    b.p_it = it_power(roster, dc);
    std::tie(b.p_cooling, b.free_cooling_active) =
        cooling_power(b.p_it, dc, epoch, scenario.free_cooling_cop);
    b.p_ipcs = ipcs_power(b.p_it);

    // One-hour epochs: kW and kWh coincide numerically.
    const double e_it = b.p_it;
    b.energy_total = b.p_it + b.p_cooling + b.p_ipcs;

    const CostSplit split = energy_cost(b.energy_total, assignment.rho[i], dc, epoch);
    b.cost = split.cost;
    b.energy_brown = split.e_brown;
    b.energy_clean = split.e_clean;

    std::tie(b.v_e, b.v_b) = water_site(e_it, dc, b.free_cooling_active);
    b.v_s = water_source(b.energy_brown, dc);
    std::tie(b.m_electricity, b.m_water) = carbon_site(b.energy_brown, b.v_e, b.v_b, b.v_s, dc);

    ev.total += ObjectiveVector{b.cost, b.carbon(), b.water()};
    ev.sites.push_back(std::move(b));
  }
  return ev;
}

}  // namespace shield
