#include "shield/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "shield/errors.hpp"
#include "shield/model.hpp"
#include "shield/scenario.hpp"

namespace shield {
namespace {

using Json = nlohmann::ordered_json;

double column_tol(double gar) { return kRateTol * std::max(1.0, gar); }

struct FleetSchedule {
  std::vector<PartialSchedule> sites;
  double total_leftover = 0.0;
};

FleetSchedule schedule_fleet(const Assignment& a, const Scenario& sc) {
  FleetSchedule out;
  out.sites.reserve(sc.site_count());
  for (int i = 0; i < sc.site_count(); ++i) {
    out.sites.push_back(schedule_local_partial(sc.datacenters[i], a.rates.row(i)));
    out.total_leftover += out.sites.back().unabsorbed.sum();
  }
  return out;
}

// Extra jobs/hour of workload j the site could still take, given the nodes
// its current roster leaves free.
double spare_rate(const DataCenterSpec& dc, const PartialSchedule& ps, int j) {
  double spare = 0.0;
  for (int k = 0; k < static_cast<int>(dc.nodes.size()); ++k) {
    const int free_nodes = dc.nodes[k].count - ps.roster.active_of_type(k);
    spare += free_nodes / dc.nodes[k].exec_time[j];
  }
  return spare;
}

double utilization(const DataCenterSpec& dc, const PartialSchedule& ps) {
  const int total = dc.node_count();
  return total > 0 ? static_cast<double>(ps.roster.total_active()) / total : 1.0;
}

}  // namespace

Assignment repair(const Assignment& a, const Scenario& sc, int epoch) {
  const int d = sc.site_count();
  const int t = sc.workload_count();
  const Vector gar = epoch_demand(sc, epoch);

  Assignment out = a;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < t; ++j) {
      if (out.rates(i, j) < 0.0) out.rates(i, j) = 0.0;
    }
  }

  // Rate conservation, column by column. Skipped when already satisfied so
  // feasible inputs pass through untouched.
  for (int j = 0; j < t; ++j) {
    const double sum = out.rates.col(j).sum();
    if (gar[j] <= 0.0) {
      if (sum != 0.0) out.rates.col(j).setZero();
      continue;
    }
    if (std::abs(sum - gar[j]) <= column_tol(gar[j])) continue;
    if (sum <= 0.0) {
      out.rates.col(j).setConstant(gar[j] / d);
    } else {
      out.rates.col(j) *= gar[j] / sum;
    }
  }

  for (int i = 0; i < d; ++i) {
    if (!sc.datacenters[i].premium_available) {
      if (out.rho[i] != 0.0) out.rho[i] = 0.0;
    } else {
      out.rho[i] = std::clamp(out.rho[i], 0.0, 1.0);
    }
  }

  // Shift overload off saturated sites, largest excess first, onto the
  // least-utilized sites with room.
  const int max_passes = 4 * d * t + 16;
  for (int pass = 0; pass < max_passes; ++pass) {
    FleetSchedule fleet = schedule_fleet(out, sc);
    if (fleet.total_leftover <= 0.0) return out;

    int worst = -1;
    double worst_excess = 0.0;
    for (int i = 0; i < d; ++i) {
      const double excess = fleet.sites[i].unabsorbed.sum();
      if (excess > worst_excess) {
        worst_excess = excess;
        worst = i;
      }
    }
    if (worst < 0) break;

    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
      return utilization(sc.datacenters[x], fleet.sites[x]) <
             utilization(sc.datacenters[y], fleet.sites[y]);
    });

    std::vector<int> workloads(t);
    std::iota(workloads.begin(), workloads.end(), 0);
    std::stable_sort(workloads.begin(), workloads.end(), [&](int x, int y) {
      return fleet.sites[worst].unabsorbed[x] > fleet.sites[worst].unabsorbed[y];
    });

    bool moved = false;
    for (int j : workloads) {
      double need = fleet.sites[worst].unabsorbed[j];
      if (need <= 0.0) break;
      for (int c : order) {
        if (c == worst || need <= 0.0) continue;
        const double room = spare_rate(sc.datacenters[c], fleet.sites[c], j);
        if (room <= 0.0) continue;
        const double move = std::min(need, room);
        out.rates(c, j) += move;
        out.rates(worst, j) -= move;
        need -= move;
        moved = true;
      }
    }
    if (!moved) break;  // no site has room; fall through to the final check
  }

  FleetSchedule fleet = schedule_fleet(out, sc);
  if (fleet.total_leftover > 0.0) {
    throw InfeasibleScenario("repair failed: demand exceeds fleet capacity at epoch " +
                             std::to_string(epoch));
  }
  return out;
}

Assignment random_assignment(const Scenario& sc, int epoch, Rng& rng) {
  const int d = sc.site_count();
  const int t = sc.workload_count();
  const Vector gar = epoch_demand(sc, epoch);

  constexpr int kMaxRedraws = 8;
  Assignment a;
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    a.rates = Matrix::Zero(d, t);
    a.rho = Vector::Zero(d);
    for (int j = 0; j < t; ++j) {
      if (gar[j] <= 0.0) continue;
      // Exponential draws normalized onto the simplex give a uniform split.
      Vector e(d);
      double sum = 0.0;
      for (int i = 0; i < d; ++i) {
        e[i] = -std::log(1.0 - uniform01(rng));
        sum += e[i];
      }
      for (int i = 0; i < d; ++i) a.rates(i, j) = gar[j] * e[i] / sum;
    }
    for (int i = 0; i < d; ++i) {
      a.rho[i] = sc.datacenters[i].premium_available ? uniform01(rng) : 0.0;
    }
    if (schedule_fleet(a, sc).total_leftover <= 0.0) return a;
  }
  return repair(a, sc, epoch);
}

Assignment neighbor(const Assignment& a, const Scenario& sc, int epoch,
                    const MoveParams& params, Rng& rng) {
  const int d = sc.site_count();
  const int t = sc.workload_count();
  const Vector gar = epoch_demand(sc, epoch);

  Assignment out = a;
  const bool rate_move = uniform01(rng) < params.p_move_rate;

  std::vector<int> premium_sites;
  for (int i = 0; i < d; ++i) {
    if (sc.datacenters[i].premium_available) premium_sites.push_back(i);
  }

  if ((rate_move && d >= 2) || premium_sites.empty()) {
    if (d < 2) return out;  // no move available on a single-site fleet
    const int j = uniform_int(rng, 0, t - 1);
    const int src = uniform_int(rng, 0, d - 1);
    int dst = uniform_int(rng, 0, d - 2);
    if (dst >= src) ++dst;
    const double m = std::min(out.rates(src, j), params.delta_frac * gar[j]);
    out.rates(src, j) -= m;
    out.rates(dst, j) += m;
  } else {
    const int i = premium_sites[uniform_int(rng, 0, static_cast<int>(premium_sites.size()) - 1)];
    const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    out.rho[i] = std::clamp(out.rho[i] + sign * params.delta_rho, 0.0, 1.0);
  }
  return repair(out, sc, epoch);
}

Assignment crossover(const Assignment& a, const Assignment& b, const Scenario& sc, int epoch,
                     Rng& rng) {
  const int t = sc.workload_count();
  Assignment child = a;
  for (int j = 0; j < t; ++j) {
    const double lambda = uniform01(rng);
    child.rates.col(j) = lambda * a.rates.col(j) + (1.0 - lambda) * b.rates.col(j);
  }
  const double lambda = uniform01(rng);
  child.rho = lambda * a.rho + (1.0 - lambda) * b.rho;
  return repair(child, sc, epoch);
}

Assignment mutate(const Assignment& a, double strength, const Scenario& sc, int epoch,
                  Rng& rng) {
  const int d = sc.site_count();
  const int t = sc.workload_count();
  const Vector gar = epoch_demand(sc, epoch);

  Assignment out = a;
  for (int j = 0; j < t; ++j) {
    const double sigma = strength * gar[j];
    if (sigma <= 0.0) continue;
    for (int i = 0; i < d; ++i) out.rates(i, j) += gaussian(rng, 0.0, sigma);
  }
  if (strength > 0.0) {
    for (int i = 0; i < d; ++i) {
      if (sc.datacenters[i].premium_available) out.rho[i] += gaussian(rng, 0.0, strength);
    }
  }
  return repair(out, sc, epoch);
}

void check_feasible(const Assignment& a, const Scenario& sc, int epoch, double tol) {
  const int d = sc.site_count();
  const int t = sc.workload_count();
  if (a.rates.rows() != d || a.rates.cols() != t) {
    throw ValidationError("assignment shape " + std::to_string(a.rates.rows()) + "x" +
                          std::to_string(a.rates.cols()) + " does not match scenario " +
                          std::to_string(d) + "x" + std::to_string(t));
  }
  if (a.rho.size() != d) {
    throw ValidationError("rho length " + std::to_string(a.rho.size()) +
                          " does not match site count " + std::to_string(d));
  }
  const Vector gar = epoch_demand(sc, epoch);
  for (int j = 0; j < t; ++j) {
    for (int i = 0; i < d; ++i) {
      if (a.rates(i, j) < 0.0) {
        throw InfeasibleScenario("rates[" + sc.datacenters[i].id + "][" + sc.workloads[j].id +
                                 "] is negative");
      }
    }
    const double sum = a.rates.col(j).sum();
    if (std::abs(sum - gar[j]) > tol * std::max(1.0, gar[j])) {
      throw InfeasibleScenario("workload " + sc.workloads[j].id + ": local rates sum to " +
                               std::to_string(sum) + " but GAR is " + std::to_string(gar[j]));
    }
  }
  for (int i = 0; i < d; ++i) {
    if (a.rho[i] < 0.0 || a.rho[i] > 1.0) {
      throw InfeasibleScenario("rho[" + sc.datacenters[i].id + "] outside [0, 1]");
    }
    if (!sc.datacenters[i].premium_available && a.rho[i] != 0.0) {
      throw InfeasibleScenario("rho[" + sc.datacenters[i].id +
                               "] set on a site without premium");
    }
    schedule_local(sc.datacenters[i], a.rates.row(i));  // throws CapacityExceeded
  }
}

bool is_feasible(const Assignment& a, const Scenario& sc, int epoch, double tol) {
  try {
    check_feasible(a, sc, epoch, tol);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

AssignmentFile load_assignment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  Json root;
  try {
    root = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!root.is_object()) throw ParseError("top level must be an object");
  for (auto it = root.begin(); it != root.end(); ++it) {
    const std::string& k = it.key();
    if (k != "schema_version" && k != "epoch" && k != "rates" && k != "rho") {
      throw ValidationError("unknown field '" + k + "'");
    }
  }
  if (!root.contains("rates") || !root["rates"].is_array() || root["rates"].empty()) {
    throw ValidationError("rates: expected a non-empty array of rows");
  }
  if (!root.contains("rho") || !root["rho"].is_array()) {
    throw ValidationError("rho: expected an array");
  }

  AssignmentFile out;
  const auto& rates = root["rates"];
  const std::size_t d = rates.size();
  const std::size_t t = rates[0].size();
  out.assignment.rates = Matrix::Zero(d, t);
  for (std::size_t i = 0; i < d; ++i) {
    if (!rates[i].is_array() || rates[i].size() != t) {
      throw ValidationError("rates[" + std::to_string(i) + "]: ragged row");
    }
    for (std::size_t j = 0; j < t; ++j) {
      if (!rates[i][j].is_number()) throw ValidationError("rates: expected numbers");
      out.assignment.rates(i, j) = rates[i][j].get<double>();
    }
  }
  out.assignment.rho = Vector::Zero(root["rho"].size());
  for (std::size_t i = 0; i < root["rho"].size(); ++i) {
    if (!root["rho"][i].is_number()) throw ValidationError("rho: expected numbers");
    out.assignment.rho[i] = root["rho"][i].get<double>();
  }
  if (root.contains("epoch")) out.epoch = root["epoch"].get<int>();
  return out;
}

void save_assignment(const Assignment& a, std::optional<int> epoch,
                     const std::filesystem::path& path) {
  Json root;
  root["schema_version"] = 1;
  if (epoch) root["epoch"] = *epoch;
  root["rates"] = Json::array();
  for (int i = 0; i < a.rates.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < a.rates.cols(); ++j) row.push_back(a.rates(i, j));
    root["rates"].push_back(std::move(row));
  }
  root["rho"] = Json::array();
  for (int i = 0; i < a.rho.size(); ++i) root["rho"].push_back(a.rho[i]);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << root.dump(2) << "\n";
}

}  // namespace shield
