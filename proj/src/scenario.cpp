#include "shield/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "shield/errors.hpp"
#include "shield/rng.hpp"

namespace shield {
namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ValidationError(path + ": " + msg);
}

void check_keys(const Json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return it.key() == k;
        }) == allowed.end()) {
      fail(path, "unknown field '" + it.key() + "'");
    }
  }
}

const Json& require(const Json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
  return *it;
}

double num(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

bool flag(const Json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string text(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Array hourly(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != kEpochsPerDay) {
    fail(path, "expected an array of 24 numbers");
  }
  Array out(kEpochsPerDay);
  for (int i = 0; i < kEpochsPerDay; ++i) out[i] = num(j[i], path + "[" + std::to_string(i) + "]");
  return out;
}

std::vector<double> number_list(const Json& j, std::size_t n, const std::string& path) {
  if (!j.is_array() || j.size() != n) {
    fail(path, "expected an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = num(j[i], path + "[" + std::to_string(i) + "]");
  return out;
}

Json to_json(const Array& a) {
  Json out = Json::array();
  for (int i = 0; i < a.size(); ++i) out.push_back(a[i]);
  return out;
}

}  // namespace

void validate(const Scenario& scenario) {
  if (scenario.datacenters.empty()) fail("datacenters", "at least one site required");
  if (scenario.workloads.empty()) fail("workloads", "at least one workload required");
  if (scenario.epoch_count != kEpochsPerDay) fail("epoch_count", "must be 24");
  if (!(scenario.free_cooling_cop > 0.0)) fail("free_cooling_cop", "must be > 0");

  const std::size_t t = scenario.workloads.size();
  for (std::size_t i = 0; i < scenario.datacenters.size(); ++i) {
    const DataCenterSpec& dc = scenario.datacenters[i];
    const std::string p = "datacenters[" + std::to_string(i) + "]";
    if (!(dc.cop > 0.0)) fail(p + ".cop", "must be > 0");
    if (dc.ewif < 0.0) fail(p + ".ewif", "must be >= 0");
    if (!(dc.cf > 0.0)) fail(p + ".cf", "must be > 0");
    if (!(dc.concentration_cycle > 1.0)) fail(p + ".concentration_cycle", "must be > 1");
    if (dc.tou.size() != kEpochsPerDay) fail(p + ".tou", "must have 24 entries");
    for (int e = 0; e < kEpochsPerDay; ++e) {
      if (!(dc.tou[e] > 0.0)) fail(p + ".tou[" + std::to_string(e) + "]", "must be > 0");
    }
    if (dc.temperature.size() != kEpochsPerDay) fail(p + ".temperature", "must have 24 entries");
    if (dc.dew_point.size() != kEpochsPerDay) fail(p + ".dew_point", "must have 24 entries");
    if (dc.premium_available && dc.annual_contract) {
      fail(p, "premium_available and annual_contract are mutually exclusive");
    }
    if (dc.premium_price < 0.0) fail(p + ".premium_price", "must be >= 0");
    if (dc.premium_price > 0.0 && !dc.premium_available) {
      fail(p + ".premium_price", "set without premium_available");
    }
    if (dc.annual_contract && !(dc.contract_price > 0.0)) {
      fail(p + ".contract_price", "must be > 0 on an annual-contract site");
    }
    if (dc.contract_price < 0.0) fail(p + ".contract_price", "must be >= 0");
    if (dc.nodes.empty()) fail(p + ".nodes", "at least one node type required");
    for (std::size_t k = 0; k < dc.nodes.size(); ++k) {
      const NodeTypeSpec& nt = dc.nodes[k];
      const std::string np = p + ".nodes[" + std::to_string(k) + "]";
      if (nt.count < 0) fail(np + ".count", "must be >= 0");
      if (!(nt.idle_power > 0.0)) fail(np + ".idle_power", "must be > 0");
      if (nt.active_power.size() != t) fail(np + ".active_power", "length must equal workload count");
      if (nt.exec_time.size() != t) fail(np + ".exec_time", "length must equal workload count");
      for (std::size_t j = 0; j < t; ++j) {
        if (nt.active_power[j] < nt.idle_power) {
          fail(np + ".active_power[" + std::to_string(j) + "]", "must be >= idle_power");
        }
        if (!(nt.exec_time[j] > 0.0)) {
          fail(np + ".exec_time[" + std::to_string(j) + "]", "must be > 0");
        }
      }
    }
  }

  long long fleet_nodes = 0;
  for (const auto& dc : scenario.datacenters) fleet_nodes += dc.node_count();

  for (std::size_t j = 0; j < t; ++j) {
    const WorkloadSpec& w = scenario.workloads[j];
    const std::string p = "workloads[" + std::to_string(j) + "]";
    if (w.gar.size() != kEpochsPerDay) fail(p + ".gar", "must have 24 entries");
    for (int e = 0; e < kEpochsPerDay; ++e) {
      if (w.gar[e] < 0.0) fail(p + ".gar[" + std::to_string(e) + "]", "must be >= 0");
    }
  }

  // Under-subscription: each epoch's demand must fit the fleet even in the
  // best case (fastest node type anywhere), else no assignment can be valid.
  for (int e = 0; e < kEpochsPerDay; ++e) {
    double nodes_needed = 0.0;
    for (std::size_t j = 0; j < t; ++j) {
      double min_exec = std::numeric_limits<double>::infinity();
      for (const auto& dc : scenario.datacenters) {
        for (const auto& nt : dc.nodes) min_exec = std::min(min_exec, nt.exec_time[j]);
      }
      nodes_needed += scenario.workloads[j].gar[e] * min_exec;
    }
    if (nodes_needed > static_cast<double>(fleet_nodes) * (1.0 + kRateTol)) {
      fail("workloads", "epoch " + std::to_string(e) + " demand exceeds fleet capacity (" +
                            std::to_string(nodes_needed) + " node-hours vs " +
                            std::to_string(fleet_nodes) + ")");
    }
  }
}

Scenario scenario_from_json_text(const std::string& file_text) {
  Json root;
  try {
    root = Json::parse(file_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!root.is_object()) throw ParseError("top level must be an object");

  check_keys(root, "$", {"schema_version", "label", "seed", "free_cooling_cop", "datacenters",
                         "workloads"});
  const double version = num(require(root, "schema_version", "$"), "schema_version");
  if (version != 1) fail("schema_version", "unsupported version");

  Scenario sc;
  sc.label = text(require(root, "label", "$"), "label");
  const Json& seed = require(root, "seed", "$");
  if (!seed.is_number_integer() && !seed.is_number_unsigned()) fail("seed", "expected an integer");
  sc.rng_seed = seed.get<std::uint64_t>();
  if (root.contains("free_cooling_cop")) {
    sc.free_cooling_cop = num(root["free_cooling_cop"], "free_cooling_cop");
  }

  const Json& dcs = require(root, "datacenters", "$");
  if (!dcs.is_array()) fail("datacenters", "expected an array");
  const Json& wls = require(root, "workloads", "$");
  if (!wls.is_array()) fail("workloads", "expected an array");

  for (std::size_t j = 0; j < wls.size(); ++j) {
    const std::string p = "workloads[" + std::to_string(j) + "]";
    const Json& w = wls[j];
    if (!w.is_object()) fail(p, "expected an object");
    check_keys(w, p, {"id", "category", "gar"});
    WorkloadSpec spec;
    spec.id = text(require(w, "id", p), p + ".id");
    spec.category = text(require(w, "category", p), p + ".category");
    spec.gar = hourly(require(w, "gar", p), p + ".gar");
    sc.workloads.push_back(std::move(spec));
  }

  for (std::size_t i = 0; i < dcs.size(); ++i) {
    const std::string p = "datacenters[" + std::to_string(i) + "]";
    const Json& d = dcs[i];
    if (!d.is_object()) fail(p, "expected an object");
    check_keys(d, p, {"id", "cop", "ewif", "cf", "concentration_cycle", "tou",
                      "premium_available", "premium_price", "annual_contract", "contract_price",
                      "free_cooling_available", "temperature", "dew_point", "nodes"});
    DataCenterSpec dc;
    dc.id = text(require(d, "id", p), p + ".id");
    dc.cop = num(require(d, "cop", p), p + ".cop");
    dc.ewif = num(require(d, "ewif", p), p + ".ewif");
    dc.cf = num(require(d, "cf", p), p + ".cf");
    dc.concentration_cycle = num(require(d, "concentration_cycle", p), p + ".concentration_cycle");
    dc.tou = hourly(require(d, "tou", p), p + ".tou");
    dc.premium_available = flag(require(d, "premium_available", p), p + ".premium_available");
    dc.premium_price = num(require(d, "premium_price", p), p + ".premium_price");
    dc.annual_contract = flag(require(d, "annual_contract", p), p + ".annual_contract");
    dc.contract_price = num(require(d, "contract_price", p), p + ".contract_price");
    dc.free_cooling_available =
        flag(require(d, "free_cooling_available", p), p + ".free_cooling_available");
    dc.temperature = hourly(require(d, "temperature", p), p + ".temperature");
    dc.dew_point = hourly(require(d, "dew_point", p), p + ".dew_point");

    const Json& nodes = require(d, "nodes", p);
    if (!nodes.is_array()) fail(p + ".nodes", "expected an array");
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const std::string np = p + ".nodes[" + std::to_string(k) + "]";
      const Json& n = nodes[k];
      if (!n.is_object()) fail(np, "expected an object");
      check_keys(n, np, {"id", "count", "idle_power", "active_power", "exec_time"});
      NodeTypeSpec nt;
      nt.id = text(require(n, "id", np), np + ".id");
      const Json& count = require(n, "count", np);
      if (!count.is_number_integer() && !count.is_number_unsigned()) {
        fail(np + ".count", "expected an integer");
      }
      nt.count = count.get<int>();
      nt.idle_power = num(require(n, "idle_power", np), np + ".idle_power");
      nt.active_power = number_list(require(n, "active_power", np), sc.workloads.size(),
                                    np + ".active_power");
      nt.exec_time = number_list(require(n, "exec_time", np), sc.workloads.size(),
                                 np + ".exec_time");
      dc.nodes.push_back(std::move(nt));
    }
    sc.datacenters.push_back(std::move(dc));
  }

  validate(sc);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json_text(buf.str());
}

std::string scenario_to_json_text(const Scenario& sc) {
  Json root;
  root["schema_version"] = 1;
  root["label"] = sc.label;
  root["seed"] = sc.rng_seed;
  root["free_cooling_cop"] = sc.free_cooling_cop;
  root["datacenters"] = Json::array();
  for (const auto& dc : sc.datacenters) {
    Json d;
    d["id"] = dc.id;
    d["cop"] = dc.cop;
    d["ewif"] = dc.ewif;
    d["cf"] = dc.cf;
    d["concentration_cycle"] = dc.concentration_cycle;
    d["tou"] = to_json(dc.tou);
    d["premium_available"] = dc.premium_available;
    d["premium_price"] = dc.premium_price;
    d["annual_contract"] = dc.annual_contract;
    d["contract_price"] = dc.contract_price;
    d["free_cooling_available"] = dc.free_cooling_available;
    d["temperature"] = to_json(dc.temperature);
    d["dew_point"] = to_json(dc.dew_point);
    d["nodes"] = Json::array();
    for (const auto& nt : dc.nodes) {
      Json n;
      n["id"] = nt.id;
      n["count"] = nt.count;
      n["idle_power"] = nt.idle_power;
      n["active_power"] = nt.active_power;
      n["exec_time"] = nt.exec_time;
      d["nodes"].push_back(std::move(n));
    }
    root["datacenters"].push_back(std::move(d));
  }
  root["workloads"] = Json::array();
  for (const auto& w : sc.workloads) {
    Json j;
    j["id"] = w.id;
    j["category"] = w.category;
    j["gar"] = to_json(w.gar);
    root["workloads"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

void save_scenario(const Scenario& sc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << scenario_to_json_text(sc);
}

namespace {

std::string two_digits(int i) {
  std::string s = std::to_string(i);
  return s.size() < 2 ? "0" + s : s;
}

}  // namespace

Scenario default_scenario(int d, int t, std::uint64_t seed) {
  if (d < 1 || t < 1) throw std::invalid_argument("default_scenario: d and t must be >= 1");
  Scenario sc;
  sc.label = "default-" + std::to_string(d) + "x" + std::to_string(t) + "-" + std::to_string(seed);
  sc.rng_seed = seed;
  sc.free_cooling_cop = kDefaultFreeCoolingCop;

  Rng rng = make_rng(derive_seed(seed, 0x5c3'a01));
  const int contract_site = uniform_int(rng, 0, d - 1);

  constexpr int kNodeTypes = 3;
  constexpr int kNodesPerSite = 4320;

  for (int i = 0; i < d; ++i) {
    DataCenterSpec dc;
    dc.id = "dc" + two_digits(i);
    dc.cop = uniform(rng, 3.75, 5.72);
    dc.ewif = uniform(rng, 0.0, 3.97);
    dc.cf = uniform(rng, 99.7, 775.0);
    dc.concentration_cycle = 5.0;

    // Peak/off-peak daily price shape with per-hour jitter.
    const double base = uniform(rng, 0.018, 0.12);
    const double peak = uniform(rng, std::max(2.0 * base, 0.10), 0.48);
    const double center = uniform(rng, 12.0, 18.0);
    const double width = uniform(rng, 4.0, 8.0);
    dc.tou = Array(kEpochsPerDay);
    for (int e = 0; e < kEpochsPerDay; ++e) {
      const double x = (e - center) / width;
      const double shape = std::max(0.0, 1.0 - x * x);
      const double jitter = uniform(rng, 0.97, 1.03);
      dc.tou[e] = std::clamp((base + (peak - base) * shape) * jitter, 0.018, 0.48);
    }

    if (i == contract_site) {
      dc.annual_contract = true;
      dc.contract_price = 0.15;
    } else {
      dc.premium_available = uniform01(rng) < 0.5;
      dc.premium_price = dc.premium_available ? uniform(rng, 0.0039, 0.14) : 0.0;
    }

    dc.free_cooling_available = uniform01(rng) < 0.5;
    const double mean_temp =
        dc.free_cooling_available ? uniform(rng, 55.0, 78.0) : uniform(rng, 60.0, 92.0);
    const double amp = uniform(rng, 5.0, 18.0);
    const double depression = uniform(rng, 5.0, 25.0);
    dc.temperature = Array(kEpochsPerDay);
    dc.dew_point = Array(kEpochsPerDay);
    for (int e = 0; e < kEpochsPerDay; ++e) {
      const double diurnal = amp * std::sin(2.0 * M_PI * (e - 9.0) / 24.0);
      dc.temperature[e] = mean_temp + diurnal + uniform(rng, -1.5, 1.5);
      dc.dew_point[e] = dc.temperature[e] - depression + uniform(rng, -1.5, 1.5);
    }

    // Heterogeneous node mix summing to a fixed site size.
    double weights[kNodeTypes];
    double wsum = 0.0;
    for (double& w : weights) {
      w = uniform(rng, 0.15, 1.0);
      wsum += w;
    }
    int assigned = 0;
    for (int k = 0; k < kNodeTypes; ++k) {
      NodeTypeSpec nt;
      nt.id = "n" + std::to_string(k);
      nt.count = k + 1 == kNodeTypes
                     ? kNodesPerSite - assigned
                     : static_cast<int>(std::floor(kNodesPerSite * weights[k] / wsum));
      assigned += nt.count;
      nt.idle_power = uniform(rng, 0.03, 0.1);
      nt.active_power.resize(t);
      nt.exec_time.resize(t);
      dc.nodes.push_back(std::move(nt));
    }
    for (int j = 0; j < t; ++j) {
      double exec[kNodeTypes];
      double fastest = 0.0, slowest = std::numeric_limits<double>::infinity();
      for (int k = 0; k < kNodeTypes; ++k) {
        exec[k] = uniform(rng, 0.1, 2.0);
        fastest = std::max(fastest, 1.0 / exec[k]);
        slowest = std::min(slowest, 1.0 / exec[k]);
      }
      for (int k = 0; k < kNodeTypes; ++k) {
        NodeTypeSpec& nt = dc.nodes[k];
        nt.exec_time[j] = exec[k];
        // Faster nodes draw more power.
        const double span = fastest - slowest;
        const double speed01 = span > 0.0 ? (1.0 / exec[k] - slowest) / span : 0.5;
        const double lo = std::max(0.08, nt.idle_power);
        const double ap = lo + (0.35 - lo) * speed01 * uniform(rng, 0.85, 1.15);
        nt.active_power[j] = std::clamp(ap, lo, 0.35);
      }
    }
    sc.datacenters.push_back(std::move(dc));
  }

  // Guarantee the premium regime is represented whenever there is room.
  if (d >= 2 &&
      std::none_of(sc.datacenters.begin(), sc.datacenters.end(),
                   [](const DataCenterSpec& dc) { return dc.premium_available; })) {
    DataCenterSpec& dc = sc.datacenters[contract_site == 0 ? 1 : 0];
    dc.premium_available = true;
    dc.premium_price = uniform(rng, 0.0039, 0.14);
  }

  // Diurnal arrival curves, scaled so that worst-case placement stays within
  // 60% of the fleet's nodes at the peak epoch.
  std::vector<Array> raw(t);
  for (int j = 0; j < t; ++j) {
    raw[j] = Array(kEpochsPerDay);
    const double weight = uniform(rng, 0.2, 1.0);
    const double phase = uniform(rng, 0.0, 24.0);
    for (int e = 0; e < kEpochsPerDay; ++e) {
      const double s = 1.0 + 0.35 * std::sin(2.0 * M_PI * (e - phase) / 24.0);
      raw[j][e] = weight * s * uniform(rng, 0.95, 1.05);
    }
  }
  double fleet_nodes = 0.0;
  for (const auto& dc : sc.datacenters) fleet_nodes += dc.node_count();
  double peak_nodes = 0.0;
  for (int e = 0; e < kEpochsPerDay; ++e) {
    double need = 0.0;
    for (int j = 0; j < t; ++j) {
      double max_exec = 0.0;
      for (const auto& dc : sc.datacenters) {
        for (const auto& nt : dc.nodes) max_exec = std::max(max_exec, nt.exec_time[j]);
      }
      need += raw[j][e] * max_exec;
    }
    peak_nodes = std::max(peak_nodes, need);
  }
  const double scale = 0.60 * fleet_nodes / peak_nodes;
  for (int j = 0; j < t; ++j) {
    WorkloadSpec w;
    w.id = "w" + std::to_string(j);
    w.category = j % 2 == 0 ? "offline analytics" : "artificial intelligence";
    w.gar = raw[j] * scale;
    sc.workloads.push_back(std::move(w));
  }

  validate(sc);
  return sc;
}

Vector epoch_demand(const Scenario& scenario, int epoch) {
  if (epoch < 0 || epoch >= scenario.epoch_count) {
    throw std::out_of_range("epoch " + std::to_string(epoch) + " outside [0, " +
                            std::to_string(scenario.epoch_count) + ")");
  }
  Vector gar(scenario.workload_count());
  for (int j = 0; j < scenario.workload_count(); ++j) gar[j] = scenario.workloads[j].gar[epoch];
  return gar;
}

}  // namespace shield
