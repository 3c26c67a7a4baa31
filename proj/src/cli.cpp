#include "shield/cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "shield/baselines.hpp"
#include "shield/encoding.hpp"
#include "shield/errors.hpp"
#include "shield/harness.hpp"
#include "shield/metrics.hpp"
#include "shield/model.hpp"
#include "shield/scenario.hpp"
#include "shield/shield.hpp"

namespace shield::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

enum class Algo { Shield, Too, Gald, Dmgc };
constexpr std::array<const char*, 4> kAlgoNames{"shield", "too", "gald", "dmgc"};

std::optional<Algo> parse_algo(const std::string& name) {
  for (std::size_t i = 0; i < kAlgoNames.size(); ++i) {
    if (name == kAlgoNames[i]) return static_cast<Algo>(i);
  }
  return std::nullopt;
}

struct AllParams {
  ShieldParams shield;
  BaselineParams baseline;
  int trace_samples = 600;
};

void apply_override(AllParams& p, const std::string& key, double value) {
  const auto as_int = [&]() { return static_cast<int>(std::llround(value)); };
  if (key == "population") {
    p.shield.population = as_int();
    p.baseline.population = as_int();
  } else if (key == "n_local") {
    p.shield.n_local = as_int();
  } else if (key == "f_update") {
    p.shield.f_update = as_int();
  } else if (key == "iter_early") {
    p.shield.iter_early = as_int();
  } else if (key == "max_steps") {
    p.shield.max_steps = as_int();
  } else if (key == "patience") {
    p.shield.patience = as_int();
  } else if (key == "n_compare") {
    p.shield.n_compare = as_int();
  } else if (key == "n_offspring") {
    p.shield.n_offspring = as_int();
  } else if (key == "mut_sigma") {
    p.shield.mut_sigma = value;
  } else if (key == "delta_frac") {
    p.shield.moves.delta_frac = value;
    p.baseline.moves.delta_frac = value;
  } else if (key == "delta_rho") {
    p.shield.moves.delta_rho = value;
    p.baseline.moves.delta_rho = value;
  } else if (key == "p_move_rate") {
    p.shield.moves.p_move_rate = value;
    p.baseline.moves.p_move_rate = value;
  } else if (key == "trees") {
    p.shield.forest.n_trees = as_int();
  } else if (key == "max_depth") {
    p.shield.forest.max_depth = as_int();
  } else if (key == "min_leaf") {
    p.shield.forest.min_leaf = as_int();
  } else if (key == "min_train_rows") {
    p.shield.forest.min_train_rows = as_int();
  } else if (key == "sa_t0") {
    p.baseline.sa.t0 = value;
  } else if (key == "sa_alpha") {
    p.baseline.sa.alpha = value;
  } else if (key == "sa_steps_per_temp") {
    p.baseline.sa.steps_per_temp = as_int();
  } else if (key == "sa_target_accept") {
    p.baseline.sa.target_accept = value;
  } else if (key == "sa_probes") {
    p.baseline.sa.probes = as_int();
  } else if (key == "ga_crossover_prob") {
    p.baseline.ga.crossover_prob = value;
  } else if (key == "ga_mutation_sigma") {
    p.baseline.ga.mutation_sigma = value;
  } else if (key == "ga_tournament") {
    p.baseline.ga.tournament = as_int();
  } else if (key == "dmgc_neighbors") {
    p.baseline.dmgc.neighbors = as_int();
  } else if (key == "dmgc_sigma") {
    p.baseline.dmgc.sigma = value;
  } else if (key == "dmgc_archive") {
    p.baseline.dmgc.archive_capacity = as_int();
  } else if (key == "trace_samples") {
    p.trace_samples = as_int();
  } else {
    throw std::invalid_argument("unknown parameter '" + key + "'");
  }
}

AllParams make_params(const std::vector<std::string>& sets) {
  AllParams p;
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    }
    const std::string key = kv.substr(0, eq);
    double value = 0.0;
    try {
      value = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("--set " + key + ": value is not a number");
    }
    apply_override(p, key, value);
  }
  return p;
}

struct CommonOpts {
  std::string scenario_path;
  std::string epoch = "0";
  long generations = -1;
  long evaluations = -1;
  double seconds = -1.0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string objectives = "cost,carbon,water";
  std::string out_dir = ".";
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_budget = true) {
  cmd->add_option("--scenario", o.scenario_path,
                  "Scenario file (omit for the built-in 16x5 default)");
  cmd->add_option("--epoch", o.epoch, "Epoch 0-23, or 'all' for the full day");
  if (with_budget) {
    auto* g = cmd->add_option("--generations", o.generations, "Generation budget");
    auto* e = cmd->add_option("--evaluations", o.evaluations, "Evaluation budget");
    auto* s = cmd->add_option("--seconds", o.seconds, "Wall-clock budget (not reproducible)");
    g->excludes(e)->excludes(s);
    e->excludes(s);
  }
  cmd->add_option("--seed", o.seed, "Master seed")->required();
  cmd->add_option("--workers", o.workers, "Worker threads for evaluation");
  cmd->add_option("--objectives", o.objectives, "Objective subset, e.g. cost,carbon");
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--set", o.sets, "Parameter override key=value")->take_all();
}

Budget make_budget(const CommonOpts& o) {
  if (o.evaluations >= 0) return Budget::evaluations(o.evaluations);
  if (o.seconds >= 0) return Budget::seconds(o.seconds);
  return Budget::generations(o.generations >= 0 ? o.generations : 100);
}

Scenario load_or_default(const std::string& path) {
  if (path.empty()) return default_scenario(16, 5, 42);
  return load_scenario(path);
}

std::vector<int> parse_epochs(const std::string& text, int epoch_count) {
  if (text == "all") {
    std::vector<int> all(epoch_count);
    for (int e = 0; e < epoch_count; ++e) all[e] = e;
    return all;
  }
  int epoch = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), epoch);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || epoch < 0 ||
      epoch >= epoch_count) {
    throw std::invalid_argument("--epoch must be 0-" + std::to_string(epoch_count - 1) +
                                " or 'all'");
  }
  return {epoch};
}

std::string fmt(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

// ---------------------------------------------------------------------------
// Running algorithms
// ---------------------------------------------------------------------------

struct AlgoRun {
  Algo algo;
  std::uint64_t seed = 0;
  std::unique_ptr<RunContext> ctx;
  RunResult result;
};

AlgoRun run_one(Algo algo, const Scenario& sc, int epoch, const ObjectiveMask& mask,
                Budget budget, std::uint64_t master_seed, int workers,
                const AllParams& params) {
  AlgoRun run;
  run.algo = algo;
  run.seed = derive_seed(master_seed, 1000 + static_cast<std::uint64_t>(algo), epoch);
  run.ctx = std::make_unique<RunContext>(sc, epoch, mask, budget, run.seed, workers);
  switch (algo) {
    case Algo::Shield:
      run.result = run_shield(*run.ctx, params.shield);
      break;
    case Algo::Too:
      run.result = run_too(*run.ctx, params.baseline);
      break;
    case Algo::Gald:
      run.result = run_gald(*run.ctx, params.baseline);
      break;
    case Algo::Dmgc:
      run.result = run_dmgc(*run.ctx, params.baseline);
      break;
  }
  return run;
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

Json budget_json(const Budget& b) {
  Json j;
  switch (b.kind) {
    case Budget::Kind::Generations:
      j["kind"] = "generations";
      break;
    case Budget::Kind::Evaluations:
      j["kind"] = "evaluations";
      break;
    case Budget::Kind::Seconds:
      j["kind"] = "seconds";
      break;
  }
  j["amount"] = b.amount;
  return j;
}

Json objective_json(const ObjectiveVector& o) {
  Json j;
  j["cost"] = o.cost;
  j["carbon"] = o.carbon;
  j["water"] = o.water;
  return j;
}

Json assignment_json(const Assignment& a) {
  Json j;
  j["rates"] = Json::array();
  for (int i = 0; i < a.rates.rows(); ++i) {
    Json row = Json::array();
    for (int c = 0; c < a.rates.cols(); ++c) row.push_back(a.rates(i, c));
    j["rates"].push_back(std::move(row));
  }
  j["rho"] = Json::array();
  for (int i = 0; i < a.rho.size(); ++i) j["rho"].push_back(a.rho[i]);
  return j;
}

Json front_json(const AlgoRun& run, const Scenario& sc, int epoch, const ObjectiveMask& mask,
                const Budget& budget) {
  Json j;
  j["schema_version"] = 1;
  j["algorithm"] = kAlgoNames[static_cast<int>(run.algo)];
  j["scenario"] = sc.label;
  j["epoch"] = epoch;
  j["objectives"] = mask.name();
  j["budget"] = budget_json(budget);
  j["seed"] = run.seed;
  j["evaluations"] = run.result.evaluations;
  j["points"] = Json::array();
  for (const auto& p : run.result.front) {
    Json pt = objective_json(p.raw);
    pt["assignment"] = assignment_json(p.assignment);
    j["points"].push_back(std::move(pt));
  }
  return j;
}

std::string trace_csv(const std::vector<FrontSample>& series) {
  std::string out = "elapsed_s,evaluations,phv\r\n";
  for (const auto& s : series) {
    out += fmt(s.elapsed);
    out += ',';
    out += std::to_string(s.evaluations);
    out += ',';
    out += fmt(s.phv);
    out += "\r\n";
  }
  return out;
}

std::string gen_log_csv(const std::vector<GenRecord>& log, const ObjectiveMask& mask) {
  std::string header = "generation,evaluations";
  std::stringstream names(mask.name());
  std::string axis;
  while (std::getline(names, axis, ',')) header += ",ideal_" + axis;
  std::string out = header + "\r\n";
  for (const auto& rec : log) {
    out += std::to_string(rec.generation);
    out += ',';
    out += std::to_string(rec.evaluations);
    for (int i = 0; i < rec.ideal.size(); ++i) {
      out += ',';
      out += fmt(rec.ideal[i]);
    }
    out += "\r\n";
  }
  return out;
}

// Best-per-objective picks from a front; ties resolve to the earliest point.
struct Selections {
  ObjectiveVector cost, carbon, water;
  const RunContext::FrontPoint* cost_point = nullptr;
  const RunContext::FrontPoint* carbon_point = nullptr;
  const RunContext::FrontPoint* water_point = nullptr;
};

Selections select_best(const std::vector<RunContext::FrontPoint>& front) {
  Selections sel;
  for (const auto& p : front) {
    if (!sel.cost_point || p.raw.cost < sel.cost_point->raw.cost) sel.cost_point = &p;
    if (!sel.carbon_point || p.raw.carbon < sel.carbon_point->raw.carbon) sel.carbon_point = &p;
    if (!sel.water_point || p.raw.water < sel.water_point->raw.water) sel.water_point = &p;
  }
  if (sel.cost_point) sel.cost = sel.cost_point->raw;
  if (sel.carbon_point) sel.carbon = sel.carbon_point->raw;
  if (sel.water_point) sel.water = sel.water_point->raw;
  return sel;
}

Json selections_json(const Selections& sel, bool with_assignments) {
  Json j;
  j["cost_efficient"] = objective_json(sel.cost);
  j["carbon_efficient"] = objective_json(sel.carbon);
  j["water_efficient"] = objective_json(sel.water);
  if (with_assignments && sel.cost_point) {
    j["cost_efficient"]["assignment"] = assignment_json(sel.cost_point->assignment);
    j["carbon_efficient"]["assignment"] = assignment_json(sel.carbon_point->assignment);
    j["water_efficient"]["assignment"] = assignment_json(sel.water_point->assignment);
  }
  return j;
}

Json norm_json(const NormBox& box) {
  Json j;
  j["lo"] = Json::array();
  j["hi"] = Json::array();
  for (int i = 0; i < box.lo.size(); ++i) {
    j["lo"].push_back(box.lo[i]);
    j["hi"].push_back(box.hi[i]);
  }
  j["reference_scale"] = box.ref_scale;
  return j;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int cmd_run(const CommonOpts& opts, const std::string& algorithm, std::ostream& out,
            std::ostream& err) {
  const auto algo = parse_algo(algorithm);
  if (!algo) {
    err << "unknown algorithm '" << algorithm << "'\n";
    return 2;
  }
  const AllParams params = make_params(opts.sets);
  const Scenario sc = load_or_default(opts.scenario_path);
  const ObjectiveMask mask = ObjectiveMask::parse(opts.objectives);
  const Budget budget = make_budget(opts);
  const std::vector<int> epochs = parse_epochs(opts.epoch, sc.epoch_count);

  fs::create_directories(opts.out_dir);
  const bool all_day = epochs.size() > 1;

  ObjectiveVector cost_total, carbon_total, water_total;
  for (int epoch : epochs) {
    AlgoRun run =
        run_one(*algo, sc, epoch, mask, budget, opts.seed, opts.workers, params);

    const fs::path dir = all_day
                             ? fs::path(opts.out_dir) / ("epoch_" + std::to_string(epoch))
                             : fs::path(opts.out_dir);
    fs::create_directories(dir);
    write_text(dir / "front.json",
               front_json(run, sc, epoch, mask, budget).dump(2) + "\n");
    const NormBox box = run.ctx->tracker().own_bounds();
    write_text(dir / "trace.csv",
               trace_csv(run.ctx->tracker().series(box, false, params.trace_samples)));
    write_text(dir / "generations.csv", gen_log_csv(run.result.log, mask));

    const Selections sel = select_best(run.result.front);
    Json summary;
    summary["schema_version"] = 1;
    summary["algorithm"] = kAlgoNames[static_cast<int>(*algo)];
    summary["epoch"] = epoch;
    summary["selections"] = selections_json(sel, true);
    write_text(dir / "summary.json", summary.dump(2) + "\n");

    cost_total += sel.cost;
    carbon_total += sel.carbon;
    water_total += sel.water;
    out << "epoch " << epoch << ": evaluations=" << run.result.evaluations
        << " front=" << run.result.front.size() << "\n";
  }

  if (all_day) {
    Json daily;
    daily["schema_version"] = 1;
    daily["algorithm"] = algorithm;
    daily["epochs"] = "all";
    daily["selections"] = Json();
    daily["selections"]["cost_efficient"] = objective_json(cost_total);
    daily["selections"]["carbon_efficient"] = objective_json(carbon_total);
    daily["selections"]["water_efficient"] = objective_json(water_total);
    write_text(fs::path(opts.out_dir) / "summary.json", daily.dump(2) + "\n");
  }
  return 0;
}

struct EpochComparison {
  std::vector<AlgoRun> runs;
  NormBox box;
  std::map<std::string, double> final_phv;
  std::map<std::string, Selections> selections;
  // per-algorithm front triple chosen by lowest normalized objective sum
  std::map<std::string, ObjectiveVector> balanced;
};

EpochComparison compare_epoch(const Scenario& sc, int epoch, const ObjectiveMask& mask,
                              Budget budget, const CommonOpts& opts, const AllParams& params) {
  EpochComparison cmp;
  for (int a = 0; a < 4; ++a) {
    cmp.runs.push_back(run_one(static_cast<Algo>(a), sc, epoch, mask, budget, opts.seed,
                               opts.workers, params));
  }

  cmp.box.ref_scale = 1.1;
  for (const AlgoRun& run : cmp.runs) run.ctx->tracker().extend_bounds(cmp.box.lo, cmp.box.hi);

  // Raw-objective bounds over the union of the four fronts, used for the
  // balanced (lowest cumulative) pick.
  Eigen::Vector3d raw_lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d raw_hi = -raw_lo;
  for (const AlgoRun& run : cmp.runs) {
    for (const auto& p : run.result.front) {
      raw_lo = raw_lo.cwiseMin(p.raw.vec());
      raw_hi = raw_hi.cwiseMax(p.raw.vec());
    }
  }

  for (const AlgoRun& run : cmp.runs) {
    const std::string name = kAlgoNames[static_cast<int>(run.algo)];
    cmp.final_phv[name] = run.ctx->tracker().final_phv(cmp.box);
    cmp.selections[name] = select_best(run.result.front);

    double best_sum = std::numeric_limits<double>::infinity();
    ObjectiveVector best;
    for (const auto& p : run.result.front) {
      double sum = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double range = raw_hi[i] - raw_lo[i];
        sum += range > 0.0 ? (p.raw.vec()[i] - raw_lo[i]) / range : 0.0;
      }
      if (sum < best_sum) {
        best_sum = sum;
        best = p.raw;
      }
    }
    cmp.balanced[name] = best;
  }
  return cmp;
}

void write_epoch_comparison(const fs::path& dir, const EpochComparison& cmp, const Scenario& sc,
                            int epoch, const ObjectiveMask& mask, const Budget& budget,
                            int trace_samples) {
  fs::create_directories(dir);
  const bool time_axis = budget.kind == Budget::Kind::Seconds;

  std::vector<std::vector<FrontSample>> series;
  for (const AlgoRun& run : cmp.runs) {
    const std::string name = kAlgoNames[static_cast<int>(run.algo)];
    series.push_back(run.ctx->tracker().series(cmp.box, false, trace_samples));
    write_text(dir / ("trace_" + name + ".csv"), trace_csv(series.back()));
    write_text(dir / ("generations_" + name + ".csv"), gen_log_csv(run.result.log, mask));
    write_text(dir / ("front_" + name + ".json"),
               front_json(run, sc, epoch, mask, budget).dump(2) + "\n");
  }

  // Shared-axis CSV: union of sample positions, PHV carried forward.
  std::vector<double> axis;
  for (const auto& s : series) {
    for (const auto& p : s) {
      axis.push_back(time_axis ? p.elapsed : static_cast<double>(p.evaluations));
    }
  }
  std::sort(axis.begin(), axis.end());
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());

  std::string csv = time_axis ? "elapsed_s" : "evaluations";
  for (const char* name : kAlgoNames) csv += std::string(",") + name;
  csv += "\r\n";
  std::vector<std::size_t> at(series.size(), 0);
  std::vector<double> current(series.size(), 0.0);
  for (double x : axis) {
    csv += fmt(x);
    for (std::size_t a = 0; a < series.size(); ++a) {
      while (at[a] < series[a].size() &&
             (time_axis ? series[a][at[a]].elapsed : static_cast<double>(
                                                         series[a][at[a]].evaluations)) <= x) {
        current[a] = series[a][at[a]].phv;
        ++at[a];
      }
      csv += ',';
      csv += fmt(current[a]);
    }
    csv += "\r\n";
  }
  write_text(dir / "comparison.csv", csv);

  // Speedup statistic: axis position where each algorithm first reaches the
  // best baseline's final PHV.
  double best_baseline = 0.0;
  for (int a = 1; a < 4; ++a) {
    best_baseline = std::max(best_baseline, cmp.final_phv.at(kAlgoNames[a]));
  }
  Json stats;
  stats["schema_version"] = 1;
  stats["scenario"] = sc.label;
  stats["epoch"] = epoch;
  stats["objectives"] = mask.name();
  stats["budget"] = budget_json(budget);
  stats["normalization"] = norm_json(cmp.box);
  stats["best_baseline_final_phv"] = best_baseline;
  stats["final_phv"] = Json();
  stats["reach_best_baseline"] = Json();
  stats["per_objective_best"] = Json();
  stats["balanced_best"] = Json();
  stats["seeds"] = Json();
  for (const AlgoRun& run : cmp.runs) {
    const std::string name = kAlgoNames[static_cast<int>(run.algo)];
    stats["final_phv"][name] = cmp.final_phv.at(name);
    stats["seeds"][name] = run.seed;
    const auto& s = series[static_cast<int>(run.algo)];
    Json reach;
    for (const auto& p : s) {
      if (p.phv >= best_baseline - 1e-12) {
        reach = time_axis ? Json(p.elapsed) : Json(p.evaluations);
        break;
      }
    }
    stats["reach_best_baseline"][name] = reach;
    const Selections& sel = cmp.selections.at(name);
    stats["per_objective_best"][name] = selections_json(sel, false);
    stats["balanced_best"][name] = objective_json(cmp.balanced.at(name));
  }
  write_text(dir / "comparison.json", stats.dump(2) + "\n");
}

int cmd_compare(const CommonOpts& opts, std::ostream& out, std::ostream&) {
  const AllParams params = make_params(opts.sets);
  const Scenario sc = load_or_default(opts.scenario_path);
  const ObjectiveMask mask = ObjectiveMask::parse(opts.objectives);
  const Budget budget = make_budget(opts);
  const std::vector<int> epochs = parse_epochs(opts.epoch, sc.epoch_count);
  const bool all_day = epochs.size() > 1;

  fs::create_directories(opts.out_dir);

  std::map<std::string, Selections> daily;
  std::map<std::string, ObjectiveVector> daily_cost, daily_carbon, daily_water, daily_balanced;
  Json epoch_stats = Json::array();

  for (int epoch : epochs) {
    EpochComparison cmp = compare_epoch(sc, epoch, mask, budget, opts, params);
    const fs::path dir = all_day
                             ? fs::path(opts.out_dir) / ("epoch_" + std::to_string(epoch))
                             : fs::path(opts.out_dir);
    write_epoch_comparison(dir, cmp, sc, epoch, mask, budget, params.trace_samples);

    Json row;
    row["epoch"] = epoch;
    for (const char* name : kAlgoNames) row[name] = cmp.final_phv.at(name);
    epoch_stats.push_back(std::move(row));

    for (const char* name : kAlgoNames) {
      daily_cost[name] += cmp.selections.at(name).cost;
      daily_carbon[name] += cmp.selections.at(name).carbon;
      daily_water[name] += cmp.selections.at(name).water;
      daily_balanced[name] += cmp.balanced.at(name);
    }
    out << "epoch " << epoch << ": shield=" << cmp.final_phv.at("shield")
        << " too=" << cmp.final_phv.at("too") << " gald=" << cmp.final_phv.at("gald")
        << " dmgc=" << cmp.final_phv.at("dmgc") << "\n";
  }

  Json summary;
  summary["schema_version"] = 1;
  summary["scenario"] = sc.label;
  summary["epochs"] = all_day ? Json("all") : Json(epochs.front());
  summary["per_algorithm"] = Json();
  for (const char* name : kAlgoNames) {
    Json entry;
    entry["cost_efficient"] = objective_json(daily_cost[name]);
    entry["carbon_efficient"] = objective_json(daily_carbon[name]);
    entry["water_efficient"] = objective_json(daily_water[name]);
    entry["balanced"] = objective_json(daily_balanced[name]);
    summary["per_algorithm"][name] = std::move(entry);
  }
  write_text(fs::path(opts.out_dir) / "summary.json", summary.dump(2) + "\n");

  if (all_day) {
    Json top;
    top["schema_version"] = 1;
    top["scenario"] = sc.label;
    top["budget"] = budget_json(budget);
    top["objectives"] = mask.name();
    top["epochs"] = epoch_stats;
    write_text(fs::path(opts.out_dir) / "comparison.json", top.dump(2) + "\n");
  }
  return 0;
}

int cmd_eval(const std::string& scenario_path, const std::string& assignment_path,
             const std::string& epoch_text, bool as_json, std::ostream& out, std::ostream& err) {
  const Scenario sc = load_or_default(scenario_path);
  const AssignmentFile file = load_assignment(assignment_path);

  int epoch = 0;
  if (!epoch_text.empty()) {
    epoch = parse_epochs(epoch_text, sc.epoch_count).front();
  } else if (file.epoch) {
    epoch = *file.epoch;
  }
  if (epoch < 0 || epoch >= sc.epoch_count) {
    err << "epoch " << epoch << " out of range\n";
    return 2;
  }

  check_feasible(file.assignment, sc, epoch);
  const Evaluation ev = evaluate(file.assignment, sc, epoch);

  if (as_json) {
    Json j;
    j["schema_version"] = 1;
    j["scenario"] = sc.label;
    j["epoch"] = epoch;
    j["objectives"] = objective_json(ev.total);
    j["sites"] = Json::array();
    for (const SiteBreakdown& b : ev.sites) {
      Json s;
      s["id"] = b.dc_id;
      s["p_it"] = b.p_it;
      s["p_cooling"] = b.p_cooling;
      s["p_ipcs"] = b.p_ipcs;
      s["energy_total"] = b.energy_total;
      s["energy_brown"] = b.energy_brown;
      s["energy_clean"] = b.energy_clean;
      s["v_e"] = b.v_e;
      s["v_b"] = b.v_b;
      s["v_s"] = b.v_s;
      s["m_electricity"] = b.m_electricity;
      s["m_water"] = b.m_water;
      s["cost"] = b.cost;
      s["free_cooling"] = b.free_cooling_active;
      j["sites"].push_back(std::move(s));
    }
    out << j.dump(2) << "\n";
    return 0;
  }

  out << "epoch " << epoch << " totals: cost=$" << ev.total.cost << " carbon=" << ev.total.carbon
      << " kg, water=" << ev.total.water << " L\n";
  out << "site        P_IT(kW)  P_cool(kW)  P_IPCS(kW)  E(kWh)    brown(kWh)  cost($)   "
         "water(L)  carbon(kg)  free\n";
  for (const SiteBreakdown& b : ev.sites) {
    std::ostringstream row;
    row.setf(std::ios::fixed);
    row.precision(4);
    row << b.dc_id << "  " << b.p_it << "  " << b.p_cooling << "  " << b.p_ipcs << "  "
        << b.energy_total << "  " << b.energy_brown << "  " << b.cost << "  " << b.water()
        << "  " << b.carbon() << "  " << (b.free_cooling_active ? "yes" : "no");
    out << row.str() << "\n";
  }
  return 0;
}

int cmd_gen_scenario(int d, int t, std::uint64_t seed, const std::string& out_path,
                     std::ostream& out, std::ostream& err) {
  if (d < 1 || t < 1) {
    err << "d and t must be >= 1\n";
    return 2;
  }
  const Scenario sc = default_scenario(d, t, seed);
  save_scenario(sc, out_path);
  out << "wrote " << out_path << " (" << d << " sites, " << t << " workloads)\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geo-distributed data center sustainability optimizer"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  std::string algorithm;
  auto* run_cmd = app.add_subcommand("run", "Run one optimizer and write front/trace/summary");
  add_common(run_cmd, run_opts);
  run_cmd->add_option("--algorithm", algorithm, "shield | too | gald | dmgc")->required();

  CommonOpts cmp_opts;
  auto* cmp_cmd = app.add_subcommand("compare", "Run all four optimizers under one budget");
  add_common(cmp_cmd, cmp_opts);

  std::string eval_scenario, eval_assignment, eval_epoch;
  bool eval_json = false;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved assignment");
  eval_cmd->add_option("--scenario", eval_scenario, "Scenario file");
  eval_cmd->add_option("--assignment", eval_assignment, "Assignment file")->required();
  eval_cmd->add_option("--epoch", eval_epoch, "Epoch (defaults to the file's epoch)");
  eval_cmd->add_flag("--json", eval_json, "Machine-readable output");

  int gen_d = 16, gen_t = 5;
  std::uint64_t gen_seed = 42;
  std::string gen_out = "scenario.json";
  auto* gen_cmd = app.add_subcommand("gen-scenario", "Write a synthetic scenario file");
  gen_cmd->add_option("--d", gen_d, "Number of data centers");
  gen_cmd->add_option("--t", gen_t, "Number of workload types");
  gen_cmd->add_option("--seed", gen_seed, "Generator seed");
  gen_cmd->add_option("--out", gen_out, "Output file")->required();

  std::vector<const char*> argv;
  argv.push_back("shield");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_opts, algorithm, out, err);
    if (cmp_cmd->parsed()) return cmd_compare(cmp_opts, out, err);
    if (eval_cmd->parsed()) {
      return cmd_eval(eval_scenario, eval_assignment, eval_epoch, eval_json, out, err);
    }
    if (gen_cmd->parsed()) return cmd_gen_scenario(gen_d, gen_t, gen_seed, gen_out, out, err);
    err << "no subcommand\n";
    return 2;
  } catch (const InfeasibleScenario& e) {
    err << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const CapacityExceeded& e) {
    err << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const InvalidPremium& e) {
    err << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace shield::cli
