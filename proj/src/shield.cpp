#include "shield/shield.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shield/errors.hpp"
#include "shield/parallel.hpp"

namespace shield {
namespace {

// Stream tags keeping derived seeds disjoint across uses.
enum StreamTag : std::uint64_t {
  kMainStream = 1,
  kSearchStream = 2,
  kForestStream = 3,
};

void compositions(int total, int parts, std::vector<int>& prefix,
                  std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    prefix.push_back(total);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int head = total; head >= 0; --head) {
    prefix.push_back(head);
    compositions(total - head, parts - 1, prefix, out);
    prefix.pop_back();
  }
}

// Distinct indices drawn without replacement, ascending.
std::vector<int> sample_indices(int n, int k, Rng& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::swap(idx[i], idx[uniform_int(rng, i, n - 1)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

std::vector<Vector> make_weights(int n, int m) {
  if (n < m || m < 1) throw std::invalid_argument("make_weights: need n >= m >= 1");
  if (m == 1) return std::vector<Vector>(n, Vector::Ones(1));

  // Smallest lattice resolution covering the request.
  int h = 1;
  auto lattice_size = [&](int res) {
    long long size = 1;
    for (int i = 1; i < m; ++i) size = size * (res + i) / i;  // C(res+m-1, m-1)
    return size;
  };
  while (lattice_size(h) < n) ++h;

  std::vector<std::vector<int>> grid;
  std::vector<int> prefix;
  compositions(h, m, prefix, grid);

  std::vector<Vector> points;
  points.reserve(grid.size());
  for (const auto& c : grid) {
    Vector w(m);
    for (int i = 0; i < m; ++i) w[i] = static_cast<double>(c[i]) / h;
    points.push_back(std::move(w));
  }
  if (static_cast<int>(points.size()) == n) return points;

  // Deterministic subsample: seed with the unit vectors, then greedily add
  // the point farthest from everything selected.
  std::vector<char> selected(points.size(), 0);
  int chosen = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].maxCoeff() == 1.0) {
      selected[i] = 1;
      ++chosen;
    }
  }
  std::vector<double> min_dist(points.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (selected[i]) {
      for (std::size_t j = 0; j < points.size(); ++j) {
        min_dist[j] = std::min(min_dist[j], (points[j] - points[i]).norm());
      }
    }
  }
  while (chosen < n) {
    int best = -1;
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (selected[j]) continue;
      if (best < 0 || min_dist[j] > min_dist[best]) best = static_cast<int>(j);
    }
    if (best < 0) break;  // n <= lattice size keeps this unreachable
    selected[best] = 1;
    ++chosen;
    for (std::size_t j = 0; j < points.size(); ++j) {
      min_dist[j] = std::min(min_dist[j], (points[j] - points[best]).norm());
    }
  }

  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (selected[i]) out.push_back(points[i]);
  }
  return out;
}

double scalarize(const Vector& obj, const Vector& weight, const Vector& ideal,
                 const Vector& nadir) {
  double g = 0.0;
  for (int i = 0; i < obj.size(); ++i) {
    const double denom = nadir[i] > ideal[i] ? nadir[i] - ideal[i] : 1.0;
    g += weight[i] * std::abs(obj[i] - ideal[i]) / denom;
  }
  return g;
}

double tchebycheff(const Vector& obj, const Vector& weight, const Vector& ideal,
                   const Vector& nadir) {
  double g = 0.0;
  for (int i = 0; i < obj.size(); ++i) {
    const double denom = nadir[i] > ideal[i] ? nadir[i] - ideal[i] : 1.0;
    g = std::max(g, weight[i] * std::abs(obj[i] - ideal[i]) / denom);
  }
  return g;
}

Vector make_features(const Assignment& a, const Vector& weight, const Scenario& scenario,
                     int epoch) {
  const int d = scenario.site_count();
  const int t = scenario.workload_count();
  const Vector gar = epoch_demand(scenario, epoch);
  Vector out(d * t + d + weight.size());
  int at = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < t; ++j) {
      out[at++] = gar[j] > 0.0 ? a.rates(i, j) / gar[j] : 0.0;
    }
  }
  for (int i = 0; i < d; ++i) out[at++] = a.rho[i];
  for (int i = 0; i < weight.size(); ++i) out[at++] = weight[i];
  return out;
}

bool SearchPopulation::lower_ideal(const Vector& obj) {
  bool changed = false;
  for (int i = 0; i < ideal.size(); ++i) {
    if (obj[i] < ideal[i]) {
      ideal[i] = obj[i];
      changed = true;
    }
  }
  return changed;
}

void SearchPopulation::refresh_nadir() {
  nadir = slots.front().obj;
  for (const Slot& s : slots) nadir = nadir.cwiseMax(s.obj);
}

void SearchPopulation::refresh_g() {
  for (std::size_t i = 0; i < slots.size(); ++i) {
    slots[i].g = scalarize(slots[i].obj, weights[i], ideal, nadir);
  }
}

LocalSearchResult local_search(const RunContext& ctx, const Slot& start, const Vector& weight,
                               const Vector& ideal, const Vector& nadir,
                               const ShieldParams& params, Rng& rng, long eval_cap) {
  LocalSearchResult res;
  res.endpoint = start.assignment;
  res.value = {start.raw, start.obj};
  res.g = scalarize(start.obj, weight, ideal, nadir);
  res.accepted_g.push_back(res.g);

  std::vector<Assignment> accepted_designs{start.assignment};

  int rejects = 0;
  long evals = 0;
  for (int step = 0; step < params.max_steps && rejects < params.patience && evals < eval_cap;
       ++step) {
    Assignment candidate =
        neighbor(res.endpoint, ctx.scenario(), ctx.epoch(), params.moves, rng);
    Evaluated ev = ctx.evaluate_uncommitted(candidate);
    ++evals;
    res.visited.emplace_back(candidate, ev);
    const double g_new = scalarize(ev.obj, weight, ideal, nadir);
    if (g_new < res.g) {
      res.endpoint = std::move(candidate);
      res.value = std::move(ev);
      res.g = g_new;
      res.accepted_g.push_back(g_new);
      accepted_designs.push_back(res.endpoint);
      rejects = 0;
    } else {
      ++rejects;
    }
  }

  res.trajectory.reserve(accepted_designs.size());
  for (const Assignment& a : accepted_designs) {
    res.trajectory.push_back({make_features(a, weight, ctx.scenario(), ctx.epoch()), res.g});
  }
  return res;
}

std::vector<int> select_starts(const SearchPopulation& pop, const std::vector<int>& priority,
                               const ShieldParams& params, const Scenario& scenario, int epoch,
                               Rng& rng) {
  const int n = static_cast<int>(pop.slots.size());
  const int n_local = std::clamp(params.n_local, 1, n);

  if (pop.generation < params.iter_early || !pop.model) {
    return sample_indices(n, n_local, rng);
  }

  std::vector<double> improvement(n);
  for (int i = 0; i < n; ++i) {
    const Vector features =
        make_features(pop.slots[i].assignment, pop.weights[i], scenario, epoch);
    improvement[i] = pop.slots[i].g - pop.model->predict(features);
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return improvement[a] > improvement[b];
  });
  order.resize(n_local);

  for (int p : priority) {
    if (std::find(order.begin(), order.end(), p) == order.end()) order.push_back(p);
  }
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<Assignment> propagate(const SearchPopulation& pop, const std::vector<int>& starts,
                                  const std::vector<int>& rest, const ShieldParams& params,
                                  const Scenario& scenario, int epoch, Rng& rng) {
  const int count = params.n_offspring > 0 ? params.n_offspring
                                           : static_cast<int>(pop.slots.size());
  std::vector<Assignment> offspring;
  offspring.reserve(count);
  for (int c = 0; c < count; ++c) {
    const int a = starts[uniform_int(rng, 0, static_cast<int>(starts.size()) - 1)];
    const int b = rest[uniform_int(rng, 0, static_cast<int>(rest.size()) - 1)];
    Assignment child =
        crossover(pop.slots[a].assignment, pop.slots[b].assignment, scenario, epoch, rng);
    offspring.push_back(mutate(child, params.mut_sigma, scenario, epoch, rng));
  }
  return offspring;
}

void update_population(SearchPopulation& pop, const Assignment& a, const Evaluated& ev,
                       const ShieldParams& params, Rng& rng) {
  if (pop.lower_ideal(ev.obj)) pop.refresh_g();
  const int n = static_cast<int>(pop.slots.size());
  const std::vector<int> challenged =
      sample_indices(n, std::clamp(params.n_compare, 1, n), rng);
  for (int j : challenged) {
    const double g_off = scalarize(ev.obj, pop.weights[j], pop.ideal, pop.nadir);
    if (g_off < pop.slots[j].g) {
      pop.slots[j] = Slot{a, ev.raw, ev.obj, g_off};
    }
  }
}

RunResult run_shield(RunContext& ctx, ShieldParams params) {
  const Scenario& sc = ctx.scenario();
  const int epoch = ctx.epoch();
  const int n = params.population;
  if (params.n_offspring <= 0) params.n_offspring = n;

  Rng rng = make_rng(derive_seed(ctx.seed(), kMainStream));

  SearchPopulation pop;
  pop.weights = make_weights(n, ctx.arity());
  std::vector<int> priority;
  for (int i = 0; i < n; ++i) {
    if (pop.weights[i].maxCoeff() == 1.0) priority.push_back(i);
  }

  // Initial population; evaluated unconditionally (the floor cost of a run).
  std::vector<Assignment> init;
  init.reserve(n);
  for (int i = 0; i < n; ++i) init.push_back(random_assignment(sc, epoch, rng));
  std::vector<Evaluated> vals(n);
  parallel_for(ctx.workers(), n,
               [&](std::size_t i) { vals[i] = ctx.evaluate_uncommitted(init[i]); });
  for (int i = 0; i < n; ++i) ctx.commit(init[i], vals[i]);

  pop.slots.resize(n);
  pop.ideal = vals[0].obj;
  for (int i = 0; i < n; ++i) {
    pop.slots[i] = Slot{std::move(init[i]), vals[i].raw, vals[i].obj, 0.0};
    pop.ideal = pop.ideal.cwiseMin(vals[i].obj);
  }
  pop.refresh_nadir();
  pop.refresh_g();
  ctx.sample_now(true);

  std::vector<GenRecord> log;
  long gen = 0;
  while (ctx.generation_allowed(gen) && !ctx.exhausted()) {
    pop.generation = gen;

    const std::vector<int> starts = select_starts(pop, priority, params, sc, epoch, rng);
    std::vector<LocalSearchResult> searched(starts.size());

    const long wave_worst = static_cast<long>(starts.size()) * params.max_steps;
    if (ctx.remaining_evaluations() >= wave_worst) {
      parallel_for(ctx.workers(), starts.size(), [&](std::size_t i) {
        Rng sr = make_rng(derive_seed(ctx.seed(), kSearchStream, gen, starts[i]));
        searched[i] = local_search(ctx, pop.slots[starts[i]], pop.weights[starts[i]], pop.ideal,
                                   pop.nadir, params, sr, params.max_steps);
      });
      for (const auto& r : searched) {
        for (const auto& [a, ev] : r.visited) ctx.commit(a, ev);
      }
    } else {
      // Budget tail: run searches in slot order, each capped by what is left.
      for (std::size_t i = 0; i < starts.size(); ++i) {
        Rng sr = make_rng(derive_seed(ctx.seed(), kSearchStream, gen, starts[i]));
        searched[i] = local_search(ctx, pop.slots[starts[i]], pop.weights[starts[i]], pop.ideal,
                                   pop.nadir, params, sr, ctx.remaining_evaluations());
        for (const auto& [a, ev] : searched[i].visited) ctx.commit(a, ev);
      }
    }

    // Endpoints replace their starting slots; trajectories feed the buffer.
    for (std::size_t i = 0; i < starts.size(); ++i) {
      Slot& slot = pop.slots[starts[i]];
      slot.assignment = searched[i].endpoint;
      slot.raw = searched[i].value.raw;
      slot.obj = searched[i].value.obj;
      for (auto& row : searched[i].trajectory) pop.train_buffer.push_back(std::move(row));
      for (const auto& [a, ev] : searched[i].visited) pop.lower_ideal(ev.obj);
    }

    if (gen >= params.iter_early && (gen - params.iter_early) % params.f_update == 0 &&
        static_cast<int>(pop.train_buffer.size()) >= params.forest.min_train_rows) {
      Rng fr = make_rng(derive_seed(ctx.seed(), kForestStream, gen));
      pop.model = fit(pop.train_buffer, params.forest, fr);
      pop.train_buffer.clear();
    }

    pop.refresh_nadir();
    pop.refresh_g();

    std::vector<int> rest;
    for (int i = 0; i < n; ++i) {
      if (std::find(starts.begin(), starts.end(), i) == starts.end()) rest.push_back(i);
    }
    if (rest.empty()) rest.assign(starts.begin(), starts.end());

    std::vector<Assignment> offspring =
        propagate(pop, starts, rest, params, sc, epoch, rng);
    std::vector<Evaluated> off_vals;
    const std::size_t evaluated = ctx.evaluate_batch(offspring, off_vals);
    for (std::size_t c = 0; c < evaluated; ++c) {
      update_population(pop, offspring[c], off_vals[c], params, rng);
    }

    pop.refresh_nadir();
    pop.refresh_g();

    log.push_back({gen, ctx.evaluations(), pop.ideal});
    ++gen;
    ctx.sample_now();
  }
  ctx.sample_now(true);

  RunResult res;
  res.log = std::move(log);
  res.front = ctx.front();
  for (const Slot& s : pop.slots) res.population.push_back({s.assignment, s.raw, s.obj});
  res.evaluations = ctx.evaluations();
  res.elapsed = ctx.elapsed();
  res.generations = gen;
  return res;
}

}  // namespace shield
