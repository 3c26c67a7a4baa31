#include "shield/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shield/metrics.hpp"
#include "shield/parallel.hpp"

namespace shield {
namespace {

enum StreamTag : std::uint64_t {
  kInitStream = 11,
  kChainStream = 12,
};

struct Individual {
  Assignment assignment;
  Evaluated value;
};

std::vector<Individual> random_population(RunContext& ctx, int n, Rng& rng) {
  std::vector<Assignment> init;
  init.reserve(n);
  for (int i = 0; i < n; ++i) init.push_back(random_assignment(ctx.scenario(), ctx.epoch(), rng));
  std::vector<Evaluated> vals(n);
  parallel_for(ctx.workers(), n,
               [&](std::size_t i) { vals[i] = ctx.evaluate_uncommitted(init[i]); });
  std::vector<Individual> pop(n);
  for (int i = 0; i < n; ++i) {
    ctx.commit(init[i], vals[i]);
    pop[i] = {std::move(init[i]), std::move(vals[i])};
  }
  return pop;
}

RunResult finish(RunContext& ctx, const std::vector<Individual>& pop, long generations,
                 std::vector<GenRecord> log) {
  ctx.sample_now(true);
  RunResult res;
  res.log = std::move(log);
  res.front = ctx.front();
  for (const Individual& ind : pop) {
    res.population.push_back({ind.assignment, ind.value.raw, ind.value.obj});
  }
  res.evaluations = ctx.evaluations();
  res.elapsed = ctx.elapsed();
  res.generations = generations;
  return res;
}

}  // namespace

bool metropolis_accept(double delta_g, double temperature, Rng& rng) {
  if (delta_g < 0.0) return true;
  if (temperature <= 0.0) return false;
  return uniform01(rng) < std::exp(-delta_g / temperature);
}

std::vector<double> crowding_distance(const std::vector<Vector>& points) {
  const int n = static_cast<int>(points.size());
  std::vector<double> dist(n, 0.0);
  if (n == 0) return dist;
  const int m = static_cast<int>(points[0].size());
  constexpr double kInf = std::numeric_limits<double>::infinity();

  for (int axis = 0; axis < m; ++axis) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return points[a][axis] < points[b][axis];
    });
    dist[order.front()] = kInf;
    dist[order.back()] = kInf;
    const double range = points[order.back()][axis] - points[order.front()][axis];
    if (range <= 0.0) continue;
    for (int i = 1; i + 1 < n; ++i) {
      if (dist[order[i]] == kInf) continue;
      dist[order[i]] += (points[order[i + 1]][axis] - points[order[i - 1]][axis]) / range;
    }
  }
  return dist;
}

std::vector<int> nondominated_rank(const std::vector<Vector>& points) {
  const int n = static_cast<int>(points.size());
  std::vector<int> rank(n, -1);
  int assigned = 0;
  int level = 0;
  while (assigned < n) {
    // Collect first, assign after: membership is decided against the set of
    // points still unranked at the start of the pass.
    std::vector<int> current;
    for (int i = 0; i < n; ++i) {
      if (rank[i] >= 0) continue;
      bool dominated = false;
      for (int j = 0; j < n && !dominated; ++j) {
        if (j == i || rank[j] >= 0) continue;
        if (dominates(points[j], points[i])) dominated = true;
      }
      if (!dominated) current.push_back(i);
    }
    for (int i : current) rank[i] = level;
    assigned += static_cast<int>(current.size());
    ++level;
  }
  return rank;
}

// ---------------------------------------------------------------------------
// TOO: weight-parallel simulated annealing.
// ---------------------------------------------------------------------------

RunResult run_too(RunContext& ctx, const BaselineParams& params) {
  const int n = params.population;
  Rng rng = make_rng(derive_seed(ctx.seed(), kInitStream));
  const std::vector<Vector> weights = make_weights(n, ctx.arity());

  std::vector<Individual> chains = random_population(ctx, n, rng);
  Vector ideal = chains[0].value.obj;
  Vector nadir = chains[0].value.obj;
  for (const Individual& c : chains) {
    ideal = ideal.cwiseMin(c.value.obj);
    nadir = nadir.cwiseMax(c.value.obj);
  }
  ctx.sample_now(true);

  std::vector<Rng> chain_rng;
  chain_rng.reserve(n);
  for (int c = 0; c < n; ++c) chain_rng.push_back(make_rng(derive_seed(ctx.seed(), kChainStream, c)));

  // Calibrate per-chain temperatures so a typical worsening move starts at
  // roughly the target acceptance probability.
  std::vector<double> temperature(n, params.sa.t0);
  if (params.sa.t0 <= 0.0) {
    std::vector<Assignment> probes;
    for (int c = 0; c < n; ++c) {
      for (int p = 0; p < params.sa.probes; ++p) {
        probes.push_back(
            neighbor(chains[c].assignment, ctx.scenario(), ctx.epoch(), params.moves,
                     chain_rng[c]));
      }
    }
    std::vector<Evaluated> vals;
    const std::size_t evaluated = ctx.evaluate_batch(probes, vals);
    for (int c = 0; c < n; ++c) {
      double worsening = 0.0;
      int count = 0;
      const double g_cur = scalarize(chains[c].value.obj, weights[c], ideal, nadir);
      for (int p = 0; p < params.sa.probes; ++p) {
        const std::size_t k = static_cast<std::size_t>(c) * params.sa.probes + p;
        if (k >= evaluated) break;
        const double delta = scalarize(vals[k].obj, weights[c], ideal, nadir) - g_cur;
        if (delta > 0.0) {
          worsening += delta;
          ++count;
        }
        ideal = ideal.cwiseMin(vals[k].obj);
        nadir = nadir.cwiseMax(vals[k].obj);
      }
      temperature[c] =
          count > 0 ? (worsening / count) / std::log(1.0 / params.sa.target_accept) : 1e-3;
    }
  }

  struct BlockResult {
    std::vector<std::pair<Assignment, Evaluated>> visited;
    Assignment endpoint;
    Evaluated end_value;
  };

  std::vector<GenRecord> log;
  long round = 0;
  while (ctx.generation_allowed(round) && !ctx.exhausted()) {
    const Vector ideal_frozen = ideal;
    const Vector nadir_frozen = nadir;

    auto run_block = [&](int c, long cap, Rng& r) {
      BlockResult br;
      br.endpoint = chains[c].assignment;
      br.end_value = chains[c].value;
      double g_cur = scalarize(br.end_value.obj, weights[c], ideal_frozen, nadir_frozen);
      for (int s = 0; s < params.sa.steps_per_temp && s < cap; ++s) {
        Assignment cand = neighbor(br.endpoint, ctx.scenario(), ctx.epoch(), params.moves, r);
        Evaluated ev = ctx.evaluate_uncommitted(cand);
        br.visited.emplace_back(cand, ev);
        const double g_new = scalarize(ev.obj, weights[c], ideal_frozen, nadir_frozen);
        if (metropolis_accept(g_new - g_cur, temperature[c], r)) {
          br.endpoint = std::move(cand);
          br.end_value = std::move(ev);
          g_cur = g_new;
        }
      }
      return br;
    };

    std::vector<BlockResult> blocks(n);
    const long wave_worst = static_cast<long>(n) * params.sa.steps_per_temp;
    if (ctx.remaining_evaluations() >= wave_worst) {
      parallel_for(ctx.workers(), n, [&](std::size_t c) {
        blocks[c] = run_block(static_cast<int>(c), params.sa.steps_per_temp,
                              chain_rng[c]);
      });
      for (int c = 0; c < n; ++c) {
        for (const auto& [a, ev] : blocks[c].visited) ctx.commit(a, ev);
      }
    } else {
      for (int c = 0; c < n; ++c) {
        blocks[c] = run_block(c, ctx.remaining_evaluations(), chain_rng[c]);
        for (const auto& [a, ev] : blocks[c].visited) ctx.commit(a, ev);
      }
    }

    for (int c = 0; c < n; ++c) {
      chains[c].assignment = std::move(blocks[c].endpoint);
      chains[c].value = std::move(blocks[c].end_value);
      for (const auto& [a, ev] : blocks[c].visited) {
        ideal = ideal.cwiseMin(ev.obj);
        nadir = nadir.cwiseMax(ev.obj);
      }
      temperature[c] *= params.sa.alpha;
    }

    log.push_back({round, ctx.evaluations(), ideal});
    ++round;
    ctx.sample_now();
  }
  return finish(ctx, chains, round, std::move(log));
}

// ---------------------------------------------------------------------------
// GALD: generational GA with nondominated sorting.
// ---------------------------------------------------------------------------

namespace {

int tournament_pick(const std::vector<int>& rank, const std::vector<double>& crowd, int size,
                    int n, Rng& rng) {
  int best = uniform_int(rng, 0, n - 1);
  for (int t = 1; t < size; ++t) {
    const int challenger = uniform_int(rng, 0, n - 1);
    if (rank[challenger] < rank[best] ||
        (rank[challenger] == rank[best] && crowd[challenger] > crowd[best])) {
      best = challenger;
    }
  }
  return best;
}

}  // namespace

RunResult run_gald(RunContext& ctx, const BaselineParams& params) {
  const int n = params.population;
  Rng rng = make_rng(derive_seed(ctx.seed(), kInitStream));
  std::vector<Individual> pop = random_population(ctx, n, rng);
  Vector ideal = pop[0].value.obj;
  for (const Individual& ind : pop) ideal = ideal.cwiseMin(ind.value.obj);
  ctx.sample_now(true);

  std::vector<GenRecord> log;
  long gen = 0;
  while (ctx.generation_allowed(gen) && !ctx.exhausted()) {
    std::vector<Vector> objs(n);
    for (int i = 0; i < n; ++i) objs[i] = pop[i].value.obj;
    const std::vector<int> rank = nondominated_rank(objs);
    const std::vector<double> crowd = crowding_distance(objs);

    std::vector<Assignment> offspring;
    offspring.reserve(n);
    for (int c = 0; c < n; ++c) {
      const int p1 = tournament_pick(rank, crowd, params.ga.tournament, n, rng);
      const int p2 = tournament_pick(rank, crowd, params.ga.tournament, n, rng);
      Assignment child = uniform01(rng) < params.ga.crossover_prob
                             ? crossover(pop[p1].assignment, pop[p2].assignment,
                                         ctx.scenario(), ctx.epoch(), rng)
                             : pop[p1].assignment;
      offspring.push_back(
          mutate(child, params.ga.mutation_sigma, ctx.scenario(), ctx.epoch(), rng));
    }
    std::vector<Evaluated> vals;
    const std::size_t evaluated = ctx.evaluate_batch(offspring, vals);
    for (std::size_t c = 0; c < evaluated; ++c) ideal = ideal.cwiseMin(vals[c].obj);

    // Elitist survival over parents plus evaluated children.
    std::vector<Individual> mixed = pop;
    for (std::size_t c = 0; c < evaluated; ++c) {
      mixed.push_back({std::move(offspring[c]), std::move(vals[c])});
    }
    std::vector<Vector> mixed_objs(mixed.size());
    for (std::size_t i = 0; i < mixed.size(); ++i) mixed_objs[i] = mixed[i].value.obj;
    const std::vector<int> mixed_rank = nondominated_rank(mixed_objs);
    const std::vector<double> mixed_crowd = crowding_distance(mixed_objs);

    std::vector<int> order(mixed.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if (mixed_rank[a] != mixed_rank[b]) return mixed_rank[a] < mixed_rank[b];
      return mixed_crowd[a] > mixed_crowd[b];
    });
    std::vector<Individual> next;
    next.reserve(n);
    for (int i = 0; i < n; ++i) next.push_back(std::move(mixed[order[i]]));
    pop = std::move(next);

    log.push_back({gen, ctx.evaluations(), ideal});
    ++gen;
    ctx.sample_now();
  }
  return finish(ctx, pop, gen, std::move(log));
}

// ---------------------------------------------------------------------------
// DMGC: Tchebycheff decomposition with Gaussian mutation and a
// crowding-truncated archive.
// ---------------------------------------------------------------------------

RunResult run_dmgc(RunContext& ctx, const BaselineParams& params) {
  const int n = params.population;
  const int capacity = params.dmgc.archive_capacity > 0 ? params.dmgc.archive_capacity : n;
  Rng rng = make_rng(derive_seed(ctx.seed(), kInitStream));
  const std::vector<Vector> weights = make_weights(n, ctx.arity());

  // K nearest weights (self included) per subproblem.
  const int k = std::clamp(params.dmgc.neighbors, 1, n);
  std::vector<std::vector<int>> hood(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return (weights[a] - weights[i]).norm() < (weights[b] - weights[i]).norm();
    });
    hood[i].assign(order.begin(), order.begin() + k);
  }

  std::vector<Individual> pop = random_population(ctx, n, rng);
  Vector ideal = pop[0].value.obj;
  Vector nadir = pop[0].value.obj;
  auto refresh_nadir = [&]() {
    nadir = pop[0].value.obj;
    for (const Individual& ind : pop) nadir = nadir.cwiseMax(ind.value.obj);
  };
  for (const Individual& ind : pop) ideal = ideal.cwiseMin(ind.value.obj);
  refresh_nadir();
  ctx.sample_now(true);

  std::vector<Individual> archive;
  auto archive_insert = [&](const Individual& ind) {
    for (const Individual& kept : archive) {
      if (kept.value.obj == ind.value.obj || dominates(kept.value.obj, ind.value.obj)) return;
    }
    std::erase_if(archive, [&](const Individual& kept) {
      return dominates(ind.value.obj, kept.value.obj);
    });
    archive.push_back(ind);
    if (static_cast<int>(archive.size()) > capacity) {
      std::vector<Vector> objs(archive.size());
      for (std::size_t i = 0; i < archive.size(); ++i) objs[i] = archive[i].value.obj;
      const std::vector<double> crowd = crowding_distance(objs);
      int drop = 0;
      for (std::size_t i = 1; i < archive.size(); ++i) {
        if (crowd[i] < crowd[drop]) drop = static_cast<int>(i);
      }
      archive.erase(archive.begin() + drop);
    }
  };
  for (const Individual& ind : pop) archive_insert(ind);

  std::vector<GenRecord> log;
  long gen = 0;
  while (ctx.generation_allowed(gen) && !ctx.exhausted()) {
    std::vector<Assignment> offspring;
    offspring.reserve(n);
    for (int i = 0; i < n; ++i) {
      const int a = hood[i][uniform_int(rng, 0, k - 1)];
      const int b = hood[i][uniform_int(rng, 0, k - 1)];
      Assignment child =
          crossover(pop[a].assignment, pop[b].assignment, ctx.scenario(), ctx.epoch(), rng);
      offspring.push_back(mutate(child, params.dmgc.sigma, ctx.scenario(), ctx.epoch(), rng));
    }
    std::vector<Evaluated> vals;
    const std::size_t evaluated = ctx.evaluate_batch(offspring, vals);

    for (std::size_t i = 0; i < evaluated; ++i) {
      ideal = ideal.cwiseMin(vals[i].obj);
      for (int j : hood[i]) {
        const double g_new = tchebycheff(vals[i].obj, weights[j], ideal, nadir);
        const double g_old = tchebycheff(pop[j].value.obj, weights[j], ideal, nadir);
        if (g_new < g_old) pop[j] = {offspring[i], vals[i]};
      }
      archive_insert({offspring[i], vals[i]});
    }
    refresh_nadir();

    log.push_back({gen, ctx.evaluations(), ideal});
    ++gen;
    ctx.sample_now();
  }

  return finish(ctx, archive, gen, std::move(log));
}

}  // namespace shield
