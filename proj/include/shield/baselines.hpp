#pragma once

#include <vector>

#include "shield/harness.hpp"
#include "shield/shield.hpp"

namespace shield {

struct SaParams {
  double t0 = 0.0;            // 0 auto-calibrates toward target_accept
  double alpha = 0.95;        // geometric cooling factor
  int steps_per_temp = 20;    // proposals per temperature level
  double target_accept = 0.8; // initial worsening-move acceptance
  int probes = 5;             // calibration proposals per chain
};

struct GaParams {
  double crossover_prob = 0.9;
  double mutation_sigma = 0.05;
  int tournament = 2;
};

struct DmgcParams {
  int neighbors = 5;           // weight-space neighborhood size
  double sigma = 0.05;         // Gaussian mutation strength
  int archive_capacity = 0;    // 0 means population size
};

struct BaselineParams {
  int population = 30;  // chains (TOO) / population (GALD, DMGC)
  MoveParams moves;
  SaParams sa;
  GaParams ga;
  DmgcParams dmgc;
};

// Metropolis rule: improvements always pass, worsenings pass with
// exp(-delta/T).
bool metropolis_accept(double delta_g, double temperature, Rng& rng);

// Per-point crowding distance with per-axis range normalization; boundary
// points get +infinity, exact duplicates resolve by index order.
std::vector<double> crowding_distance(const std::vector<Vector>& points);

// Nondominated sorting ranks, 0 = best front.
std::vector<int> nondominated_rank(const std::vector<Vector>& points);

// Weight-parallel simulated annealing: one chain per weight vector, shared
// weight set and evaluation with SHIELD.
RunResult run_too(RunContext& ctx, const BaselineParams& params);

// Generational GA with tournament selection on (rank, crowding) and elitist
// nondominated-sorting survival.
RunResult run_gald(RunContext& ctx, const BaselineParams& params);

// Tchebycheff decomposition with neighborhood mating, Gaussian-mutated blend
// crossover, neighbor replacement, and a crowding-truncated archive.
RunResult run_dmgc(RunContext& ctx, const BaselineParams& params);

}  // namespace shield
