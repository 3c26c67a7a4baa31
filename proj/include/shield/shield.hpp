#pragma once

#include <optional>
#include <vector>

#include "shield/encoding.hpp"
#include "shield/harness.hpp"
#include "shield/learner.hpp"
#include "shield/types.hpp"

namespace shield {

// Evenly spread weight vectors on the M-simplex: the smallest Das-Dennis
// lattice with at least n points, subsampled to exactly n by a deterministic
// max-min-distance rule that always keeps the M unit vectors.
std::vector<Vector> make_weights(int n, int m);

// Weighted-sum scalarization over min-max normalized objectives. Axes where
// nadir does not exceed the ideal fall back to a unit normalizer.
double scalarize(const Vector& obj, const Vector& weight, const Vector& ideal,
                 const Vector& nadir);

// Tchebycheff scalarization under the same normalization (decomposition
// baseline).
double tchebycheff(const Vector& obj, const Vector& weight, const Vector& ideal,
                   const Vector& nadir);

// Learner features: GAR-normalized rates, rho, then the weight vector.
Vector make_features(const Assignment& a, const Vector& weight, const Scenario& scenario,
                     int epoch);

struct ShieldParams {
  int population = 30;   // N
  int n_local = 6;       // local searches per generation
  int f_update = 50;     // model retrain cadence past iter_early
  int iter_early = 500;  // generations of random start selection
  int max_steps = 100;   // proposals per local search
  int patience = 20;     // consecutive rejects before stopping
  int n_compare = 2;     // random slots an offspring challenges
  int n_offspring = 0;   // 0 means population size
  double mut_sigma = 0.05;
  MoveParams moves;
  ForestParams forest;
};

struct Slot {
  Assignment assignment;
  ObjectiveVector raw;
  Vector obj;
  double g = 0.0;
};

struct SearchPopulation {
  std::vector<Slot> slots;
  std::vector<Vector> weights;
  Vector ideal;
  Vector nadir;
  std::vector<TrainRow> train_buffer;
  std::optional<ForestModel> model;
  long generation = 0;

  // Lowers the ideal point; returns whether anything changed.
  bool lower_ideal(const Vector& obj);
  // Componentwise max over the current population.
  void refresh_nadir();
  // Recomputes every slot's g under the current ideal/nadir; must run
  // whenever either bound changes so no scalarization goes stale.
  void refresh_g();
};

struct LocalSearchResult {
  Assignment endpoint;
  Evaluated value;
  double g = 0.0;                   // endpoint g under the search's frozen bounds
  std::vector<double> accepted_g;   // starts with the start's g, strictly falling
  std::vector<TrainRow> trajectory; // start + accepted designs, labeled with final g
  std::vector<std::pair<Assignment, Evaluated>> visited;  // every proposal evaluated
};

// Greedy first-improvement descent with the slot's weight under frozen
// (ideal, nadir). eval_cap bounds evaluations; evaluations are left
// uncommitted for the caller to commit in deterministic order.
LocalSearchResult local_search(const RunContext& ctx, const Slot& start, const Vector& weight,
                               const Vector& ideal, const Vector& nadir,
                               const ShieldParams& params, Rng& rng, long eval_cap);

// Start selection: random before iter_early (or when no model exists), else
// the n_local slots with the largest predicted g improvement plus the
// unit-weight priority slots.
std::vector<int> select_starts(const SearchPopulation& pop, const std::vector<int>& priority,
                               const ShieldParams& params, const Scenario& scenario, int epoch,
                               Rng& rng);

// Knowledge propagation: children are mutated blends of a locally-searched
// slot and an unsearched one.
std::vector<Assignment> propagate(const SearchPopulation& pop, const std::vector<int>& starts,
                                  const std::vector<int>& rest, const ShieldParams& params,
                                  const Scenario& scenario, int epoch, Rng& rng);

// Offspring challenge: lower the ideal, then fight n_compare random slots
// under their own weights; strict improvement replaces the slot.
void update_population(SearchPopulation& pop, const Assignment& a, const Evaluated& ev,
                       const ShieldParams& params, Rng& rng);

RunResult run_shield(RunContext& ctx, ShieldParams params);

}  // namespace shield
