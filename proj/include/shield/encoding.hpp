#pragma once

#include <filesystem>
#include <optional>

#include "shield/rng.hpp"
#include "shield/types.hpp"

namespace shield {

struct Scenario;

// One candidate decision for one epoch: how much of each workload's global
// arrival rate lands at each site, and what clean-premium fraction each site
// buys. Column j of rates sums to GAR_j; rho is zero wherever no premium is
// sold.
struct Assignment {
  Matrix rates;  // sites x workload types, jobs/hour
  Vector rho;    // per-site clean fraction in [0, 1]
};

struct MoveParams {
  double delta_frac = 0.1;   // transferred mass as a fraction of GAR_j
  double delta_rho = 0.1;    // rho perturbation step
  double p_move_rate = 0.8;  // probability the move touches rates (else rho)
};

// Uniform random feasible point: every workload column is a random point on
// the GAR_j-scaled simplex; rho uniform on premium sites. Capacity-checked
// with bounded redraws, then repaired.
Assignment random_assignment(const Scenario& scenario, int epoch, Rng& rng);

// Projects an arbitrary candidate back into the feasible set: clamps
// negatives, rescales each workload column to its GAR (uniform split when a
// column is all zero), clamps rho and zeroes it where premium is unavailable,
// and shifts overload to the least-utilized sites, largest excess first.
// Already-feasible inputs pass through bit-identically.
Assignment repair(const Assignment& a, const Scenario& scenario, int epoch);

// One local move: either transfer up to delta_frac*GAR_j of one workload
// between two sites, or nudge one premium site's rho; repaired afterwards.
Assignment neighbor(const Assignment& a, const Scenario& scenario, int epoch,
                    const MoveParams& params, Rng& rng);

// Arithmetic blend with a fresh lambda per workload column (and one for rho).
Assignment crossover(const Assignment& a, const Assignment& b, const Scenario& scenario,
                     int epoch, Rng& rng);

// Gaussian perturbation: per-entry noise scaled by strength*GAR_j on rates
// and strength on rho; repaired afterwards.
Assignment mutate(const Assignment& a, double strength, const Scenario& scenario, int epoch,
                  Rng& rng);

// Throws (ValidationError / InfeasibleScenario / CapacityExceeded) when the
// assignment breaks shape, rate conservation, rho bounds, premium zeroing,
// or site capacity; names the offending workload or site.
void check_feasible(const Assignment& a, const Scenario& scenario, int epoch,
                    double tol = kRateTol);

bool is_feasible(const Assignment& a, const Scenario& scenario, int epoch,
                 double tol = kRateTol);

// Structured-text import/export for the CLI eval subcommand.
struct AssignmentFile {
  Assignment assignment;
  std::optional<int> epoch;
};
AssignmentFile load_assignment(const std::filesystem::path& path);
void save_assignment(const Assignment& a, std::optional<int> epoch,
                     const std::filesystem::path& path);

}  // namespace shield
