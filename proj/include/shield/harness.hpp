#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <vector>

#include "shield/encoding.hpp"
#include "shield/metrics.hpp"
#include "shield/scenario.hpp"
#include "shield/types.hpp"

namespace shield {

// Exactly one stopping rule per run. Generations and Evaluations budgets are
// reproducible; Seconds trades reproducibility for wall-clock comparisons.
struct Budget {
  enum class Kind { Generations, Evaluations, Seconds };
  Kind kind = Kind::Generations;
  double amount = 100.0;

  static Budget generations(long g) { return {Kind::Generations, static_cast<double>(g)}; }
  static Budget evaluations(long e) { return {Kind::Evaluations, static_cast<double>(e)}; }
  static Budget seconds(double s) { return {Kind::Seconds, s}; }
};

struct Evaluated {
  ObjectiveVector raw;
  Vector obj;  // masked objectives, the coordinates the optimizer sees
};

// Shared run state for every optimizer: the counting evaluator, the PHV
// archive, and the budget. All optimizers consume evaluations through this
// class, which is what makes their traces comparable.
//
// Threading contract: evaluate_uncommitted is pure and may run on worker
// threads; commits happen on the orchestrating thread in a deterministic
// order, so results are identical for any worker count.
class RunContext {
 public:
  RunContext(const Scenario& scenario, int epoch, ObjectiveMask mask, Budget budget,
             std::uint64_t seed, int workers);

  const Scenario& scenario() const { return scenario_; }
  int epoch() const { return epoch_; }
  const ObjectiveMask& mask() const { return mask_; }
  int arity() const { return mask_.size(); }
  std::uint64_t seed() const { return seed_; }
  int workers() const { return workers_; }
  const Budget& budget() const { return budget_; }

  long evaluations() const { return evaluations_; }
  double elapsed() const;

  // Generation-kind budgets stop the outer loop; the others stop on budget.
  bool generation_allowed(long generation) const;
  bool exhausted() const;
  long remaining_evaluations() const;

  // Pure evaluation; does not count against the budget.
  Evaluated evaluate_uncommitted(const Assignment& a) const;

  // Counts one evaluation and feeds the archive. Caller must ensure the
  // budget is not exhausted.
  void commit(const Assignment& a, const Evaluated& ev);

  // Evaluate-and-commit convenience for sequential call sites.
  Evaluated evaluate(const Assignment& a);

  // Evaluates up to remaining_evaluations() entries (a prefix of the batch),
  // in parallel when workers allow, committing in index order. Returns the
  // number evaluated; out is resized to the batch and only the prefix is
  // meaningful.
  std::size_t evaluate_batch(const std::vector<Assignment>& batch, std::vector<Evaluated>& out);

  // Records a PHV sample point; throttled to 250 ms for wall-clock budgets.
  void sample_now(bool force = false);

  PhvTracker& tracker() { return tracker_; }
  const PhvTracker& tracker() const { return tracker_; }

  struct FrontPoint {
    Assignment assignment;
    ObjectiveVector raw;
    Vector obj;
  };
  // Current all-time nondominated set with payloads, in admission order.
  std::vector<FrontPoint> front() const;

 private:
  const Scenario& scenario_;
  int epoch_;
  ObjectiveMask mask_;
  Budget budget_;
  std::uint64_t seed_;
  int workers_;
  long evaluations_ = 0;
  std::chrono::steady_clock::time_point start_;
  double last_sample_ = -1.0;
  PhvTracker tracker_;
  std::vector<Assignment> admitted_assignments_;  // parallel to tracker_.admitted()
  std::vector<ObjectiveVector> admitted_raw_;
};

// One line per generation (or annealing round) for the CLI layer.
struct GenRecord {
  long generation = 0;
  long evaluations = 0;
  Vector ideal;  // per-objective minimum seen so far, masked arity
};

// Uniform result shape across SHIELD and the baselines.
struct RunResult {
  std::vector<RunContext::FrontPoint> front;   // all-time nondominated points
  std::vector<RunContext::FrontPoint> population;  // final population snapshot
  std::vector<GenRecord> log;
  long evaluations = 0;
  double elapsed = 0.0;
  long generations = 0;
};

}  // namespace shield
