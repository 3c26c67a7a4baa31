#include "shield/harness.hpp"

#include <cassert>
#include <stdexcept>

#include "shield/model.hpp"
#include "shield/parallel.hpp"

namespace shield {

RunContext::RunContext(const Scenario& scenario, int epoch, ObjectiveMask mask, Budget budget,
                       std::uint64_t seed, int workers)
    : scenario_(scenario),
      epoch_(epoch),
      mask_(std::move(mask)),
      budget_(budget),
      seed_(seed),
      workers_(workers),
      start_(std::chrono::steady_clock::now()),
      tracker_(mask_.size()) {}

double RunContext::elapsed() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

bool RunContext::generation_allowed(long generation) const {
  if (budget_.kind == Budget::Kind::Generations) {
    return generation < static_cast<long>(budget_.amount);
  }
  return !exhausted();
}

bool RunContext::exhausted() const {
  switch (budget_.kind) {
    case Budget::Kind::Generations:
      return false;  // the generation loop is the stopping rule
    case Budget::Kind::Evaluations:
      return evaluations_ >= static_cast<long>(budget_.amount);
    case Budget::Kind::Seconds:
      return elapsed() >= budget_.amount;
  }
  return false;
}

long RunContext::remaining_evaluations() const {
  if (budget_.kind != Budget::Kind::Evaluations) {
    return std::numeric_limits<long>::max();
  }
  return std::max(0L, static_cast<long>(budget_.amount) - evaluations_);
}

Evaluated RunContext::evaluate_uncommitted(const Assignment& a) const {
  Evaluated ev;
  ev.raw = shield::evaluate(a, scenario_, epoch_).total;
  ev.obj = mask_.project(ev.raw);
  return ev;
}

void RunContext::commit(const Assignment& a, const Evaluated& ev) {
  ++evaluations_;
  if (tracker_.feed(ev.obj, elapsed(), evaluations_)) {
    admitted_assignments_.push_back(a);
    admitted_raw_.push_back(ev.raw);
  }
  // Evaluation budgets sample on a fixed evaluation stride so every
  // optimizer's curve has the same resolution regardless of its phase sizes.
  if (budget_.kind == Budget::Kind::Evaluations) {
    const long stride = std::max(1L, static_cast<long>(budget_.amount) / 512);
    if (evaluations_ % stride == 0) tracker_.sample(elapsed(), evaluations_);
  }
}

Evaluated RunContext::evaluate(const Assignment& a) {
  if (remaining_evaluations() <= 0) {
    throw std::logic_error("evaluate() called with exhausted evaluation budget");
  }
  Evaluated ev = evaluate_uncommitted(a);
  commit(a, ev);
  return ev;
}

std::size_t RunContext::evaluate_batch(const std::vector<Assignment>& batch,
                                       std::vector<Evaluated>& out) {
  const std::size_t n =
      std::min<std::size_t>(batch.size(), static_cast<std::size_t>(remaining_evaluations()));
  out.resize(batch.size());
  parallel_for(workers_, n, [&](std::size_t i) { out[i] = evaluate_uncommitted(batch[i]); });
  for (std::size_t i = 0; i < n; ++i) commit(batch[i], out[i]);
  return n;
}

void RunContext::sample_now(bool force) {
  const double t = elapsed();
  if (!force && budget_.kind == Budget::Kind::Seconds && last_sample_ >= 0.0 &&
      t - last_sample_ < 0.25) {
    return;
  }
  last_sample_ = t;
  tracker_.sample(t, evaluations_);
}

std::vector<RunContext::FrontPoint> RunContext::front() const {
  std::vector<FrontPoint> out;
  for (int idx : tracker_.front_indices()) {
    out.push_back({admitted_assignments_[idx], admitted_raw_[idx],
                   tracker_.admitted()[idx].point});
  }
  return out;
}

}  // namespace shield
