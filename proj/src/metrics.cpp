#include "shield/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shield/errors.hpp"

namespace shield {

bool dominates(const Vector& a, const Vector& b) {
  bool strict = false;
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

std::vector<int> pareto_filter_indices(const std::vector<Vector>& points) {
  std::vector<int> keep;
  const int n = static_cast<int>(points.size());
  for (int i = 0; i < n; ++i) {
    bool drop = false;
    for (int j = 0; j < n && !drop; ++j) {
      if (j == i) continue;
      if (dominates(points[j], points[i])) drop = true;
      // Duplicates collapse to the first occurrence.
      if (j < i && points[j] == points[i]) drop = true;
    }
    if (!drop) keep.push_back(i);
  }
  return keep;
}

std::vector<Vector> pareto_filter(const std::vector<Vector>& points) {
  std::vector<Vector> out;
  for (int i : pareto_filter_indices(points)) out.push_back(points[i]);
  return out;
}

namespace {

// 2-D dominated area for points already filtered to lie within the reference.
// One sweep left to right: survivors form a staircase with strictly falling
// y, and each survivor owns the column up to the next survivor.
double hv2(std::vector<Eigen::Vector2d> pts, const Eigen::Vector2d& ref) {
  if (pts.empty()) return 0.0;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
  });
  std::vector<Eigen::Vector2d> stair;
  double best_y = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    if (p.y() < best_y) {
      stair.push_back(p);
      best_y = p.y();
    }
  }
  double area = 0.0;
  for (std::size_t i = 0; i < stair.size(); ++i) {
    const double next_x = i + 1 < stair.size() ? stair[i + 1].x() : ref.x();
    area += (next_x - stair[i].x()) * (ref.y() - stair[i].y());
  }
  return area;
}

double hv3(const std::vector<Vector>& pts, const Vector& ref) {
  // Sweep along z: between consecutive z levels the dominated xy area is
  // fixed, so the volume is a sum of area * slab thickness terms.
  std::vector<int> order(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return pts[a][2] < pts[b][2]; });

  double volume = 0.0;
  std::vector<Eigen::Vector2d> slab;
  const Eigen::Vector2d ref2(ref[0], ref[1]);
  std::size_t i = 0;
  while (i < order.size()) {
    const double z = pts[order[i]][2];
    while (i < order.size() && pts[order[i]][2] == z) {
      slab.emplace_back(pts[order[i]][0], pts[order[i]][1]);
      ++i;
    }
    const double z_next = i < order.size() ? pts[order[i]][2] : ref[2];
    volume += hv2(slab, ref2) * (z_next - z);
  }
  return volume;
}

}  // namespace

double hypervolume(const std::vector<Vector>& front, const Vector& reference) {
  const int m = static_cast<int>(reference.size());
  if (m < 1 || m > 3) {
    throw ArityUnsupported("exact hypervolume implemented for 1-3 objectives, got " +
                           std::to_string(m));
  }
  std::vector<Vector> pts;
  for (const Vector& p : front) {
    if (p.size() != m) throw ArityUnsupported("front point arity mismatch");
    bool inside = true;
    for (int i = 0; i < m; ++i) {
      if (p[i] > reference[i]) inside = false;
    }
    if (inside) pts.push_back(p);
  }
  if (pts.empty()) return 0.0;

  switch (m) {
    case 1: {
      double best = reference[0];
      for (const Vector& p : pts) best = std::min(best, p[0]);
      return reference[0] - best;
    }
    case 2: {
      std::vector<Eigen::Vector2d> p2;
      p2.reserve(pts.size());
      for (const Vector& p : pts) p2.emplace_back(p[0], p[1]);
      return hv2(std::move(p2), {reference[0], reference[1]});
    }
    default:
      return hv3(pts, reference);
  }
}

bool PhvTracker::feed(const Vector& point, double elapsed, long evaluations) {
  // Dominance is transitive, so checking against the current front is enough
  // to decide whether anything ever admitted dominates this point.
  for (int idx : front_) {
    const Vector& q = admitted_[idx].point;
    if (q == point || dominates(q, point)) return false;
  }
  const int mine = static_cast<int>(admitted_.size());
  admitted_.push_back({point, elapsed, evaluations});
  std::erase_if(front_, [&](int idx) { return dominates(point, admitted_[idx].point); });
  front_.push_back(mine);
  return true;
}

void PhvTracker::sample(double elapsed, long evaluations) {
  samples_.emplace_back(elapsed, evaluations);
}

void PhvTracker::extend_bounds(Vector& lo, Vector& hi) const {
  if (lo.size() == 0) {
    lo = Vector::Constant(arity_, std::numeric_limits<double>::infinity());
    hi = Vector::Constant(arity_, -std::numeric_limits<double>::infinity());
  }
  for (const auto& a : admitted_) {
    for (int i = 0; i < arity_; ++i) {
      lo[i] = std::min(lo[i], a.point[i]);
      hi[i] = std::max(hi[i], a.point[i]);
    }
  }
}

NormBox PhvTracker::own_bounds() const {
  NormBox box;
  extend_bounds(box.lo, box.hi);
  if (box.lo.size() == 0) {
    box.lo = Vector::Zero(arity_);
    box.hi = Vector::Ones(arity_);
  }
  return box;
}

std::vector<FrontSample> PhvTracker::series(const NormBox& box, bool with_fronts,
                                            int max_samples) const {
  std::vector<std::pair<double, long>> marks = samples_;
  if (marks.empty() && !admitted_.empty()) {
    marks.emplace_back(admitted_.back().elapsed, admitted_.back().evaluations);
  }
  std::vector<std::size_t> chosen;
  if (static_cast<int>(marks.size()) <= max_samples) {
    for (std::size_t i = 0; i < marks.size(); ++i) chosen.push_back(i);
  } else {
    const double stride = static_cast<double>(marks.size() - 1) / (max_samples - 1);
    for (int k = 0; k < max_samples; ++k) {
      chosen.push_back(static_cast<std::size_t>(std::llround(k * stride)));
    }
  }

  std::vector<FrontSample> out;
  out.reserve(chosen.size());
  const Vector ref = box.reference();

  // Replay admissions in evaluation order, maintaining the running front
  // incrementally so each sample only pays for one hypervolume call.
  std::vector<int> running;
  std::size_t next_point = 0;
  for (std::size_t si : chosen) {
    const auto [elapsed, evals] = marks[si];
    while (next_point < admitted_.size() && admitted_[next_point].evaluations <= evals) {
      const Vector& p = admitted_[next_point].point;
      std::erase_if(running, [&](int idx) { return dominates(p, admitted_[idx].point); });
      running.push_back(static_cast<int>(next_point));
      ++next_point;
    }
    std::vector<Vector> pts;
    pts.reserve(running.size());
    for (int idx : running) pts.push_back(box.normalize(admitted_[idx].point));
    FrontSample s;
    s.elapsed = elapsed;
    s.evaluations = evals;
    s.phv = hypervolume(pts, ref);
    if (with_fronts) s.front = std::move(pts);
    out.push_back(std::move(s));
  }
  return out;
}

double PhvTracker::final_phv(const NormBox& box) const {
  std::vector<Vector> pts;
  for (int idx : front_) pts.push_back(box.normalize(admitted_[idx].point));
  return hypervolume(pts, box.reference());
}

}  // namespace shield
