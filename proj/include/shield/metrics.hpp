#pragma once

#include <vector>

#include "shield/types.hpp"

namespace shield {

// Minimization dominance: a <= b everywhere and a < b somewhere.
bool dominates(const Vector& a, const Vector& b);

// Nondominated subset; duplicates collapse to the first occurrence and the
// stable input order is kept.
std::vector<Vector> pareto_filter(const std::vector<Vector>& points);
std::vector<int> pareto_filter_indices(const std::vector<Vector>& points);

// Exact dominated hypervolume against an upper reference point for 1 to 3
// objectives. Points with any coordinate above the reference are excluded.
double hypervolume(const std::vector<Vector>& front, const Vector& reference);

// Normalization box shared by all curves in one comparison; PHV is computed
// in [0,1]^M coordinates against ref_scale on each axis.
struct NormBox {
  Vector lo;
  Vector hi;
  double ref_scale = 1.1;

  Vector normalize(const Vector& p) const {
    Vector out(p.size());
    for (int i = 0; i < p.size(); ++i) {
      const double range = hi[i] - lo[i];
      out[i] = range > 0.0 ? (p[i] - lo[i]) / range : 0.0;
    }
    return out;
  }
  Vector reference() const { return Vector::Constant(lo.size(), ref_scale); }
};

struct FrontSample {
  double elapsed = 0.0;  // seconds
  long evaluations = 0;
  double phv = 0.0;
  std::vector<Vector> front;  // filled on request only
};

// Accumulates every objective vector an optimizer evaluates, keeps the
// all-time nondominated archive, and timestamps caller-driven samples.
// PHV series are computed after the fact against a shared NormBox so curves
// from different runs are comparable.
class PhvTracker {
 public:
  explicit PhvTracker(int arity) : arity_(arity) {}

  struct Admitted {
    Vector point;
    double elapsed;
    long evaluations;
  };

  // Returns true when the point enters the archive (it is not dominated by
  // anything seen before). The caller can use the flag to retain payloads.
  bool feed(const Vector& point, double elapsed, long evaluations);

  void sample(double elapsed, long evaluations);

  int arity() const { return arity_; }
  const std::vector<Admitted>& admitted() const { return admitted_; }

  // Indices (into admitted()) of the current nondominated archive.
  std::vector<int> front_indices() const { return front_; }

  // Per-axis min/max over everything admitted; the usual input to NormBox
  // unions across runs.
  void extend_bounds(Vector& lo, Vector& hi) const;
  NormBox own_bounds() const;

  // PHV at each recorded sample, thinned to at most max_samples rows (the
  // final sample is always kept). Fronts are materialized when with_fronts.
  std::vector<FrontSample> series(const NormBox& box, bool with_fronts = false,
                                  int max_samples = 600) const;
  double final_phv(const NormBox& box) const;

 private:
  int arity_;
  std::vector<Admitted> admitted_;
  std::vector<int> front_;  // indices into admitted_
  std::vector<std::pair<double, long>> samples_;
};

}  // namespace shield
