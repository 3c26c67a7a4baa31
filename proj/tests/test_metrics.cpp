#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "shield/errors.hpp"
#include "shield/metrics.hpp"
#include "shield/rng.hpp"

using namespace shield;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector v3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

// Monte-Carlo hypervolume oracle: uniform sampling of the bounding box
// between the front's componentwise minimum and the reference.
struct McEstimate {
  double value;
  double stderr_;
};

McEstimate mc_hypervolume(const std::vector<Vector>& front, const Vector& ref, long samples,
                          Rng& rng) {
  const int m = static_cast<int>(ref.size());
  Vector lo = ref;
  for (const Vector& p : front) lo = lo.cwiseMin(p);
  double box = 1.0;
  for (int i = 0; i < m; ++i) box *= ref[i] - lo[i];
  if (box <= 0.0) return {0.0, 0.0};

  long hits = 0;
  Vector x(m);
  for (long s = 0; s < samples; ++s) {
    for (int i = 0; i < m; ++i) x[i] = uniform(rng, lo[i], ref[i]);
    for (const Vector& p : front) {
      bool dom = true;
      for (int i = 0; i < m; ++i) {
        if (p[i] > x[i]) {
          dom = false;
          break;
        }
      }
      if (dom) {
        ++hits;
        break;
      }
    }
  }
  const double p = static_cast<double>(hits) / samples;
  return {box * p, box * std::sqrt(p * (1.0 - p) / samples)};
}

}  // namespace

TEST_CASE("dominance basics") {
  CHECK(dominates(v3(1, 1, 1), v3(2, 2, 2)));
  CHECK_FALSE(dominates(v3(1, 1, 1), v3(1, 1, 1)));
  CHECK_FALSE(dominates(v2(1, 3), v2(2, 2)));
  CHECK_FALSE(dominates(v2(2, 2), v2(1, 3)));
}

TEST_CASE("pareto_filter keeps exactly the nondominated points in order") {
  CHECK(pareto_filter({}).empty());
  CHECK(pareto_filter({v2(1, 2)}).size() == 1);

  const auto out = pareto_filter({v2(1, 2), v2(2, 1), v2(2, 2)});
  REQUIRE(out.size() == 2);
  CHECK(out[0] == v2(1, 2));
  CHECK(out[1] == v2(2, 1));
}

TEST_CASE("pareto_filter collapses duplicates to the first occurrence") {
  const auto out = pareto_filter({v2(1, 2), v2(1, 2), v2(0.5, 3)});
  CHECK(out.size() == 2);
}

TEST_CASE("pareto_filter is idempotent") {
  Rng rng = make_rng(3);
  std::vector<Vector> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(v3(uniform01(rng), uniform01(rng), uniform01(rng)));
  const auto once = pareto_filter(pts);
  CHECK(pareto_filter(once) == once);
}

TEST_CASE("hypervolume hand examples") {
  CHECK(hypervolume({v2(0.5, 0.5)}, v2(1, 1)) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(hypervolume({v2(0.2, 0.8), v2(0.8, 0.2)}, v2(1, 1)) ==
        doctest::Approx(0.28).epsilon(1e-12));
  CHECK(hypervolume({v3(0.25, 0.25, 0.25), v3(0.5, 0.5, 0.5)}, v3(1, 1, 1)) ==
        doctest::Approx(0.421875).epsilon(1e-12));

  Vector one(1);
  one << 0.3;
  Vector ref1(1);
  ref1 << 1.0;
  CHECK(hypervolume({one}, ref1) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("hypervolume excludes points past the reference") {
  CHECK(hypervolume({v2(1.5, 0.2)}, v2(1, 1)) == 0.0);
  CHECK(hypervolume({v2(1.5, 0.2), v2(0.5, 0.5)}, v2(1, 1)) ==
        doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("hypervolume rejects high arity") {
  CHECK_THROWS_AS(hypervolume({Vector::Zero(4)}, Vector::Ones(4)), ArityUnsupported);
}

TEST_CASE("hypervolume is monotone under nondominated additions") {
  Rng rng = make_rng(5);
  std::vector<Vector> front;
  double last = 0.0;
  for (int i = 0; i < 40; ++i) {
    front.push_back(v3(uniform01(rng), uniform01(rng), uniform01(rng)));
    const double hv = hypervolume(front, v3(1.1, 1.1, 1.1));
    CHECK(hv >= last - 1e-15);
    last = hv;
  }
}

TEST_CASE("exact 3-D hypervolume matches the Monte-Carlo oracle") {
  Rng rng = make_rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vector> pts;
    const int n = uniform_int(rng, 1, 30);
    for (int i = 0; i < n; ++i) {
      pts.push_back(v3(uniform01(rng), uniform01(rng), uniform01(rng)));
    }
    const Vector ref = v3(1.05, 1.05, 1.05);
    const double exact = hypervolume(pts, ref);
    const McEstimate mc = mc_hypervolume(pts, ref, 200000, rng);
    CHECK(std::abs(exact - mc.value) <= 3.0 * mc.stderr_ + 1e-9);
  }
}

TEST_CASE("tracker: dominated feeds leave the PHV unchanged") {
  PhvTracker tracker(2);
  NormBox box;
  box.lo = v2(0, 0);
  box.hi = v2(1, 1);

  CHECK(tracker.feed(v2(0.4, 0.4), 0.0, 1));
  tracker.sample(0.0, 1);
  const double before = tracker.final_phv(box);
  CHECK_FALSE(tracker.feed(v2(0.6, 0.6), 0.0, 2));
  tracker.sample(0.0, 2);
  CHECK(tracker.final_phv(box) == before);
}

TEST_CASE("tracker series is monotone non-decreasing") {
  Rng rng = make_rng(8);
  PhvTracker tracker(3);
  for (int i = 1; i <= 300; ++i) {
    tracker.feed(v3(uniform01(rng), uniform01(rng), uniform01(rng)), i * 0.01, i);
    if (i % 3 == 0) tracker.sample(i * 0.01, i);
  }
  const auto series = tracker.series(tracker.own_bounds());
  for (std::size_t i = 1; i < series.size(); ++i) {
    CHECK(series[i].phv >= series[i - 1].phv - 1e-15);
  }
}

TEST_CASE("tracker: identical streams give identical series") {
  auto run = []() {
    Rng rng = make_rng(9);
    PhvTracker tracker(2);
    for (int i = 1; i <= 100; ++i) {
      tracker.feed(v2(uniform01(rng), uniform01(rng)), 0.0, i);
      tracker.sample(0.0, i);
    }
    NormBox box;
    box.lo = v2(0, 0);
    box.hi = v2(1, 1);
    return tracker.series(box);
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].phv == b[i].phv);
}

TEST_CASE("tracker front indices are mutually nondominated") {
  Rng rng = make_rng(10);
  PhvTracker tracker(3);
  for (int i = 1; i <= 500; ++i) {
    tracker.feed(v3(uniform01(rng), uniform01(rng), uniform01(rng)), 0.0, i);
  }
  const auto idx = tracker.front_indices();
  for (int a : idx) {
    for (int b : idx) {
      if (a != b) CHECK_FALSE(dominates(tracker.admitted()[a].point, tracker.admitted()[b].point));
    }
  }
}
