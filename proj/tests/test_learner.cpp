#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "shield/errors.hpp"
#include "shield/learner.hpp"

using namespace shield;

namespace {

std::vector<TrainRow> synthetic_sum(int n, int features, Rng& rng) {
  std::vector<TrainRow> rows(n);
  for (auto& row : rows) {
    row.features = Vector(features);
    for (int f = 0; f < features; ++f) row.features[f] = uniform01(rng);
    row.label = row.features.sum();
  }
  return rows;
}

double r_squared(const ForestModel& model, const std::vector<TrainRow>& rows) {
  double mean = 0.0;
  for (const auto& r : rows) mean += r.label;
  mean /= rows.size();
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& r : rows) {
    const double err = model.predict(r.features) - r.label;
    ss_res += err * err;
    ss_tot += (r.label - mean) * (r.label - mean);
  }
  return 1.0 - ss_res / ss_tot;
}

}  // namespace

TEST_CASE("constant labels predict the constant exactly") {
  Rng rng = make_rng(1);
  std::vector<TrainRow> rows = synthetic_sum(80, 4, rng);
  for (auto& r : rows) r.label = 3.25;
  const ForestModel model = fit(rows, {}, rng);
  for (const auto& r : rows) CHECK(model.predict(r.features) == 3.25);
}

TEST_CASE("y = sum(x) reaches in-sample R^2 above 0.9") {
  Rng rng = make_rng(2);
  const std::vector<TrainRow> rows = synthetic_sum(500, 6, rng);
  const ForestModel model = fit(rows, {}, rng);
  CHECK(r_squared(model, rows) > 0.9);
}

TEST_CASE("too few rows raise InsufficientData") {
  Rng rng = make_rng(3);
  const std::vector<TrainRow> rows = synthetic_sum(10, 4, rng);
  CHECK_THROWS_AS(fit(rows, {}, rng), InsufficientData);
}

TEST_CASE("predictions stay within the training-label range") {
  Rng rng = make_rng(4);
  const std::vector<TrainRow> rows = synthetic_sum(200, 5, rng);
  double lo = rows[0].label, hi = rows[0].label;
  for (const auto& r : rows) {
    lo = std::min(lo, r.label);
    hi = std::max(hi, r.label);
  }
  const ForestModel model = fit(rows, {}, rng);
  for (int probe = 0; probe < 500; ++probe) {
    Vector x(5);
    for (int f = 0; f < 5; ++f) x[f] = uniform(rng, -2.0, 3.0);  // far outside training
    const double y = model.predict(x);
    CHECK(y >= lo);
    CHECK(y <= hi);
  }
}

TEST_CASE("fit is deterministic for a fixed seed") {
  Rng data_rng = make_rng(5);
  const std::vector<TrainRow> rows = synthetic_sum(150, 4, data_rng);
  Rng a = make_rng(77), b = make_rng(77);
  const ForestModel ma = fit(rows, {}, a);
  const ForestModel mb = fit(rows, {}, b);
  Rng probe_rng = make_rng(6);
  for (int probe = 0; probe < 200; ++probe) {
    Vector x(4);
    for (int f = 0; f < 4; ++f) x[f] = uniform01(probe_rng);
    CHECK(ma.predict(x) == mb.predict(x));
  }
}

TEST_CASE("out-of-bag error is finite and below the label variance") {
  Rng rng = make_rng(7);
  const std::vector<TrainRow> rows = synthetic_sum(400, 6, rng);
  const ForestModel model = fit(rows, {}, rng);
  double mean = 0.0;
  for (const auto& r : rows) mean += r.label;
  mean /= rows.size();
  double var = 0.0;
  for (const auto& r : rows) var += (r.label - mean) * (r.label - mean);
  var /= rows.size();
  CHECK(std::isfinite(model.oob_error()));
  CHECK(model.oob_error() < var);
}

TEST_CASE("arity mismatch is rejected") {
  Rng rng = make_rng(8);
  const std::vector<TrainRow> rows = synthetic_sum(60, 4, rng);
  const ForestModel model = fit(rows, {}, rng);
  CHECK_THROWS_AS(model.predict(Vector::Zero(5)), ArityMismatch);
}

TEST_CASE("dump/load round-trips predictions exactly") {
  Rng rng = make_rng(9);
  const std::vector<TrainRow> rows = synthetic_sum(120, 5, rng);
  const ForestModel model = fit(rows, {}, rng);

  std::stringstream buf;
  model.dump(buf);
  const ForestModel loaded = ForestModel::load(buf);
  CHECK(loaded.tree_count() == model.tree_count());
  for (const auto& r : rows) CHECK(loaded.predict(r.features) == model.predict(r.features));
}
