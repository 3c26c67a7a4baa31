#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "shield/encoding.hpp"
#include "shield/errors.hpp"
#include "shield/scenario.hpp"

using namespace shield;

namespace {

bool column_sums_ok(const Assignment& a, const Scenario& sc, int epoch) {
  const Vector gar = epoch_demand(sc, epoch);
  for (int j = 0; j < sc.workload_count(); ++j) {
    if (std::abs(a.rates.col(j).sum() - gar[j]) > kRateTol * std::max(1.0, gar[j])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("random_assignment on a single site takes all demand") {
  const Scenario sc = default_scenario(1, 3, 1);
  Rng rng = make_rng(5);
  const Assignment a = random_assignment(sc, 0, rng);
  for (int j = 0; j < 3; ++j) CHECK(a.rates(0, j) == doctest::Approx(sc.workloads[j].gar[0]));
}

TEST_CASE("random_assignment conserves every column over many draws") {
  const Scenario sc = default_scenario(6, 4, 2);
  Rng rng = make_rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const Assignment a = random_assignment(sc, trial % 24, rng);
    CHECK(column_sums_ok(a, sc, trial % 24));
  }
}

TEST_CASE("random_assignment zeroes rho without premium") {
  const Scenario sc = default_scenario(8, 2, 3);
  Rng rng = make_rng(11);
  const Assignment a = random_assignment(sc, 0, rng);
  for (int i = 0; i < sc.site_count(); ++i) {
    if (!sc.datacenters[i].premium_available) CHECK(a.rho[i] == 0.0);
    CHECK(a.rho[i] >= 0.0);
    CHECK(a.rho[i] <= 1.0);
  }
}

TEST_CASE("repair: clamp then rescale reproduces the hand arithmetic") {
  Scenario sc = default_scenario(2, 1, 4);
  sc.workloads[0].gar = Array::Constant(24, 4.0);
  Assignment a;
  a.rates = Matrix::Zero(2, 1);
  a.rates(0, 0) = -1.0;
  a.rates(1, 0) = 3.0;
  a.rho = Vector::Zero(2);
  const Assignment r = repair(a, sc, 0);
  CHECK(r.rates(0, 0) == 0.0);
  CHECK(r.rates(1, 0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("repair: all-zero column splits demand uniformly") {
  Scenario sc = default_scenario(2, 1, 4);
  sc.workloads[0].gar = Array::Constant(24, 4.0);
  Assignment a;
  a.rates = Matrix::Zero(2, 1);
  a.rho = Vector::Zero(2);
  const Assignment r = repair(a, sc, 0);
  CHECK(r.rates(0, 0) == doctest::Approx(2.0));
  CHECK(r.rates(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("repair: rho clamped and zeroed off premium sites") {
  const Scenario sc = default_scenario(4, 1, 6);
  int premium = -1, plain = -1;
  for (int i = 0; i < 4; ++i) {
    if (sc.datacenters[i].premium_available && premium < 0) premium = i;
    if (!sc.datacenters[i].premium_available && !sc.datacenters[i].annual_contract && plain < 0) {
      plain = i;
    }
  }
  REQUIRE(premium >= 0);
  REQUIRE(plain >= 0);

  Rng rng = make_rng(1);
  Assignment a = random_assignment(sc, 0, rng);
  a.rho[premium] = 1.3;
  a.rho[plain] = 0.2;
  const Assignment r = repair(a, sc, 0);
  CHECK(r.rho[premium] == 1.0);
  CHECK(r.rho[plain] == 0.0);
}

TEST_CASE("repair preserves feasible inputs bit for bit") {
  const Scenario sc = default_scenario(5, 3, 8);
  Rng rng = make_rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Assignment a = random_assignment(sc, trial % 24, rng);
    const Assignment r = repair(a, sc, trial % 24);
    CHECK(r.rates == a.rates);
    CHECK(r.rho == a.rho);
  }
}

TEST_CASE("repair is idempotent") {
  const Scenario sc = default_scenario(5, 3, 8);
  Rng rng = make_rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Assignment a = random_assignment(sc, 0, rng);
    a.rates *= 3.7;              // break conservation
    a.rates(0, 0) -= 100.0;      // and positivity
    a.rho = a.rho.array() + 0.4; // and rho bounds
    const Assignment once = repair(a, sc, 0);
    const Assignment twice = repair(once, sc, 0);
    CHECK(twice.rates == once.rates);
    CHECK(twice.rho == once.rho);
  }
}

TEST_CASE("repair shifts overload onto sites with room") {
  // Two sites, one tiny: force everything onto the small site and let repair
  // move the excess away.
  Scenario sc = default_scenario(2, 1, 12);
  sc.datacenters[0].nodes.resize(1);
  sc.datacenters[0].nodes[0].count = 2;
  sc.workloads[0].gar = Array::Constant(24, 100.0);
  validate(sc);

  Assignment a;
  a.rates = Matrix::Zero(2, 1);
  a.rates(0, 0) = 100.0;
  a.rho = Vector::Zero(2);
  const Assignment r = repair(a, sc, 0);
  CHECK(column_sums_ok(r, sc, 0));
  CHECK(is_feasible(r, sc, 0));
  CHECK(r.rates(1, 0) > 90.0);
}

TEST_CASE("repair reports truly impossible demand") {
  Scenario sc = default_scenario(2, 1, 12);
  Assignment a;
  a.rates = Matrix::Zero(2, 1);
  a.rates(0, 0) = 1e9;
  a.rho = Vector::Zero(2);
  // Bypass scenario validation: the assignment itself demands too much.
  Scenario small = sc;
  for (auto& dc : small.datacenters) {
    dc.nodes.resize(1);
    dc.nodes[0].count = 1;
  }
  small.workloads[0].gar = Array::Constant(24, 1e9);
  CHECK_THROWS_AS(repair(a, small, 0), InfeasibleScenario);
}

TEST_CASE("neighbor: zero-load source is a degenerate no-op") {
  Scenario sc = default_scenario(2, 1, 13);
  sc.workloads[0].gar = Array::Constant(24, 10.0);
  Assignment a;
  a.rates = Matrix::Zero(2, 1);
  a.rates(1, 0) = 10.0;
  a.rho = Vector::Zero(2);

  // Find a seed whose move transfers from the empty site 0.
  MoveParams params;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng = make_rng(s);
    const Assignment n = neighbor(a, sc, 0, params, rng);
    if (n.rates == a.rates && n.rho == a.rho) {
      CHECK(n.rates == a.rates);  // degenerate move reproduced the input
      return;
    }
  }
  FAIL("no degenerate move found in 200 seeds");
}

TEST_CASE("neighbor: transfer moves exactly delta_frac of GAR") {
  Scenario sc = default_scenario(2, 1, 13);
  sc.workloads[0].gar = Array::Constant(24, 10.0);
  for (auto& dc : sc.datacenters) dc.premium_available = false;
  Assignment a;
  a.rates = Matrix::Zero(2, 1);
  a.rates(0, 0) = 10.0;
  a.rho = Vector::Zero(2);

  MoveParams params;  // delta_frac 0.1 -> moves 1 job/h
  bool seen = false;
  for (std::uint64_t s = 0; s < 100 && !seen; ++s) {
    Rng rng = make_rng(s);
    const Assignment n = neighbor(a, sc, 0, params, rng);
    if (n.rates(0, 0) == doctest::Approx(9.0) && n.rates(1, 0) == doctest::Approx(1.0)) {
      seen = true;
    }
  }
  CHECK(seen);
}

TEST_CASE("neighbor output always satisfies rate conservation") {
  const Scenario sc = default_scenario(4, 3, 14);
  Rng rng = make_rng(21);
  MoveParams params;
  Assignment a = random_assignment(sc, 6, rng);
  for (int step = 0; step < 10000; ++step) {
    a = neighbor(a, sc, 6, params, rng);
    if (step % 500 == 0) CHECK(is_feasible(a, sc, 6));
    CHECK(column_sums_ok(a, sc, 6));
  }
}

TEST_CASE("crossover of a point with itself is the point") {
  const Scenario sc = default_scenario(3, 2, 15);
  Rng rng = make_rng(31);
  const Assignment a = random_assignment(sc, 0, rng);
  const Assignment c = crossover(a, a, sc, 0, rng);
  for (int i = 0; i < a.rates.size(); ++i) {
    CHECK(c.rates.reshaped()[i] == doctest::Approx(a.rates.reshaped()[i]).epsilon(1e-12));
  }
}

TEST_CASE("crossover blends columns: half/half example") {
  Scenario sc = default_scenario(2, 1, 16);
  sc.workloads[0].gar = Array::Constant(24, 10.0);
  Assignment a, b;
  a.rates = Matrix::Zero(2, 1);
  a.rates(0, 0) = 10.0;
  b.rates = Matrix::Zero(2, 1);
  b.rates(1, 0) = 10.0;
  a.rho = b.rho = Vector::Zero(2);

  // Any lambda yields column sum 10; feasibility is what matters here.
  Rng rng = make_rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const Assignment c = crossover(a, b, sc, 0, rng);
    CHECK(c.rates(0, 0) + c.rates(1, 0) == doctest::Approx(10.0));
    CHECK(c.rates(0, 0) >= 0.0);
    CHECK(c.rates(1, 0) >= 0.0);
  }
}

TEST_CASE("mutate: strength zero limit returns the input") {
  const Scenario sc = default_scenario(3, 2, 17);
  Rng rng = make_rng(51);
  const Assignment a = random_assignment(sc, 0, rng);
  const Assignment m = mutate(a, 1e-15, sc, 0, rng);
  for (int i = 0; i < a.rates.size(); ++i) {
    CHECK(m.rates.reshaped()[i] == doctest::Approx(a.rates.reshaped()[i]).epsilon(1e-9));
  }
}

TEST_CASE("mutate: mean displacement grows with strength") {
  const Scenario sc = default_scenario(3, 2, 18);
  Rng rng = make_rng(61);
  const Assignment a = random_assignment(sc, 0, rng);

  auto mean_displacement = [&](double strength) {
    double total = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const Assignment m = mutate(a, strength, sc, 0, rng);
      total += (m.rates - a.rates).norm();
    }
    return total / 1000.0;
  };
  const double small = mean_displacement(0.01);
  const double large = mean_displacement(0.2);
  CHECK(large > 2.0 * small);
}

TEST_CASE("operator chains of length 100 stay feasible") {
  const Scenario sc = default_scenario(5, 3, 19);
  MoveParams params;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(seed);
    Assignment a = random_assignment(sc, 3, rng);
    Assignment b = random_assignment(sc, 3, rng);
    for (int step = 0; step < 100; ++step) {
      switch (step % 4) {
        case 0: a = neighbor(a, sc, 3, params, rng); break;
        case 1: a = crossover(a, b, sc, 3, rng); break;
        case 2: a = mutate(a, 0.05, sc, 3, rng); break;
        case 3: b = repair(a, sc, 3); break;
      }
      CHECK(column_sums_ok(a, sc, 3));
    }
    CHECK(is_feasible(a, sc, 3));
  }
}

TEST_CASE("assignment files round-trip and validate") {
  const Scenario sc = default_scenario(3, 2, 20);
  Rng rng = make_rng(71);
  const Assignment a = random_assignment(sc, 4, rng);

  const auto path = std::filesystem::temp_directory_path() / "shield_assignment_test.json";
  save_assignment(a, 4, path);
  const AssignmentFile loaded = load_assignment(path);
  CHECK(loaded.epoch == 4);
  CHECK(loaded.assignment.rates == a.rates);
  CHECK(loaded.assignment.rho == a.rho);
  CHECK_NOTHROW(check_feasible(loaded.assignment, sc, 4));
  std::filesystem::remove(path);
}

TEST_CASE("check_feasible names the broken workload") {
  const Scenario sc = default_scenario(3, 2, 20);
  Rng rng = make_rng(81);
  Assignment a = random_assignment(sc, 0, rng);
  a.rates(0, 1) += 5.0;
  try {
    check_feasible(a, sc, 0);
    FAIL("expected InfeasibleScenario");
  } catch (const InfeasibleScenario& e) {
    CHECK(std::string(e.what()).find(sc.workloads[1].id) != std::string::npos);
  }
}
