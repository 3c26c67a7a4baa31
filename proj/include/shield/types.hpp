#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace shield {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Array = Eigen::ArrayXd;

constexpr int kEpochsPerDay = 24;
// Relative tolerance for rate-conservation checks (global rate = sum of
// local rates per workload).
constexpr double kRateTol = 1e-9;

// One epoch's fleet-wide outcome: energy cost (USD), carbon (kg CO2),
// water (L). Always minimized.
struct ObjectiveVector {
  double cost = 0.0;
  double carbon = 0.0;
  double water = 0.0;

  Eigen::Vector3d vec() const { return {cost, carbon, water}; }

  ObjectiveVector& operator+=(const ObjectiveVector& o) {
    cost += o.cost;
    carbon += o.carbon;
    water += o.water;
    return *this;
  }
  friend ObjectiveVector operator+(ObjectiveVector a, const ObjectiveVector& b) {
    a += b;
    return a;
  }
};

// Selects which of (cost, carbon, water) participate in scalarization and
// metrics. Evaluation always computes all three; masking happens downstream.
class ObjectiveMask {
 public:
  ObjectiveMask() : axes_{0, 1, 2} {}
  explicit ObjectiveMask(std::vector<int> axes) : axes_(std::move(axes)) {}

  // Parses "cost", "cost,carbon", "cost,carbon,water" (any subset, ordered).
  static ObjectiveMask parse(const std::string& text);

  int size() const { return static_cast<int>(axes_.size()); }
  const std::vector<int>& axes() const { return axes_; }

  Vector project(const ObjectiveVector& o) const {
    const Eigen::Vector3d full = o.vec();
    Vector out(size());
    for (int i = 0; i < size(); ++i) out[i] = full[axes_[i]];
    return out;
  }

  std::string name() const;

 private:
  std::vector<int> axes_;
};

}  // namespace shield
