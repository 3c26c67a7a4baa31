#pragma once

#include <iosfwd>
#include <vector>

#include "shield/rng.hpp"
#include "shield/types.hpp"

namespace shield {

// One observation for outcome prediction: a visited design plus the weight
// vector it was searched under, labeled with the weighted sum the search
// ended at.
struct TrainRow {
  Vector features;
  double label = 0.0;
};

struct ForestParams {
  int n_trees = 30;
  int max_depth = 12;
  int min_leaf = 2;
  int min_train_rows = 50;
};

// Regression forest: bagged variance-reduction trees over ceil(sqrt(F))
// random features per split, averaged at prediction time.
class ForestModel {
 public:
  struct Node {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  using Tree = std::vector<Node>;

  double predict(const Vector& features) const;  // throws ArityMismatch

  int feature_count() const { return feature_count_; }
  std::size_t tree_count() const { return trees_.size(); }
  long rows_seen() const { return rows_seen_; }
  double oob_error() const { return oob_error_; }

  // Versioned text dump for debugging; round-trips through load.
  void dump(std::ostream& out) const;
  static ForestModel load(std::istream& in);

 private:
  friend ForestModel fit(const std::vector<TrainRow>&, const ForestParams&, Rng&);

  std::vector<Tree> trees_;
  int feature_count_ = 0;
  long rows_seen_ = 0;
  double oob_error_ = 0.0;
};

// Trains on bootstrap samples; deterministic for a fixed seed. Throws
// InsufficientData below params.min_train_rows.
ForestModel fit(const std::vector<TrainRow>& rows, const ForestParams& params, Rng& rng);

}  // namespace shield
