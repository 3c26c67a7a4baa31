#include "shield/learner.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "shield/errors.hpp"

namespace shield {
namespace {

struct TreeBuilder {
  const std::vector<TrainRow>& rows;
  const ForestParams& params;
  int feature_count;
  int features_per_split;
  Rng& rng;
  ForestModel::Tree nodes;

  double mean_label(const std::vector<int>& idx) const {
    double s = 0.0;
    for (int i : idx) s += rows[i].label;
    return s / idx.size();
  }

  int build(std::vector<int>& idx, int depth) {
    const int me = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[me].value = mean_label(idx);

    if (depth >= params.max_depth || static_cast<int>(idx.size()) < 2 * params.min_leaf) {
      return me;
    }

    double total_sum = 0.0, total_sq = 0.0;
    for (int i : idx) {
      total_sum += rows[i].label;
      total_sq += rows[i].label * rows[i].label;
    }
    if (total_sq - total_sum * total_sum / idx.size() <= 1e-12) return me;  // pure node

    // Best variance-reduction split over a random feature subset, scored by
    // total SSE via prefix sums.
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_sse = std::numeric_limits<double>::infinity();

    std::vector<int> candidates(feature_count);
    std::iota(candidates.begin(), candidates.end(), 0);
    for (int pick = 0; pick < features_per_split; ++pick) {
      const int swap_with = uniform_int(rng, pick, feature_count - 1);
      std::swap(candidates[pick], candidates[swap_with]);
    }

    std::vector<int> order = idx;
    for (int pick = 0; pick < features_per_split; ++pick) {
      const int f = candidates[pick];
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return rows[a].features[f] < rows[b].features[f];
      });
      double left_sum = 0.0, left_sq = 0.0;
      const int n = static_cast<int>(order.size());
      for (int cut = 1; cut < n; ++cut) {
        const double y = rows[order[cut - 1]].label;
        left_sum += y;
        left_sq += y * y;
        if (cut < params.min_leaf || n - cut < params.min_leaf) continue;
        const double lo = rows[order[cut - 1]].features[f];
        const double hi = rows[order[cut]].features[f];
        if (lo == hi) continue;  // cannot separate equal feature values
        const double right_sum = total_sum - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse = (left_sq - left_sum * left_sum / cut) +
                           (right_sq - right_sum * right_sum / (n - cut));
        if (sse < best_sse) {
          best_sse = sse;
          best_feature = f;
          best_threshold = 0.5 * (lo + hi);
        }
      }
    }

    if (best_feature < 0) return me;

    std::vector<int> left, right;
    for (int i : idx) {
      (rows[i].features[best_feature] <= best_threshold ? left : right).push_back(i);
    }
    if (left.empty() || right.empty()) return me;

    nodes[me].feature = best_feature;
    nodes[me].threshold = best_threshold;
    nodes[me].left = build(left, depth + 1);
    nodes[me].right = build(right, depth + 1);
    return me;
  }
};

double tree_predict(const ForestModel::Tree& tree, const Vector& x) {
  int at = 0;
  while (tree[at].feature >= 0) {
    at = x[tree[at].feature] <= tree[at].threshold ? tree[at].left : tree[at].right;
  }
  return tree[at].value;
}

}  // namespace

ForestModel fit(const std::vector<TrainRow>& rows, const ForestParams& params, Rng& rng) {
  const int n = static_cast<int>(rows.size());
  if (n < params.min_train_rows) {
    throw InsufficientData("have " + std::to_string(n) + " rows, need " +
                           std::to_string(params.min_train_rows));
  }
  ForestModel model;
  model.feature_count_ = static_cast<int>(rows.front().features.size());
  model.rows_seen_ = n;
  const int features_per_split = std::max(
      1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(model.feature_count_)))));

  std::vector<double> oob_sum(n, 0.0);
  std::vector<int> oob_count(n, 0);

  for (int t = 0; t < params.n_trees; ++t) {
    std::vector<int> bag(n);
    std::vector<char> in_bag(n, 0);
    for (int i = 0; i < n; ++i) {
      bag[i] = uniform_int(rng, 0, n - 1);
      in_bag[bag[i]] = 1;
    }
    TreeBuilder builder{rows, params, model.feature_count_, features_per_split, rng, {}};
    builder.build(bag, 0);
    model.trees_.push_back(std::move(builder.nodes));

    for (int i = 0; i < n; ++i) {
      if (!in_bag[i]) {
        oob_sum[i] += tree_predict(model.trees_.back(), rows[i].features);
        ++oob_count[i];
      }
    }
  }

  double err = 0.0;
  int covered = 0;
  for (int i = 0; i < n; ++i) {
    if (oob_count[i] > 0) {
      const double d = oob_sum[i] / oob_count[i] - rows[i].label;
      err += d * d;
      ++covered;
    }
  }
  model.oob_error_ = covered > 0 ? err / covered : 0.0;
  return model;
}

double ForestModel::predict(const Vector& features) const {
  if (static_cast<int>(features.size()) != feature_count_) {
    throw ArityMismatch("model expects " + std::to_string(feature_count_) + " features, got " +
                        std::to_string(features.size()));
  }
  double sum = 0.0;
  for (const Tree& tree : trees_) sum += tree_predict(tree, features);
  return sum / trees_.size();
}

void ForestModel::dump(std::ostream& out) const {
  out << "forest v1\n";
  out << feature_count_ << " " << rows_seen_ << " " << oob_error_ << " " << trees_.size() << "\n";
  out.precision(17);
  for (const Tree& tree : trees_) {
    out << tree.size() << "\n";
    for (const Node& n : tree) {
      out << n.feature << " " << n.threshold << " " << n.left << " " << n.right << " " << n.value
          << "\n";
    }
  }
}

ForestModel ForestModel::load(std::istream& in) {
  std::string magic, version;
  in >> magic >> version;
  if (magic != "forest" || version != "v1") throw ParseError("not a v1 forest dump");
  ForestModel model;
  std::size_t trees = 0;
  in >> model.feature_count_ >> model.rows_seen_ >> model.oob_error_ >> trees;
  for (std::size_t t = 0; t < trees; ++t) {
    std::size_t nodes = 0;
    in >> nodes;
    Tree tree(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      in >> tree[i].feature >> tree[i].threshold >> tree[i].left >> tree[i].right >>
          tree[i].value;
    }
    model.trees_.push_back(std::move(tree));
  }
  if (!in) throw ParseError("truncated forest dump");
  return model;
}

}  // namespace shield
