#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sector_rank/rng.hpp"

namespace sector_rank {

struct ForestParams {
  std::size_t tree_count = 100;
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::size_t min_samples_split = 2;
  std::size_t features_per_split = 0;    // 0 selects ceil(p / 3)
  bool bootstrap = true;

  std::size_t split_features(std::size_t feature_count) const;
};

/// Node of a regression tree stored in a flat array. Leaves have feature == -1.
/// For internal nodes, rows with x[feature] <= threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Reduction in the sum of squared deviations achieved by the split, i.e.
  /// n_node * var_node - n_left * var_left - n_right * var_right.
  double impurity_decrease = 0.0;
  std::size_t samples = 0;
  double value = 0.0;  // mean target of the node's samples

  bool is_leaf() const { return feature < 0; }
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t depth() const;

  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  std::vector<TreeNode> nodes_;
};

/// Greedy CART regression tree. Each node searches a uniformly sampled subset
/// of `features_per_split` features over midpoint thresholds and takes the
/// split with the smallest child sum of squares (ties: lowest feature, then
/// lowest threshold).
RegressionTree fit_tree(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                        const ForestParams& params, Rng& rng);

class RandomForest {
 public:
  RandomForest(std::vector<RegressionTree> trees, std::size_t feature_count, ForestParams params,
               std::uint64_t seed);

  const std::vector<RegressionTree>& trees() const { return trees_; }
  std::size_t feature_count() const { return feature_count_; }
  const ForestParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::vector<RegressionTree> trees_;
  std::size_t feature_count_;
  ForestParams params_;
  std::uint64_t seed_;
};

/// Tree t draws from the stream derived from (seed, t), so the result does not
/// depend on fitting order.
RandomForest fit_forest(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                        const ForestParams& params, std::uint64_t seed);

double predict_forest(const RandomForest& forest, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Mean decrease in impurity per feature, averaged over trees and normalised to
/// sum to one. A forest without any split yields the zero vector.
Eigen::VectorXd importances(const RandomForest& forest);

}  // namespace sector_rank
