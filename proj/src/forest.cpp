#include "sector_rank/forest.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace sector_rank {

std::size_t ForestParams::split_features(std::size_t feature_count) const {
  if (features_per_split == 0) return std::max<std::size_t>(1, (feature_count + 2) / 3);
  return std::min(features_per_split, feature_count);
}

std::size_t RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.is_leaf()) continue;
    d[static_cast<std::size_t>(n.left)] = d[i] + 1;
    d[static_cast<std::size_t>(n.right)] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

double RegressionTree::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (nodes_.empty()) throw std::logic_error("RegressionTree::predict on an empty tree");
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x(n.feature) <= n.threshold ? n.left : n.right);
  }
  return nodes_[i].value;
}

namespace {

void check_inputs(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (X.rows() == 0 || X.cols() == 0) throw std::invalid_argument("forest: empty input");
  if (X.rows() != y.size()) throw std::invalid_argument("forest: X rows and y length differ");
  if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("forest: non-finite input values");
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double child_sse = 0.0;
};

class TreeGrower {
 public:
  TreeGrower(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
             const ForestParams& params, Rng& rng)
      : X_(X), y_(y), params_(params), rng_(rng), k_(params.split_features(static_cast<std::size_t>(X.cols()))) {}

  std::vector<TreeNode> grow(std::vector<Eigen::Index> rows) {
    nodes_.clear();
    build(rows, 0);
    return std::move(nodes_);
  }

 private:
  int build(std::vector<Eigen::Index>& rows, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    double sum = 0.0, lo = y_(rows.front()), hi = lo;
    for (auto r : rows) {
      sum += y_(r);
      lo = std::min(lo, y_(r));
      hi = std::max(hi, y_(r));
    }
    const double mean = sum / static_cast<double>(rows.size());
    nodes_[static_cast<std::size_t>(id)].samples = rows.size();
    nodes_[static_cast<std::size_t>(id)].value = mean;

    const bool depth_stop = params_.max_depth && depth >= *params_.max_depth;
    if (depth_stop || rows.size() < std::max<std::size_t>(params_.min_samples_split, 2) || lo == hi) return id;

    double parent_sse = 0.0;
    for (auto r : rows) parent_sse += (y_(r) - mean) * (y_(r) - mean);

    const std::optional<Split> split = best_split(rows, mean);
    if (!split) return id;

    std::vector<Eigen::Index> left, right;
    for (auto r : rows) (X_(r, split->feature) <= split->threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    {
      auto& node = nodes_[static_cast<std::size_t>(id)];
      node.feature = split->feature;
      node.threshold = split->threshold;
      node.impurity_decrease = std::max(0.0, parent_sse - split->child_sse);
    }
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = l;
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  std::vector<int> candidate_features() {
    const auto p = static_cast<std::size_t>(X_.cols());
    std::vector<int> all(p);
    std::iota(all.begin(), all.end(), 0);
    if (k_ >= p) return all;
    for (std::size_t i = 0; i < k_; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng_, p - i));
      std::swap(all[i], all[j]);
    }
    all.resize(k_);
    std::sort(all.begin(), all.end());
    return all;
  }

  std::optional<Split> best_split(const std::vector<Eigen::Index>& rows, double mean) {
    const std::size_t n = rows.size();
    std::optional<Split> best;
    std::vector<std::pair<double, Eigen::Index>> order(n);
    for (int f : candidate_features()) {
      for (std::size_t i = 0; i < n; ++i) order[i] = {X_(rows[i], f), rows[i]};
      std::sort(order.begin(), order.end());
      if (order.front().first == order.back().first) continue;

      double total = 0.0, total_sq = 0.0;
      for (const auto& [xv, r] : order) {
        const double c = y_(r) - mean;
        total += c;
        total_sq += c * c;
      }
      double s = 0.0, s2 = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        const double c = y_(order[i - 1].second) - mean;
        s += c;
        s2 += c * c;
        const double xl = order[i - 1].first, xr = order[i].first;
        if (!(xl < xr)) continue;
        const auto nl = static_cast<double>(i), nr = static_cast<double>(n - i);
        const double sse_l = std::max(0.0, s2 - s * s / nl);
        const double sse_r = std::max(0.0, (total_sq - s2) - (total - s) * (total - s) / nr);
        const double score = sse_l + sse_r;
        if (!best || score < best->child_sse) {
          double mid = xl + (xr - xl) / 2.0;
          if (!(mid < xr)) mid = xl;
          best = Split{f, mid, score};
        }
      }
    }
    return best;
  }

  const Eigen::Ref<const Eigen::MatrixXd>& X_;
  const Eigen::Ref<const Eigen::VectorXd>& y_;
  const ForestParams& params_;
  Rng& rng_;
  std::size_t k_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

RegressionTree fit_tree(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                        const ForestParams& params, Rng& rng) {
  check_inputs(X, y);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  return RegressionTree(TreeGrower(X, y, params, rng).grow(std::move(rows)));
}

RandomForest::RandomForest(std::vector<RegressionTree> trees, std::size_t feature_count, ForestParams params,
                           std::uint64_t seed)
    : trees_(std::move(trees)), feature_count_(feature_count), params_(params), seed_(seed) {
  for (const auto& t : trees_)
    for (const auto& n : t.nodes())
      if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= feature_count_)
        throw std::invalid_argument("RandomForest: tree references feature beyond feature count");
}

RandomForest fit_forest(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                        const ForestParams& params, std::uint64_t seed) {
  check_inputs(X, y);
  if (params.tree_count == 0) throw std::invalid_argument("forest: tree count must be positive");
  const auto n = static_cast<std::size_t>(X.rows());
  std::vector<RegressionTree> trees;
  trees.reserve(params.tree_count);
  for (std::size_t t = 0; t < params.tree_count; ++t) {
    Rng rng = make_rng(seed, {t});
    std::vector<Eigen::Index> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<Eigen::Index>(uniform_index(rng, n));
    } else {
      std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    }
    trees.emplace_back(TreeGrower(X, y, params, rng).grow(std::move(rows)));
  }
  return RandomForest(std::move(trees), static_cast<std::size_t>(X.cols()), params, seed);
}

double predict_forest(const RandomForest& forest, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (static_cast<std::size_t>(x.size()) != forest.feature_count())
    throw std::invalid_argument("predict_forest: feature vector has wrong length");
  if (forest.trees().empty()) throw std::logic_error("predict_forest: forest has no trees");
  double sum = 0.0;
  for (const auto& t : forest.trees()) sum += t.predict(x);
  return sum / static_cast<double>(forest.trees().size());
}

Eigen::VectorXd importances(const RandomForest& forest) {
  Eigen::VectorXd score = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(forest.feature_count()));
  for (const auto& t : forest.trees())
    for (const auto& n : t.nodes())
      if (!n.is_leaf()) score(n.feature) += n.impurity_decrease;
  if (!forest.trees().empty()) score /= static_cast<double>(forest.trees().size());
  const double total = score.sum();
  if (total > 0.0) score /= total;
  return score;
}

}  // namespace sector_rank
