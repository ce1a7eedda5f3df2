#include <doctest.h>

#include <algorithm>
#include <limits>
#include <set>

#include "oracles.hpp"
#include "sector_rank/forest.hpp"
#include "sector_rank/rfe.hpp"

using namespace sector_rank;

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

double sse(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s;
}

// Every feature, every midpoint between consecutive distinct values.
Split best_split(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Split best;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    std::set<double> values(X.col(j).data(), X.col(j).data() + X.rows());
    std::vector<double> v(values.begin(), values.end());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      const double t = 0.5 * (v[k] + v[k + 1]);
      std::vector<double> l, r;
      for (Eigen::Index i = 0; i < X.rows(); ++i) (X(i, j) <= t ? l : r).push_back(y(i));
      const double s = sse(l) + sse(r);
      if (s < best.sse - 1e-12) best = {static_cast<int>(j), t, s};
    }
  }
  return best;
}

}  // namespace

TEST_CASE("root split matches exhaustive enumeration") {
  ForestParams p;
  p.max_depth = 1;
  p.bootstrap = false;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng = make_rng(seed, {17});
    const Eigen::Index n = 8 + static_cast<Eigen::Index>(uniform_index(rng, 30)), d = 1 + static_cast<Eigen::Index>(uniform_index(rng, 5));
    Eigen::MatrixXd X(n, d);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) X(i, j) = std::round(uniform(rng, 0, 10) * 4) / 4;  // ties on purpose
      y(i) = uniform(rng, -1, 1);
    }
    p.features_per_split = static_cast<std::size_t>(d);
    Rng fit_rng = make_rng(seed);
    const RegressionTree t = fit_tree(X, y, p, fit_rng);
    const Split s = best_split(X, y);
    if (s.feature < 0) {
      CHECK(t.root().is_leaf());
      continue;
    }
    REQUIRE_FALSE(t.root().is_leaf());
    CHECK(t.root().feature == s.feature);
    CHECK(t.root().threshold == doctest::Approx(s.threshold));
    CHECK(t.root().impurity_decrease == doctest::Approx(sse({y.data(), y.data() + n}) - s.sse));
    CHECK(t.depth() == 1);
  }
}

TEST_CASE("unlimited trees interpolate the training data") {
  Rng rng = make_rng(3);
  Eigen::MatrixXd X(40, 3);
  Eigen::VectorXd y(40);
  for (Eigen::Index i = 0; i < 40; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = uniform(rng, 0, 1);
    y(i) = uniform(rng, 0, 1);
  }
  ForestParams p;
  p.bootstrap = false;
  p.features_per_split = 3;
  Rng r2 = make_rng(4);
  const RegressionTree t = fit_tree(X, y, p, r2);
  for (Eigen::Index i = 0; i < 40; ++i) CHECK(t.predict(X.row(i).transpose()) == doctest::Approx(y(i)));
}

TEST_CASE("forest importances find a planted signal and are seed-deterministic") {
  Rng rng = make_rng(5);
  const Eigen::Index n = 200;
  Eigen::MatrixXd X(n, 6);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) X(i, j) = uniform(rng, -1, 1);
    y(i) = (X(i, 2) > 0 ? 1.0 : -1.0) + 0.05 * normal(rng);
  }
  ForestParams p;
  p.tree_count = 50;
  const RandomForest f = fit_forest(X, y, p, 99);
  const Eigen::VectorXd imp = importances(f);
  CHECK(imp.sum() == doctest::Approx(1.0));
  CHECK((imp.array() >= 0).all());
  Eigen::Index arg;
  imp.maxCoeff(&arg);
  CHECK(arg == 2);
  CHECK(imp(2) > 0.5);

  const Eigen::VectorXd again = importances(fit_forest(X, y, p, 99));
  CHECK(again == imp);
  CHECK(p.split_features(6) == 2);
  CHECK(p.split_features(7) == 3);
}

TEST_CASE("forest without splits") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 3);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(10, 2.0);
  const RandomForest f = fit_forest(X, y, ForestParams{}, 1);
  CHECK(importances(f).isZero());
  CHECK(predict_forest(f, X.row(0).transpose()) == 2.0);
}

TEST_CASE("rfe eliminates down to the target and records the order") {
  Rng rng = make_rng(8);
  const Eigen::Index n = 150;
  Eigen::MatrixXd X(n, 6);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) X(i, j) = uniform(rng, -1, 1);
    y(i) = 3 * X(i, 4) - 2 * X(i, 1) + 0.01 * normal(rng);
  }
  const std::vector<std::string> names{"a", "b", "c", "d", "e", "f"};
  RfeParams p;
  p.target_count = 2;
  p.forest.tree_count = 60;
  const FeatureSelection s = rfe_select(X, y, names, p, 12, "SEC");
  CHECK(s.sector == "SEC");
  CHECK(s.kept == std::vector<std::string>{"e", "b"});
  CHECK(s.kept_importances.size() == 2);
  CHECK(s.kept_importances(0) >= s.kept_importances(1));
  REQUIRE(s.eliminated.size() == 4);
  for (std::size_t r = 0; r < 4; ++r) CHECK(s.eliminated[r].round == r);
  CHECK(s.candidates == names);
  CHECK(s.initial_importances.size() == 6);

  // Kept + eliminated is a partition of the candidates.
  std::set<std::string> all(s.kept.begin(), s.kept.end());
  for (const auto& e : s.eliminated) CHECK(all.insert(e.name).second);
  CHECK(all.size() == 6);

  p.step = 3;
  const FeatureSelection big = rfe_select(X, y, names, p, 12);
  CHECK(big.kept.size() == 2);
  CHECK(big.eliminated.size() == 4);

  p.target_count = 7;
  CHECK_THROWS(rfe_select(X, y, names, p, 12));
}
