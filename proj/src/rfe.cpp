#include "sector_rank/rfe.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace sector_rank {

namespace {

Eigen::MatrixXd take_columns(const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = X.col(static_cast<Eigen::Index>(cols[j]));
  return out;
}

}  // namespace

FeatureSelection rfe_select(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                            const std::vector<std::string>& feature_names, const RfeParams& params,
                            std::uint64_t seed, std::string sector) {
  const auto p = static_cast<std::size_t>(X.cols());
  if (feature_names.size() != p) throw std::invalid_argument("rfe_select: feature names do not match columns");
  if (params.target_count < 1) throw std::invalid_argument("rfe_select: target count must be at least 1");
  if (params.target_count > p)
    throw std::invalid_argument("rfe_select: target count " + std::to_string(params.target_count) + " exceeds " +
                                std::to_string(p) + " candidates");
  if (params.step < 1) throw std::invalid_argument("rfe_select: step must be at least 1");

  FeatureSelection sel;
  sel.sector = std::move(sector);
  sel.candidates = feature_names;

  std::vector<std::size_t> active(p);
  std::iota(active.begin(), active.end(), std::size_t{0});

  std::size_t round = 0;
  for (; active.size() > params.target_count; ++round) {
    const RandomForest forest = fit_forest(take_columns(X, active), y, params.forest, derive_seed(seed, {round}));
    const Eigen::VectorXd imp = importances(forest);
    if (round == 0) sel.initial_importances = imp;

    // Ascending importance; among equals the highest column index goes first.
    std::vector<std::size_t> order(active.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double ia = imp(static_cast<Eigen::Index>(a)), ib = imp(static_cast<Eigen::Index>(b));
      if (ia != ib) return ia < ib;
      return active[a] > active[b];
    });
    const std::size_t drop = std::min(params.step, active.size() - params.target_count);
    std::vector<std::size_t> dropped(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(drop));
    for (std::size_t k : dropped) sel.eliminated.push_back({feature_names[active[k]], round});
    std::sort(dropped.begin(), dropped.end(), std::greater<>());
    for (std::size_t k : dropped) active.erase(active.begin() + static_cast<std::ptrdiff_t>(k));
  }

  const RandomForest final_forest = fit_forest(take_columns(X, active), y, params.forest, derive_seed(seed, {round}));
  const Eigen::VectorXd imp = importances(final_forest);
  if (round == 0) sel.initial_importances = imp;

  std::vector<std::size_t> order(active.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return imp(static_cast<Eigen::Index>(a)) > imp(static_cast<Eigen::Index>(b));
  });
  sel.kept_importances.resize(static_cast<Eigen::Index>(active.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    sel.kept.push_back(feature_names[active[order[i]]]);
    sel.kept_importances(static_cast<Eigen::Index>(i)) = imp(static_cast<Eigen::Index>(order[i]));
  }
  return sel;
}

}  // namespace sector_rank
