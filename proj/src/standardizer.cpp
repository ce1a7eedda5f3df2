#include "sector_rank/standardizer.hpp"

#include <cmath>
#include <stdexcept>

namespace sector_rank {

namespace {

// Population mean and standard deviation, two-pass.
std::pair<double, double> moments(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double mean = v.mean();
  const double var = (v.array() - mean).square().mean();
  return {mean, std::sqrt(var)};
}

}  // namespace

Standardizer Standardizer::fit(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                               const Eigen::Ref<const Eigen::VectorXd>& targets) {
  if (rows.rows() == 0 || targets.size() == 0) throw std::invalid_argument("Standardizer::fit: empty input");
  if (!rows.allFinite() || !targets.allFinite()) throw std::invalid_argument("Standardizer::fit: non-finite input");
  Standardizer s;
  s.feature_mean.resize(rows.cols());
  s.feature_scale.resize(rows.cols());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    auto [m, sd] = moments(rows.col(j));
    s.feature_mean(j) = m;
    if (sd > 1e-12 * std::max(1.0, std::abs(m))) {
      s.feature_scale(j) = sd;
    } else {
      s.feature_scale(j) = 1.0;
      s.constant_features.push_back(j);
    }
  }
  auto [tm, tsd] = moments(targets);
  s.target_mean = tm;
  if (tsd > 1e-12 * std::max(1.0, std::abs(tm))) {
    s.target_scale = tsd;
  } else {
    s.target_scale = 1.0;
    s.constant_target = true;
  }
  return s;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::Ref<const Eigen::MatrixXd>& rows) const {
  if (rows.cols() != feature_count()) throw std::invalid_argument("Standardizer: feature count mismatch");
  return (rows.rowwise() - feature_mean).array().rowwise() / feature_scale.array();
}

Eigen::MatrixXd Standardizer::inverse_transform(const Eigen::Ref<const Eigen::MatrixXd>& rows) const {
  if (rows.cols() != feature_count()) throw std::invalid_argument("Standardizer: feature count mismatch");
  return (rows.array().rowwise() * feature_scale.array()).matrix().rowwise() + feature_mean;
}

}  // namespace sector_rank
