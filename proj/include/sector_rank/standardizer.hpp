#pragma once

#include <vector>

#include <Eigen/Dense>

namespace sector_rank {

/// Per-feature z-scoring plus target scaling, estimated on a training span.
/// Columns with zero spread get a unit scale and are listed in
/// `constant_features` (the target likewise via `constant_target`).
struct Standardizer {
  Eigen::RowVectorXd feature_mean;
  Eigen::RowVectorXd feature_scale;
  double target_mean = 0.0;
  double target_scale = 1.0;
  std::vector<Eigen::Index> constant_features;
  bool constant_target = false;

  /// `rows` holds one observation per row (months x features).
  static Standardizer fit(const Eigen::Ref<const Eigen::MatrixXd>& rows, const Eigen::Ref<const Eigen::VectorXd>& targets);

  Eigen::Index feature_count() const { return feature_mean.size(); }

  Eigen::MatrixXd transform(const Eigen::Ref<const Eigen::MatrixXd>& rows) const;
  Eigen::MatrixXd inverse_transform(const Eigen::Ref<const Eigen::MatrixXd>& rows) const;
  double transform_target(double y) const { return (y - target_mean) / target_scale; }
  double inverse_target(double z) const { return z * target_scale + target_mean; }
};

}  // namespace sector_rank
