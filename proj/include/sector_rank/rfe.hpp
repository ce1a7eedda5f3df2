#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sector_rank/forest.hpp"

namespace sector_rank {

struct EliminatedFeature {
  std::string name;
  std::size_t round;
};

struct FeatureSelection {
  std::string sector;
  /// Surviving features, most important first.
  std::vector<std::string> kept;
  /// Importances of `kept`, same order, from a forest refit on the kept set.
  Eigen::VectorXd kept_importances;
  std::vector<EliminatedFeature> eliminated;
  /// Importances of every candidate from the first round's forest, in
  /// candidate order. Empty when no candidate columns were given.
  std::vector<std::string> candidates;
  Eigen::VectorXd initial_importances;
};

struct RfeParams {
  std::size_t target_count = 4;
  std::size_t step = 1;  // features removed per round
  ForestParams forest;
};

/// Recursive feature elimination: fit a forest on the surviving columns, drop
/// the `step` least important (ties drop the highest column index first) and
/// repeat until `target_count` remain. Round r's forest uses seed (seed, r).
FeatureSelection rfe_select(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                            const std::vector<std::string>& feature_names, const RfeParams& params,
                            std::uint64_t seed, std::string sector = {});

}  // namespace sector_rank
