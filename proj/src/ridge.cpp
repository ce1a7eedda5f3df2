#include "sector_rank/ridge.hpp"

namespace sector_rank {

RidgeModel RidgeModel::fit(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                           double lambda) {
  const Eigen::VectorXd b = ridge_coefficients(X, y, lambda, Intercept::unpenalized);
  RidgeModel m;
  m.lambda = lambda;
  m.weights = b.head(X.cols());
  m.intercept = b(X.cols());
  return m;
}

double RidgeModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != weights.size()) throw std::invalid_argument("RidgeModel::predict: input has wrong length");
  return weights.dot(x) + intercept;
}

}  // namespace sector_rank
