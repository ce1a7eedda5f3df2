#pragma once

#include <stdexcept>

#include <Eigen/Dense>

namespace sector_rank {

enum class Intercept { none, unpenalized };

/// Ridge coefficients argmin ||y - X b||^2 + lambda ||b||^2, computed from the
/// regularised normal equations (X'X + lambda I) b = X'y with an LDL'
/// factorisation. With Intercept::unpenalized a column of ones is appended as
/// the last regressor and its diagonal penalty is zero; the returned vector
/// then has X.cols() + 1 entries, intercept last.
template <typename DerivedX, typename DerivedY>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, 1> ridge_coefficients(
    const Eigen::MatrixBase<DerivedX>& X, const Eigen::MatrixBase<DerivedY>& y, typename DerivedX::Scalar lambda,
    Intercept intercept = Intercept::none) {
  using Scalar = typename DerivedX::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  if (X.rows() != y.size()) throw std::invalid_argument("ridge: X rows and y length differ");
  if (X.rows() == 0) throw std::invalid_argument("ridge: no observations");
  if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("ridge: non-finite inputs");
  if (lambda < Scalar(0)) throw std::invalid_argument("ridge: negative penalty");

  const Eigen::Index p = X.cols();
  const Eigen::Index d = intercept == Intercept::unpenalized ? p + 1 : p;

  Matrix gram(d, d);
  Vector rhs(d);
  gram.topLeftCorner(p, p).template triangularView<Eigen::Lower>() = X.transpose() * X;
  gram.topLeftCorner(p, p).diagonal().array() += lambda;
  rhs.head(p) = X.transpose() * y;
  if (intercept == Intercept::unpenalized) {
    gram.row(p).head(p) = X.colwise().sum();
    gram(p, p) = static_cast<Scalar>(X.rows());
    rhs(p) = y.sum();
  }
  return gram.template selfadjointView<Eigen::Lower>().ldlt().solve(rhs);
}

/// Linear readout with an unpenalised intercept.
struct RidgeModel {
  double lambda = 0.0;
  Eigen::VectorXd weights;
  double intercept = 0.0;

  static RidgeModel fit(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                        double lambda);
  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

}  // namespace sector_rank
