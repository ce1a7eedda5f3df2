#include "sector_rank/esn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "sector_rank/rng.hpp"

namespace sector_rank {

SpectralEstimate estimate_spectral_radius(const Eigen::Ref<const Eigen::MatrixXd>& A, double tolerance,
                                          std::size_t max_iterations) {
  if (A.rows() != A.cols()) throw std::invalid_argument("estimate_spectral_radius: matrix is not square");
  const Eigen::Index n = A.rows();
  SpectralEstimate est;
  if (n == 0 || A.isZero(0.0)) {
    est.converged = true;
    return est;
  }
  const Eigen::Index k = std::min<Eigen::Index>(n, 16);

  // Deterministic, generic starting block.
  Rng rng = make_rng(0x5eed, {static_cast<std::uint64_t>(n)});
  Eigen::MatrixXd Q(n, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i) Q(i, j) = uniform(rng, -1.0, 1.0);
  Q = Eigen::HouseholderQR<Eigen::MatrixXd>(Q).householderQ() * Eigen::MatrixXd::Identity(n, k);

  double previous = -1.0;
  std::size_t stable = 0;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    const Eigen::MatrixXd Z = A * Q;
    const Eigen::MatrixXd H = Q.transpose() * Z;  // Rayleigh-Ritz projection
    const Eigen::VectorXcd ritz = Eigen::EigenSolver<Eigen::MatrixXd>(H, false).eigenvalues();
    const double radius = ritz.cwiseAbs().maxCoeff();
    Q = Eigen::HouseholderQR<Eigen::MatrixXd>(Z).householderQ() * Eigen::MatrixXd::Identity(n, k);

    est.radius = radius;
    est.iterations = it;
    if (previous >= 0.0 && std::abs(radius - previous) <= tolerance * std::max(radius, 1e-300)) {
      if (++stable >= 3) {
        est.converged = true;
        break;
      }
    } else {
      stable = 0;
    }
    previous = radius;
  }
  return est;
}

EchoStateNetwork EchoStateNetwork::create(Eigen::Index inputs, const EsnParams& params, std::uint64_t seed) {
  if (params.reservoir_size < 1) throw std::invalid_argument("esn: reservoir size must be at least 1");
  if (!(params.density > 0.0 && params.density <= 1.0)) throw std::invalid_argument("esn: density must be in (0, 1]");
  if (inputs < 1) throw std::invalid_argument("esn: input size must be at least 1");
  const Eigen::Index n = params.reservoir_size;

  for (std::uint64_t attempt = 0; attempt < 10; ++attempt) {
    Rng rng = make_rng(seed, {attempt});
    Eigen::MatrixXd w_in(n, inputs);
    for (Eigen::Index j = 0; j < inputs; ++j)
      for (Eigen::Index i = 0; i < n; ++i) w_in(i, j) = uniform(rng, -params.input_scaling, params.input_scaling);

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        const bool keep = uniform(rng, 0.0, 1.0) < params.density;
        const double value = uniform(rng, -1.0, 1.0);
        if (keep) w(i, j) = value;
      }

    const SpectralEstimate est = estimate_spectral_radius(w);
    if (!(est.radius > 0.0)) continue;
    w *= params.spectral_radius / est.radius;
    return EchoStateNetwork(std::move(w_in), std::move(w), params);
  }
  throw std::runtime_error("esn: reservoir draw has zero spectral radius after 10 attempts");
}

EchoStateNetwork::EchoStateNetwork(Eigen::MatrixXd input_weights, Eigen::MatrixXd reservoir, EsnParams params)
    : input_weights_(std::move(input_weights)), reservoir_(std::move(reservoir)), params_(params) {
  if (reservoir_.rows() != reservoir_.cols() || input_weights_.rows() != reservoir_.rows())
    throw std::invalid_argument("esn: inconsistent weight shapes");
  params_.reservoir_size = reservoir_.rows();
  state_ = Eigen::VectorXd::Zero(reservoir_.rows());
}

void EchoStateNetwork::set_state(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != size()) throw std::invalid_argument("esn: state has wrong length");
  state_ = x;
}

void EchoStateNetwork::set_readout(RidgeModel readout) {
  if (readout.weights.size() != size() + input_size())
    throw std::invalid_argument("esn: readout has wrong length");
  readout_ = std::move(readout);
}

const Eigen::VectorXd& EchoStateNetwork::update(const Eigen::Ref<const Eigen::VectorXd>& u) {
  if (u.size() != input_size()) throw std::invalid_argument("esn: input has wrong length");
  Eigen::VectorXd pre = input_weights_ * u;
  pre.noalias() += reservoir_ * state_;
  state_ = (1.0 - params_.leaking_rate) * state_ + pre.array().tanh().matrix();
  return state_;
}

Eigen::VectorXd EchoStateNetwork::terminal_features(const Eigen::Ref<const Eigen::MatrixXd>& sequence) {
  if (sequence.rows() < 1) throw std::invalid_argument("esn: empty sequence");
  if (sequence.cols() != input_size()) throw std::invalid_argument("esn: sequence has wrong input width");
  reset_state();
  for (Eigen::Index t = 0; t < sequence.rows(); ++t) update(sequence.row(t).transpose());
  Eigen::VectorXd z(size() + input_size());
  z << state_, sequence.row(sequence.rows() - 1).transpose();
  return z;
}

void EchoStateNetwork::fit_readout(const std::vector<Eigen::MatrixXd>& sequences,
                                   const Eigen::Ref<const Eigen::VectorXd>& targets) {
  if (sequences.empty()) throw std::invalid_argument("esn: no training sequences");
  if (static_cast<Eigen::Index>(sequences.size()) != targets.size())
    throw std::invalid_argument("esn: sequence and target counts differ");
  // Each sequence restarts from a zero state, so with washout 0 every
  // terminal state is kept; a positive washout drops the first sequences.
  const std::size_t skip = std::min(params_.washout, sequences.size() - 1);
  const auto rows = static_cast<Eigen::Index>(sequences.size() - skip);
  Eigen::MatrixXd X(rows, size() + input_size());
  for (Eigen::Index i = 0; i < rows; ++i)
    X.row(i) = terminal_features(sequences[static_cast<std::size_t>(i) + skip]).transpose();
  readout_ = RidgeModel::fit(X, targets.tail(rows), params_.readout_lambda);
}

double EchoStateNetwork::predict(const Eigen::Ref<const Eigen::MatrixXd>& sequence) {
  if (!has_readout()) throw std::logic_error("esn: readout not fitted");
  return readout_.predict(terminal_features(sequence));
}

}  // namespace sector_rank
