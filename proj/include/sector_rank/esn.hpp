#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sector_rank/ridge.hpp"

namespace sector_rank {

struct EsnParams {
  Eigen::Index reservoir_size = 100;
  double leaking_rate = 0.5;
  double spectral_radius = 1.0;
  double density = 0.5;
  double input_scaling = 1.0;
  double readout_lambda = 1.0;
  std::size_t washout = 0;
};

struct SpectralEstimate {
  double radius = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Largest eigenvalue modulus by block power iteration: the subspace spanned
/// by A^k Q is re-orthonormalised every step and the Ritz values of the
/// projected matrix give the estimate. A block (rather than a single vector)
/// is needed because the dominant eigenvalues of a real non-symmetric matrix
/// often come as a complex pair.
SpectralEstimate estimate_spectral_radius(const Eigen::Ref<const Eigen::MatrixXd>& A, double tolerance = 1e-8,
                                          std::size_t max_iterations = 10000);

/// Leaky echo state network: x <- (1 - a) x + tanh(W_in u + W x), readout over [x; u].
/// `input_weights` already carries the input scaling and `reservoir` the
/// spectral radius.
class EchoStateNetwork {
 public:
  /// Draws W_in uniform in [-s_in, s_in] and W uniform in [-1, 1] under a
  /// Bernoulli(density) mask, rescaled to the target spectral radius. An
  /// all-zero reservoir is redrawn from the next sub-seed, at most 10 times.
  static EchoStateNetwork create(Eigen::Index inputs, const EsnParams& params, std::uint64_t seed);

  EchoStateNetwork(Eigen::MatrixXd input_weights, Eigen::MatrixXd reservoir, EsnParams params);

  const EsnParams& params() const { return params_; }
  const Eigen::MatrixXd& input_weights() const { return input_weights_; }
  const Eigen::MatrixXd& reservoir() const { return reservoir_; }
  const Eigen::VectorXd& state() const { return state_; }
  const RidgeModel& readout() const { return readout_; }
  bool has_readout() const { return readout_.weights.size() > 0; }
  Eigen::Index input_size() const { return input_weights_.cols(); }
  Eigen::Index size() const { return reservoir_.rows(); }

  void reset_state() { state_.setZero(); }
  void set_state(const Eigen::Ref<const Eigen::VectorXd>& x);
  void set_readout(RidgeModel readout);

  /// One leaky update driven by the next input; returns the new state.
  const Eigen::VectorXd& update(const Eigen::Ref<const Eigen::VectorXd>& u);

  /// From a zero state, feeds the rows of `sequence` (steps x inputs) and
  /// returns the readout features [x_T; u_T].
  Eigen::VectorXd terminal_features(const Eigen::Ref<const Eigen::MatrixXd>& sequence);

  /// Ridge readout (unpenalised intercept) from terminal features of each
  /// sequence to its target.
  void fit_readout(const std::vector<Eigen::MatrixXd>& sequences, const Eigen::Ref<const Eigen::VectorXd>& targets);

  double predict(const Eigen::Ref<const Eigen::MatrixXd>& sequence);

 private:
  Eigen::MatrixXd input_weights_;
  Eigen::MatrixXd reservoir_;
  EsnParams params_;
  Eigen::VectorXd state_;
  RidgeModel readout_;
};

}  // namespace sector_rank
