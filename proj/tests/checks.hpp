#pragma once

// Measurements shared by the unit tests and the acceptance binary. Each one
// compares library output against an oracle and returns the worst deviation.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "sector_rank/csv.hpp"
#include "sector_rank/esn.hpp"
#include "sector_rank/metrics.hpp"
#include "sector_rank/recurrent.hpp"
#include "sector_rank/ridge.hpp"

namespace checks {

using namespace sector_rank;

inline Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double s = 1.0) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = uniform(rng, -s, s);
  return m;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const oracle::Vec& b) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) d = std::max(d, std::abs(a(i, 0) - b[static_cast<std::size_t>(i)]));
  return d;
}

template <typename Layer>
void randomize(Layer& layer, Rng& rng) {
  layer.visit([&](Eigen::MatrixXd& m) { m = random_matrix(m.rows(), m.cols(), rng, 1.5); });
}

/// Worst |library - transcription| of one cell step over random instances.
inline double lstm_transcription_error(int instances, std::uint64_t seed) {
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    Rng rng = make_rng(seed, {1, static_cast<std::uint64_t>(k)});
    const Eigen::Index in = 1 + static_cast<Eigen::Index>(uniform_index(rng, 5));
    const Eigen::Index hid = 1 + static_cast<Eigen::Index>(uniform_index(rng, 6));
    auto layer = LstmLayer<double>::zeros(in, hid);
    randomize(layer, rng);
    const Eigen::MatrixXd x = random_matrix(in, 1, rng, 2), h = random_matrix(hid, 1, rng), c = random_matrix(hid, 1, rng, 2);
    const auto s = lstm_cell(x, h, c, layer);
    const auto o = oracle::lstm_step(layer, oracle::to_vec(x), oracle::to_vec(h), oracle::to_vec(c));
    worst = std::max({worst, max_abs_diff(s.hidden, o.h), max_abs_diff(s.cell, o.c)});
  }
  return worst;
}

inline double gru_transcription_error(int instances, std::uint64_t seed) {
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    Rng rng = make_rng(seed, {2, static_cast<std::uint64_t>(k)});
    const Eigen::Index in = 1 + static_cast<Eigen::Index>(uniform_index(rng, 5));
    const Eigen::Index hid = 1 + static_cast<Eigen::Index>(uniform_index(rng, 6));
    auto layer = GruLayer<double>::zeros(in, hid);
    randomize(layer, rng);
    const Eigen::MatrixXd x = random_matrix(in, 1, rng, 2), h = random_matrix(hid, 1, rng);
    const auto s = gru_cell(x, h, layer);
    worst = std::max(worst, max_abs_diff(s.hidden, oracle::gru_step(layer, oracle::to_vec(x), oracle::to_vec(h))));
  }
  return worst;
}

inline double esn_transcription_error(int instances, std::uint64_t seed) {
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    Rng rng = make_rng(seed, {3, static_cast<std::uint64_t>(k)});
    const Eigen::Index in = 1 + static_cast<Eigen::Index>(uniform_index(rng, 4));
    EsnParams p;
    p.reservoir_size = 2 + static_cast<Eigen::Index>(uniform_index(rng, 10));
    p.leaking_rate = uniform(rng, 0.05, 1.0);
    EchoStateNetwork esn = EchoStateNetwork::create(in, p, rng());
    const Eigen::VectorXd x0 = random_matrix(p.reservoir_size, 1, rng);
    const Eigen::VectorXd u = random_matrix(in, 1, rng, 2);
    esn.set_state(x0);
    const Eigen::VectorXd got = esn.update(u);
    const auto want = oracle::esn_step(oracle::to_mat(esn.input_weights()), oracle::to_mat(esn.reservoir()),
                                       p.leaking_rate, oracle::to_vec(x0), oracle::to_vec(u));
    worst = std::max(worst, max_abs_diff(got, want));
  }
  return worst;
}

/// Worst relative error of BPTT against central differences over every
/// parameter of a two-layer toy (<= 4 units, 4 steps, batch 3).
template <typename Net>
double gradient_check_error(std::uint64_t seed, bool relu) {
  Rng rng = make_rng(seed);
  Net net = Net::create(3, {4, 3}, relu, rng);
  // Larger than the default initialisation so every gate is exercised.
  net.visit([&](Eigen::MatrixXd& m) { m = random_matrix(m.rows(), m.cols(), rng, 0.8); });
  typename Net::Sequence xs;
  for (int t = 0; t < 4; ++t) xs.push_back(random_matrix(3, 3, rng, 1.5));
  const Eigen::MatrixXd y = random_matrix(1, 3, rng, 2.0);

  Net grad = net.zeros_like();
  net.loss_gradient(xs, y, grad);
  std::vector<Eigen::MatrixXd*> p, g;
  net.visit([&](Eigen::MatrixXd& m) { p.push_back(&m); });
  grad.visit([&](Eigen::MatrixXd& m) { g.push_back(&m); });

  // Fourth-order central stencil: truncation error O(h^4) and round-off
  // O(1e-16 / h), both far below the tolerance at h = 1e-4.
  const double h = 1e-4;
  double worst = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k)
    for (Eigen::Index i = 0; i < p[k]->size(); ++i) {
      double& w = p[k]->data()[i];
      const double w0 = w;
      auto at = [&](double d) {
        w = w0 + d;
        return net.loss(xs, y);
      };
      const double numeric = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
      w = w0;
      const double analytic = g[k]->data()[i];
      // Relative error with an absolute floor for gradients at round-off level.
      const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      worst = std::max(worst, rel);
    }
  return worst;
}

struct RidgeCheck {
  double worst_residual = 0.0;  // ||(X'X + lI)b - X'y|| / ||X'y||
  double worst_oracle = 0.0;    // max |b - b_oracle| / max(1, |b_oracle|)
  double identity_error = 0.0;  // X = I case against y / (1 + l)
};

inline RidgeCheck ridge_check(int problems, std::uint64_t seed) {
  RidgeCheck rc;
  for (int k = 0; k < problems; ++k) {
    Rng rng = make_rng(seed, {4, static_cast<std::uint64_t>(k)});
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(uniform_index(rng, 12));
    const Eigen::Index n = p + static_cast<Eigen::Index>(uniform_index(rng, 40));
    const double lambda = std::pow(10.0, uniform(rng, -3, 2));
    const Eigen::MatrixXd X = random_matrix(n, p, rng, 3);
    const Eigen::VectorXd y = random_matrix(n, 1, rng, 5);
    const Eigen::VectorXd b = ridge_coefficients(X, y, lambda);
    const Eigen::MatrixXd G = X.transpose() * X + lambda * Eigen::MatrixXd::Identity(p, p);
    const Eigen::VectorXd r = X.transpose() * y;
    rc.worst_residual = std::max(rc.worst_residual, (G * b - r).norm() / std::max(r.norm(), 1e-300));
    const auto o = oracle::ridge(oracle::to_mat(X), oracle::to_vec(y), lambda);
    for (Eigen::Index i = 0; i < p; ++i)
      rc.worst_oracle = std::max(rc.worst_oracle, std::abs(b(i) - o[i]) / std::max(1.0, std::abs(o[i])));

    const Eigen::VectorXd yi = random_matrix(p, 1, rng, 5);
    const Eigen::VectorXd bi = ridge_coefficients(Eigen::MatrixXd::Identity(p, p), yi, lambda);
    for (Eigen::Index i = 0; i < p; ++i)
      rc.identity_error = std::max(rc.identity_error, std::abs(bi(i) - yi(i) / (1.0 + lambda)));
  }
  return rc;
}

struct EsnConstruction {
  double radius_error = 0.0;   // | dense-eigen radius - target |
  double density_error = 0.0;  // | nonzero fraction - density |
};

inline EsnConstruction esn_construction(const EsnParams& p, Eigen::Index inputs, std::uint64_t seed) {
  const EchoStateNetwork esn = EchoStateNetwork::create(inputs, p, seed);
  const Eigen::MatrixXd& W = esn.reservoir();
  const double radius = Eigen::EigenSolver<Eigen::MatrixXd>(W, false).eigenvalues().cwiseAbs().maxCoeff();
  const double nonzero = static_cast<double>((W.array() != 0.0).count()) / static_cast<double>(W.size());
  return {std::abs(radius - p.spectral_radius), std::abs(nonzero - p.density)};
}

inline Eigen::MatrixXd read_probe(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  Eigen::MatrixXd u(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < t.header.size(); ++j) u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *csv::parse_double(t.rows[i][j]);
  return u;
}

/// Drives two copies of the reservoir from different initial states with the
/// same input and returns the final state distance.
inline double echo_distance(EchoStateNetwork esn, const Eigen::MatrixXd& inputs, std::uint64_t seed) {
  Rng rng = make_rng(seed, {5});
  EchoStateNetwork other = esn;
  esn.reset_state();
  other.set_state(random_matrix(esn.size(), 1, rng, 1.0));
  for (Eigen::Index t = 0; t < inputs.rows(); ++t) {
    esn.update(inputs.row(t).transpose());
    other.update(inputs.row(t).transpose());
  }
  return (esn.state() - other.state()).norm();
}

/// Worst |max_drawdown - pair enumeration| over random wealth paths.
inline double drawdown_enumeration_error(int paths, std::uint64_t seed) {
  double worst = 0.0;
  for (int k = 0; k < paths; ++k) {
    Rng rng = make_rng(seed, {6, static_cast<std::uint64_t>(k)});
    const std::size_t n = 1 + uniform_index(rng, 60);
    std::vector<double> w{1.0};
    for (std::size_t i = 0; i < n; ++i) w.push_back(w.back() * (1.0 + uniform(rng, -0.3, 0.3)));
    worst = std::max(worst, std::abs(max_drawdown(w) - oracle::max_drawdown(w)));
  }
  return worst;
}

/// Hand-worked examples. Each row lists period returns, periods per year and
/// the expected metrics worked out by hand from the definitions.
struct MetricExample {
  std::vector<double> returns;
  double periods_per_year;
  double total;
  double annualized;   // percent
  double sharpe;       // per period; NaN when undefined
  double mdd;
  double calmar;       // NaN when undefined
};

inline std::vector<MetricExample> metric_examples() {
  const double nan = std::nan("");
  std::vector<MetricExample> ex;
  {
    // wealth 1, 1.1, 1.045, 1.0659; mean 0.07/3; deviations 0.23/3, -0.22/3, -0.01/3
    const double total = 1.1 * 0.95 * 1.02 - 1.0;
    const double ar = (std::pow(1.0659, 12.0 / 3.0) - 1.0) * 100.0;
    const double sd = std::sqrt((0.23 * 0.23 + 0.22 * 0.22 + 0.01 * 0.01) / 9.0 / 2.0);
    ex.push_back({{0.10, -0.05, 0.02}, 12, total, ar, (0.07 / 3.0) / sd, 0.055 / 1.1, ar / 100.0 / (0.055 / 1.1)});
  }
  {
    // Two-month holding periods; drawdown spans two losses from the 1.2 peak.
    // wealth 1, 1.2, 1.08, 0.972, 1.1664
    const double total = 1.2 * 0.9 * 0.9 * 1.2 - 1.0;
    const double ar = (std::pow(1.1664, 6.0 / 4.0) - 1.0) * 100.0;
    const double mean = 0.05, sd = std::sqrt((4 * 0.15 * 0.15) / 3.0);
    ex.push_back({{0.2, -0.1, -0.1, 0.2}, 6, total, ar, mean / sd, (1.2 - 0.972) / 1.2, ar / 100.0 / ((1.2 - 0.972) / 1.2)});
  }
  {
    // Constant returns: Sharpe and Calmar undefined.
    ex.push_back({{0.01, 0.01, 0.01, 0.01, 0.01, 0.01}, 12, std::pow(1.01, 6) - 1.0, (std::pow(1.01, 12.0) - 1.0) * 100.0,
                  nan, 0.0, nan});
  }
  {
    // Single period: annualised over one year of 12 one-month periods; no Sharpe.
    ex.push_back({{-0.04}, 12, -0.04, (std::pow(0.96, 12.0) - 1.0) * 100.0, nan, 0.04,
                  (std::pow(0.96, 12.0) - 1.0) / 0.04});
  }
  return ex;
}

/// Worst relative deviation of report() from the worked examples; undefined
/// must match undefined exactly (mismatch returns infinity).
inline double metric_example_error() {
  double worst = 0.0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
  auto cmp = [&](const Metric& m, double want) {
    if (std::isnan(want)) return m ? INFINITY : 0.0;
    return m ? rel(*m, want) : INFINITY;
  };
  for (const auto& e : metric_examples()) {
    PortfolioPath path;
    for (double r : e.returns) path.append({std::chrono::year{2000} / 1, std::chrono::year{2000} / 2, {"X"}, r});
    const MetricsReport m = report(path, e.periods_per_year);
    worst = std::max({worst, rel(m.total_return, e.total), rel(m.annualized_return, e.annualized),
                      cmp(m.sharpe, e.sharpe), rel(m.max_drawdown, e.mdd), cmp(m.calmar, e.calmar)});
    if (!std::isnan(e.sharpe)) worst = std::max(worst, cmp(m.annualized_sharpe, e.sharpe * std::sqrt(e.periods_per_year)));
  }
  return worst;
}

}  // namespace checks
