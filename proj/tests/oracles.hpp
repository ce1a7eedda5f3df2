#pragma once

// Independent reference implementations used by the tests. Everything here is
// written element by element with plain loops, without the library's Eigen
// expressions, so agreement means two separate derivations agree.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sector_rank/marketdata.hpp"
#include "sector_rank/recurrent.hpp"
#include "sector_rank/rng.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major

inline double sig(double a) { return 1.0 / (1.0 + std::exp(-a)); }

inline Mat to_mat(const Eigen::MatrixXd& m) {
  Mat out(static_cast<std::size_t>(m.rows()), Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline Vec to_vec(const Eigen::MatrixXd& m) {
  Vec out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(m(i, 0));
  return out;
}

// W h + U x + b, unit j.
inline double affine(const Mat& W, const Vec& h, const Mat& U, const Vec& x, const Vec& b, std::size_t j) {
  double a = b[j];
  for (std::size_t k = 0; k < h.size(); ++k) a += W[j][k] * h[k];
  for (std::size_t k = 0; k < x.size(); ++k) a += U[j][k] * x[k];
  return a;
}

struct Gate {
  Mat W, U;
  Vec b;
};

inline Gate gate(const sector_rank::GateParams<double>& g) {
  return {to_mat(g.recurrent), to_mat(g.input), to_vec(g.bias)};
}

struct LstmOut {
  Vec h, c;
};

inline LstmOut lstm_step(const sector_rank::LstmLayer<double>& layer, const Vec& x, const Vec& h, const Vec& c) {
  const Gate F = gate(layer.forget), I = gate(layer.input), C = gate(layer.candidate), O = gate(layer.output);
  LstmOut out{Vec(h.size()), Vec(h.size())};
  for (std::size_t j = 0; j < h.size(); ++j) {
    const double f = sig(affine(F.W, h, F.U, x, F.b, j));
    const double i = sig(affine(I.W, h, I.U, x, I.b, j));
    const double g = std::tanh(affine(C.W, h, C.U, x, C.b, j));
    const double o = sig(affine(O.W, h, O.U, x, O.b, j));
    out.c[j] = f * c[j] + i * g;
    out.h[j] = o * std::tanh(out.c[j]);
  }
  return out;
}

inline Vec gru_step(const sector_rank::GruLayer<double>& layer, const Vec& x, const Vec& h) {
  const Gate Z = gate(layer.update), R = gate(layer.reset), H = gate(layer.candidate);
  const std::size_t n = h.size();
  Vec r(n), rh(n), out(n);
  for (std::size_t j = 0; j < n; ++j) r[j] = sig(affine(R.W, h, R.U, x, R.b, j));
  for (std::size_t j = 0; j < n; ++j) rh[j] = r[j] * h[j];
  for (std::size_t j = 0; j < n; ++j) {
    const double z = sig(affine(Z.W, h, Z.U, x, Z.b, j));
    const double g = std::tanh(affine(H.W, rh, H.U, x, H.b, j));
    out[j] = (1.0 - z) * h[j] + z * g;
  }
  return out;
}

// x' = (1 - a) x + tanh(W_in u + W x)
inline Vec esn_step(const Mat& Win, const Mat& W, double a, const Vec& x, const Vec& u) {
  Vec out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += Win[j][k] * u[k];
    for (std::size_t k = 0; k < x.size(); ++k) s += W[j][k] * x[k];
    out[j] = (1.0 - a) * x[j] + std::tanh(s);
  }
  return out;
}

// Gaussian elimination with partial pivoting on a copy of A.
inline Vec solve(Mat A, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(A[i][k]) > std::abs(A[p][k])) p = i;
    std::swap(A[k], A[p]);
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = A[i][k] / A[k][k];
      for (std::size_t j = k; j < n; ++j) A[i][j] -= m * A[k][j];
      b[i] -= m * b[k];
    }
  }
  Vec x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
    x[i] = s / A[i][i];
  }
  return x;
}

// (X'X + lambda I) b = X'y assembled by explicit sums.
inline Vec ridge(const Mat& X, const Vec& y, double lambda) {
  const std::size_t n = X.size(), p = X.front().size();
  Mat G(p, Vec(p, 0.0));
  Vec r(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < p; ++a) {
      r[a] += X[i][a] * y[i];
      for (std::size_t c = 0; c < p; ++c) G[a][c] += X[i][a] * X[i][c];
    }
  for (std::size_t a = 0; a < p; ++a) G[a][a] += lambda;
  return solve(G, r);
}

// Largest fall from any earlier peak, by enumerating every (peak, trough) pair.
inline double max_drawdown(const Vec& wealth) {
  double best = 0.0;
  for (std::size_t i = 0; i < wealth.size(); ++i)
    for (std::size_t j = i + 1; j < wealth.size(); ++j) best = std::max(best, (wealth[i] - wealth[j]) / wealth[i]);
  return best;
}

}  // namespace oracle

namespace fixture {

// Synthetic panel: `sectors` tickers S0.., `features` feature columns f0..,
// monthly from 2000-01, positive prices.
inline sector_rank::MonthlyPanel random_panel(std::size_t rows, std::size_t sectors, std::size_t features,
                                              std::uint64_t seed) {
  using namespace sector_rank;
  Rng rng = make_rng(seed);
  Eigen::MatrixXd F(rows, features), P(rows, sectors);
  std::vector<std::string> fn, tn;
  for (std::size_t j = 0; j < features; ++j) fn.push_back("f" + std::to_string(j));
  for (std::size_t s = 0; s < sectors; ++s) tn.push_back("S" + std::to_string(s));
  for (Eigen::Index j = 0; j < P.cols(); ++j) {
    double p = 50.0 + 5.0 * static_cast<double>(j);
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
      P(i, j) = p;
      p *= std::exp(0.005 + 0.05 * normal(rng));
    }
  }
  for (Eigen::Index j = 0; j < F.cols(); ++j) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < F.rows(); ++i) F(i, j) = (v += normal(rng));
  }
  return MonthlyPanel(std::chrono::year{2000} / std::chrono::January, fn, F, tn, P);
}

}  // namespace fixture
