#include <doctest.h>

#include <sstream>

#include "checks.hpp"
#include "oracles.hpp"
#include "sector_rank/predictors.hpp"

using namespace sector_rank;

TEST_CASE("cell equations match straight-line transcriptions") {
  CHECK(checks::lstm_transcription_error(100, 1) < 1e-12);
  CHECK(checks::gru_transcription_error(100, 1) < 1e-12);
  CHECK(checks::esn_transcription_error(100, 1) < 1e-12);
}

TEST_CASE("batched steps equal column-by-column steps") {
  Rng rng = make_rng(2);
  auto layer = LstmLayer<double>::initialized(3, 4, rng);
  const Eigen::MatrixXd x = checks::random_matrix(3, 5, rng), h = checks::random_matrix(4, 5, rng),
                        c = checks::random_matrix(4, 5, rng);
  const auto batch = lstm_cell(x, h, c, layer);
  for (Eigen::Index j = 0; j < 5; ++j) {
    const auto one = lstm_cell<double>(x.col(j), h.col(j), c.col(j), layer);
    CHECK((one.hidden - batch.hidden.col(j)).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK_THROWS(lstm_cell<double>(Eigen::MatrixXd::Zero(2, 5), h, c, layer));
}

TEST_CASE("BPTT gradients match central differences") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    CHECK(checks::gradient_check_error<LstmNetwork>(seed, false) < 1e-4);
    CHECK(checks::gradient_check_error<GruNetwork>(seed, false) < 1e-4);
    CHECK(checks::gradient_check_error<LstmNetwork>(seed, true) < 1e-4);
    CHECK(checks::gradient_check_error<GruNetwork>(seed, true) < 1e-4);
  }
}

TEST_CASE("ridge against the normal equations and a dense oracle") {
  const auto rc = checks::ridge_check(50, 3);
  CHECK(rc.worst_residual < 1e-8);
  CHECK(rc.worst_oracle < 1e-8);
  CHECK(rc.identity_error <= 1e-12);
}

TEST_CASE("ridge intercept is unpenalised") {
  // Constant target: every weight shrinks to zero and the intercept carries the level.
  Rng rng = make_rng(4);
  const Eigen::MatrixXd X = checks::random_matrix(30, 3, rng);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(30, 7.0);
  const RidgeModel m = RidgeModel::fit(X, y, 5.0);
  CHECK(m.weights.norm() < 1e-12);
  CHECK(m.intercept == doctest::Approx(7.0));
  CHECK_THROWS(ridge_coefficients(X, y, -1.0));
}

TEST_CASE("reservoir construction") {
  EsnParams p;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto c = checks::esn_construction(p, 4, seed);
    CHECK(c.radius_error < 1e-6);
    CHECK(c.density_error < 0.05);
  }
  p.reservoir_size = 30;
  p.spectral_radius = 0.7;
  p.density = 0.2;
  const auto c = checks::esn_construction(p, 2, 9);
  CHECK(c.radius_error < 1e-6);
  CHECK(c.density_error < 0.1);

  const EchoStateNetwork a = EchoStateNetwork::create(3, EsnParams{}, 5), b = EchoStateNetwork::create(3, EsnParams{}, 5);
  CHECK(a.reservoir() == b.reservoir());
  CHECK(a.input_weights() == b.input_weights());
  CHECK((a.input_weights().array().abs() <= 1.0).all());
}

TEST_CASE("block power iteration agrees with the dense solver") {
  Rng rng = make_rng(6);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(uniform_index(rng, 60));
    const Eigen::MatrixXd A = checks::random_matrix(n, n, rng);
    const double dense = Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues().cwiseAbs().maxCoeff();
    const auto est = estimate_spectral_radius(A);
    CHECK(est.converged);
    CHECK(est.radius == doctest::Approx(dense).epsilon(1e-7));
  }
}

namespace {

SupervisedWindowSet toy_windows(std::size_t lookback = 4) {
  const MonthlyPanel panel = fixture::random_panel(60, 2, 3, 21);
  return make_supervised(panel, "S1", {"f0", "f2"}, lookback, 2);
}

}  // namespace

TEST_CASE("supervised windows") {
  const MonthlyPanel panel = fixture::random_panel(20, 2, 3, 21);
  const auto w = make_supervised(panel, "S1", {"f2", "f0"}, 3, 2);
  REQUIRE(w.size() == 20 - 3 - 2 + 1);
  CHECK(w.end_rows.front() == 2);
  CHECK(w.end_rows.back() == 17);
  CHECK(w.inputs[0](0, 0) == panel.features()(0, 2));
  CHECK(w.inputs[0](2, 1) == panel.features()(2, 0));
  CHECK(w.targets(0) == panel.prices()(4, 1));
  CHECK(w.targets(15) == panel.prices()(19, 1));
  CHECK_THROWS(make_supervised(panel, "S1", {"f0"}, 19, 2));

  // The standardizer sees each month once, even though blocks overlap.
  const Standardizer s = fit_standardizer(w);
  CHECK(s.feature_mean(1) == doctest::Approx(panel.features().col(0).head(18).mean()));
}

TEST_CASE("ridge predictor recovers a linear map of the flattened block") {
  const MonthlyPanel panel = fixture::random_panel(80, 1, 2, 5);
  auto w = make_supervised(panel, "S0", {"f0", "f1"}, 3, 1);
  for (std::size_t b = 0; b < w.size(); ++b) w.targets(static_cast<Eigen::Index>(b)) = 100 + 2 * w.inputs[b](2, 0) - w.inputs[b](0, 1);
  const RidgePredictor r = fit_ridge(w, 1e-8);
  for (std::size_t b = 0; b < w.size(); b += 7)
    CHECK(predict_price(r, w.inputs[b]) == doctest::Approx(w.targets(static_cast<Eigen::Index>(b))).epsilon(1e-6));
}

TEST_CASE("recurrent training lowers the loss and is seed-deterministic") {
  const auto w = toy_windows();
  RecurrentConfig cfg{{6}, true, TrainConfig{AdamConfig{0.01}, 60, 100, 0.0}};
  const LstmPredictor a = fit_lstm(w, cfg, 3), b = fit_lstm(w, cfg, 3);
  CHECK(a.history.loss.back() < a.history.loss.front());
  CHECK(predict_price(a, w.inputs[5]) == predict_price(b, w.inputs[5]));
  const GruPredictor g = fit_gru(w, cfg, 3);
  CHECK(g.history.loss.back() < g.history.loss.front());

  cfg.train.patience = 2;
  cfg.train.min_delta = 10.0;  // nothing counts as an improvement
  const LstmPredictor s = fit_lstm(w, cfg, 3);
  CHECK(s.history.stopped_early);
  CHECK(s.history.loss.size() == 3);
}

TEST_CASE("checkpoints round-trip every predictor kind") {
  const auto w = toy_windows();
  ModelConfig cfg;
  cfg.lstm = {{4, 3}, true, TrainConfig{AdamConfig{0.01}, 5, 25, 1e-6}};
  cfg.gru = {{3}, false, TrainConfig{AdamConfig{0.01}, 5, 25, 1e-6}};
  cfg.esn.reservoir_size = 20;
  for (ModelKind k : {ModelKind::ridge, ModelKind::lstm, ModelKind::gru, ModelKind::esn}) {
    const FittedPredictor m = fit_predictor(k, w, cfg, 17);
    std::stringstream ss;
    save_checkpoint(ss, m);
    const FittedPredictor back = load_checkpoint(ss);
    CHECK(kind_of(back) == k);
    for (std::size_t b = 0; b < w.size(); b += 11) CHECK(predict_price(back, w.inputs[b]) == predict_price(m, w.inputs[b]));
    std::stringstream again;
    save_checkpoint(again, back);
    CHECK(again.str() == ss.str());
  }
  std::stringstream bad("not a checkpoint\n");
  CHECK_THROWS(load_checkpoint(bad));
}

TEST_CASE("esn readout refit on a cached reservoir equals a fresh fit") {
  const auto w = toy_windows();
  EsnParams p;
  p.reservoir_size = 25;
  const EsnPredictor fresh = fit_esn(w, p, 8);
  const EsnPredictor cached = fit_esn(w, EchoStateNetwork::create(2, p, 8));
  CHECK(predict_price(fresh, w.inputs[3]) == predict_price(cached, w.inputs[3]));
}
