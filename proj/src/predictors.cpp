#include "sector_rank/predictors.hpp"

#include <map>
#include <stdexcept>

#include "sector_rank/rng.hpp"

namespace sector_rank {

SupervisedWindowSet make_supervised(const MonthlyPanel& panel, std::string_view ticker,
                                    const std::vector<std::string>& features, std::size_t lookback,
                                    std::size_t horizon) {
  if (lookback < 1) throw std::invalid_argument("make_supervised: lookback must be at least 1 month");
  if (horizon < 1) throw std::invalid_argument("make_supervised: horizon must be at least 1 month");
  if (features.empty()) throw std::invalid_argument("make_supervised: no features");
  const std::size_t n = panel.rows();
  if (n < lookback + horizon)
    throw std::invalid_argument("make_supervised: panel spans " + std::to_string(n) + " months, need at least " +
                                std::to_string(lookback + horizon) + " for lookback " + std::to_string(lookback) +
                                " and horizon " + std::to_string(horizon));

  const auto price_col = static_cast<Eigen::Index>(panel.ticker_index(ticker));
  std::vector<Eigen::Index> cols;
  for (const auto& f : features) cols.push_back(static_cast<Eigen::Index>(panel.feature_index(f)));

  SupervisedWindowSet w;
  w.ticker = std::string(ticker);
  w.features = features;
  w.lookback = lookback;
  w.horizon = horizon;
  const std::size_t count = n - lookback - horizon + 1;
  w.targets.resize(static_cast<Eigen::Index>(count));
  for (std::size_t b = 0; b < count; ++b) {
    const std::size_t end = lookback - 1 + b;
    w.inputs.push_back(feature_block(panel, features, end, lookback));
    w.targets(static_cast<Eigen::Index>(b)) = panel.prices()(static_cast<Eigen::Index>(end + horizon), price_col);
    w.end_rows.push_back(end);
  }
  return w;
}

Eigen::MatrixXd feature_block(const MonthlyPanel& panel, const std::vector<std::string>& features,
                              std::size_t end_row, std::size_t lookback) {
  if (lookback < 1 || end_row + 1 < lookback || end_row >= panel.rows())
    throw std::out_of_range("feature_block: rows outside the panel");
  Eigen::MatrixXd block(static_cast<Eigen::Index>(lookback), static_cast<Eigen::Index>(features.size()));
  const auto first = static_cast<Eigen::Index>(end_row + 1 - lookback);
  for (std::size_t j = 0; j < features.size(); ++j)
    block.col(static_cast<Eigen::Index>(j)) =
        panel.features().col(static_cast<Eigen::Index>(panel.feature_index(features[j]))).segment(
            first, static_cast<Eigen::Index>(lookback));
  return block;
}

Standardizer fit_standardizer(const SupervisedWindowSet& windows) {
  if (windows.size() == 0) throw std::invalid_argument("fit_standardizer: no windows");
  std::map<std::size_t, Eigen::RowVectorXd> rows;
  const auto L = windows.lookback;
  for (std::size_t b = 0; b < windows.size(); ++b)
    for (std::size_t r = 0; r < L; ++r)
      rows.try_emplace(windows.end_rows[b] + 1 - L + r, windows.inputs[b].row(static_cast<Eigen::Index>(r)));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), windows.inputs.front().cols());
  Eigen::Index i = 0;
  for (const auto& [row, values] : rows) m.row(i++) = values;
  return Standardizer::fit(m, windows.targets);
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::ridge: return "ridge";
    case ModelKind::lstm: return "lstm";
    case ModelKind::gru: return "gru";
    case ModelKind::esn: return "esn";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "ridge") return ModelKind::ridge;
  if (name == "lstm") return ModelKind::lstm;
  if (name == "gru") return ModelKind::gru;
  if (name == "esn") return ModelKind::esn;
  throw std::invalid_argument("unknown model '" + std::string(name) + "' (expected ridge, lstm, gru or esn)");
}

ModelKind kind_of(const FittedPredictor& model) {
  return static_cast<ModelKind>(model.index());
}

Eigen::VectorXd flatten_block(const Eigen::Ref<const Eigen::MatrixXd>& block) {
  Eigen::VectorXd v(block.size());
  Eigen::Index k = 0;
  for (Eigen::Index t = 0; t < block.rows(); ++t)
    for (Eigen::Index j = 0; j < block.cols(); ++j) v(k++) = block(t, j);
  return v;
}

std::vector<Eigen::MatrixXd> to_sequence_batch(const std::vector<Eigen::MatrixXd>& blocks, const Standardizer& scaler) {
  if (blocks.empty()) return {};
  const Eigen::Index steps = blocks.front().rows(), width = blocks.front().cols();
  std::vector<Eigen::MatrixXd> seq(static_cast<std::size_t>(steps),
                                   Eigen::MatrixXd(width, static_cast<Eigen::Index>(blocks.size())));
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].rows() != steps || blocks[b].cols() != width)
      throw std::invalid_argument("to_sequence_batch: blocks differ in shape");
    const Eigen::MatrixXd z = scaler.transform(blocks[b]);
    for (Eigen::Index t = 0; t < steps; ++t) seq[static_cast<std::size_t>(t)].col(static_cast<Eigen::Index>(b)) = z.row(t).transpose();
  }
  return seq;
}

namespace {

void require_windows(const SupervisedWindowSet& w) {
  if (w.size() == 0) throw std::invalid_argument("fit: no supervised windows");
  for (const auto& b : w.inputs)
    if (!b.allFinite()) throw std::invalid_argument("fit: non-finite inputs");
  if (!w.targets.allFinite()) throw std::invalid_argument("fit: non-finite targets");
}

Eigen::RowVectorXd standardized_targets(const SupervisedWindowSet& w, const Standardizer& s) {
  Eigen::RowVectorXd t(w.targets.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = s.transform_target(w.targets(i));
  return t;
}

template <typename Network>
RecurrentPredictor<Network> fit_recurrent(const SupervisedWindowSet& windows, const RecurrentConfig& cfg,
                                          std::uint64_t seed) {
  require_windows(windows);
  RecurrentPredictor<Network> p;
  p.scaler = fit_standardizer(windows);
  p.lookback = windows.lookback;
  Rng rng = make_rng(seed);
  p.network = Network::create(static_cast<Eigen::Index>(windows.features.size()), cfg.hidden_sizes,
                              cfg.relu_between_layers, rng);
  const auto xs = to_sequence_batch(windows.inputs, p.scaler);
  const Eigen::MatrixXd targets = standardized_targets(windows, p.scaler);
  p.history = train_network(p.network, xs, targets, cfg.train);
  return p;
}

void check_block(const Standardizer& scaler, std::size_t lookback, const Eigen::Ref<const Eigen::MatrixXd>& block) {
  if (static_cast<std::size_t>(block.rows()) != lookback || block.cols() != scaler.feature_count())
    throw std::invalid_argument("predict_price: block is " + std::to_string(block.rows()) + "x" +
                                std::to_string(block.cols()) + ", model expects " + std::to_string(lookback) + "x" +
                                std::to_string(scaler.feature_count()));
  if (!block.allFinite()) throw std::invalid_argument("predict_price: non-finite block");
}

}  // namespace

RidgePredictor fit_ridge(const SupervisedWindowSet& windows, double lambda) {
  require_windows(windows);
  RidgePredictor p;
  p.scaler = fit_standardizer(windows);
  p.lookback = windows.lookback;
  const auto n = static_cast<Eigen::Index>(windows.size());
  Eigen::MatrixXd X(n, windows.inputs.front().size());
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X.row(i) = flatten_block(p.scaler.transform(windows.inputs[static_cast<std::size_t>(i)])).transpose();
    y(i) = p.scaler.transform_target(windows.targets(i));
  }
  p.model = RidgeModel::fit(X, y, lambda);
  return p;
}

LstmPredictor fit_lstm(const SupervisedWindowSet& windows, const RecurrentConfig& cfg, std::uint64_t seed) {
  return fit_recurrent<LstmNetwork>(windows, cfg, seed);
}

GruPredictor fit_gru(const SupervisedWindowSet& windows, const RecurrentConfig& cfg, std::uint64_t seed) {
  return fit_recurrent<GruNetwork>(windows, cfg, seed);
}

EsnPredictor fit_esn(const SupervisedWindowSet& windows, const EsnParams& params, std::uint64_t seed) {
  return fit_esn(windows,
                 EchoStateNetwork::create(static_cast<Eigen::Index>(windows.features.size()), params, seed));
}

EsnPredictor fit_esn(const SupervisedWindowSet& windows, EchoStateNetwork net) {
  require_windows(windows);
  if (net.input_size() != static_cast<Eigen::Index>(windows.features.size()))
    throw std::invalid_argument("fit_esn: reservoir input size does not match the window features");
  Standardizer scaler = fit_standardizer(windows);
  std::vector<Eigen::MatrixXd> seqs;
  seqs.reserve(windows.size());
  for (const auto& b : windows.inputs) seqs.push_back(scaler.transform(b));
  net.fit_readout(seqs, standardized_targets(windows, scaler).transpose());
  return EsnPredictor{std::move(scaler), windows.lookback, std::move(net)};
}

FittedPredictor fit_predictor(ModelKind kind, const SupervisedWindowSet& windows, const ModelConfig& cfg,
                              std::uint64_t seed) {
  switch (kind) {
    case ModelKind::ridge: return fit_ridge(windows, cfg.ridge_lambda);
    case ModelKind::lstm: return fit_lstm(windows, cfg.lstm, seed);
    case ModelKind::gru: return fit_gru(windows, cfg.gru, seed);
    case ModelKind::esn: return fit_esn(windows, cfg.esn, seed);
  }
  throw std::invalid_argument("fit_predictor: unknown model kind");
}

double predict_price(const FittedPredictor& model, const Eigen::Ref<const Eigen::MatrixXd>& block) {
  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        check_block(p.scaler, p.lookback, block);
        const Eigen::MatrixXd z = p.scaler.transform(block);
        double out;
        if constexpr (std::is_same_v<P, RidgePredictor>) {
          out = p.model.predict(flatten_block(z));
        } else if constexpr (std::is_same_v<P, EsnPredictor>) {
          EchoStateNetwork net = p.network;
          out = net.predict(z);
        } else {
          std::vector<Eigen::MatrixXd> xs(static_cast<std::size_t>(z.rows()));
          for (Eigen::Index t = 0; t < z.rows(); ++t) xs[static_cast<std::size_t>(t)] = z.row(t).transpose();
          out = p.network.predict(xs)(0, 0);
        }
        return p.scaler.inverse_target(out);
      },
      model);
}

}  // namespace sector_rank
