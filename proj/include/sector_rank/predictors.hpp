#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sector_rank/esn.hpp"
#include "sector_rank/marketdata.hpp"
#include "sector_rank/recurrent.hpp"
#include "sector_rank/ridge.hpp"
#include "sector_rank/standardizer.hpp"

namespace sector_rank {

/// Lookback blocks of feature history paired with the sector price `horizon`
/// months after each block's last month.
struct SupervisedWindowSet {
  std::string ticker;
  std::vector<std::string> features;
  std::size_t lookback = 0;
  std::size_t horizon = 0;
  std::vector<Eigen::MatrixXd> inputs;  // each lookback x features, oldest month first
  Eigen::VectorXd targets;
  std::vector<std::size_t> end_rows;    // panel row of each block's last month

  std::size_t size() const { return inputs.size(); }
};

/// One block per panel row m with rows [m-L+1, m] and m+h inside the panel.
SupervisedWindowSet make_supervised(const MonthlyPanel& panel, std::string_view ticker,
                                    const std::vector<std::string>& features, std::size_t lookback,
                                    std::size_t horizon);

/// Feature rows [end_row - lookback + 1, end_row] as a lookback x features block.
Eigen::MatrixXd feature_block(const MonthlyPanel& panel, const std::vector<std::string>& features,
                              std::size_t end_row, std::size_t lookback);

/// Standardizer over the distinct panel months the window inputs cover, and
/// over the window targets.
Standardizer fit_standardizer(const SupervisedWindowSet& windows);

enum class ModelKind { ridge, lstm, gru, esn };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct RecurrentConfig {
  std::vector<Eigen::Index> hidden_sizes;
  bool relu_between_layers = true;
  TrainConfig train;
};

struct ModelConfig {
  double ridge_lambda = 10.0;
  RecurrentConfig lstm{{16, 256, 64}, true, TrainConfig{AdamConfig{}, 1000, 25, 1e-6}};
  RecurrentConfig gru{{32, 256, 64}, true, TrainConfig{AdamConfig{}, 500, 25, 1e-6}};
  EsnParams esn;
};

struct RidgePredictor {
  Standardizer scaler;
  std::size_t lookback = 0;
  RidgeModel model;  // over the time-major flattening of a standardised block
};

template <typename Network>
struct RecurrentPredictor {
  Standardizer scaler;
  std::size_t lookback = 0;
  Network network;
  TrainHistory history;
};

using LstmPredictor = RecurrentPredictor<LstmNetwork>;
using GruPredictor = RecurrentPredictor<GruNetwork>;

struct EsnPredictor {
  Standardizer scaler;
  std::size_t lookback = 0;
  EchoStateNetwork network;
};

using FittedPredictor = std::variant<RidgePredictor, LstmPredictor, GruPredictor, EsnPredictor>;

ModelKind kind_of(const FittedPredictor& model);

/// Row-major (time-major) flattening of a block.
Eigen::VectorXd flatten_block(const Eigen::Ref<const Eigen::MatrixXd>& block);

/// Standardised, step-major batch for the recurrent networks: result[t] is
/// features x blocks.
std::vector<Eigen::MatrixXd> to_sequence_batch(const std::vector<Eigen::MatrixXd>& blocks, const Standardizer& scaler);

RidgePredictor fit_ridge(const SupervisedWindowSet& windows, double lambda);
LstmPredictor fit_lstm(const SupervisedWindowSet& windows, const RecurrentConfig& cfg, std::uint64_t seed);
GruPredictor fit_gru(const SupervisedWindowSet& windows, const RecurrentConfig& cfg, std::uint64_t seed);
EsnPredictor fit_esn(const SupervisedWindowSet& windows, const EsnParams& params, std::uint64_t seed);
/// Fits only the readout of an existing reservoir.
EsnPredictor fit_esn(const SupervisedWindowSet& windows, EchoStateNetwork network);

FittedPredictor fit_predictor(ModelKind kind, const SupervisedWindowSet& windows, const ModelConfig& cfg,
                              std::uint64_t seed);

/// Forecast price for a lookback x features block in raw (unstandardised) units.
double predict_price(const FittedPredictor& model, const Eigen::Ref<const Eigen::MatrixXd>& block);

// Text checkpoints; the format is described in docs/checkpoint-format.md.
void save_checkpoint(std::ostream& out, const FittedPredictor& model);
FittedPredictor load_checkpoint(std::istream& in);

}  // namespace sector_rank
