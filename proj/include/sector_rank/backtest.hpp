#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sector_rank/marketdata.hpp"
#include "sector_rank/metrics.hpp"
#include "sector_rank/portfolio.hpp"
#include "sector_rank/predictors.hpp"
#include "sector_rank/rfe.hpp"

namespace sector_rank {

/// Predicted price of `ticker` h months after the last row of `history`. The
/// backtest only ever passes the panel truncated at the as-of month, so a
/// forecaster cannot see later data.
using Forecaster = std::function<double(const MonthlyPanel& history, const std::string& ticker)>;

struct SectorForecast {
  std::string ticker;
  double current_price = 0.0;
  double predicted_price = 0.0;
  double predicted_return = 0.0;
};

struct RankedPrediction {
  Month as_of;
  std::size_t horizon = 0;
  std::vector<SectorForecast> sectors;  // panel ticker order
  std::vector<std::size_t> ranking;     // indices into `sectors`, best first
};

/// Ranks by predicted return, descending; equal returns go by ticker ascending.
std::vector<std::size_t> rank_sectors(const std::vector<SectorForecast>& sectors);

std::vector<std::string> select_top_k(const RankedPrediction& prediction, std::size_t k = 4);

/// Forecasts every sector from the panel rows up to and including `as_of_row`.
RankedPrediction rank_forecasts(const MonthlyPanel& panel, std::size_t as_of_row, std::size_t horizon,
                                const Forecaster& forecaster);

/// Kept features per ticker.
using SelectionMap = std::map<std::string, std::vector<std::string>, std::less<>>;

SelectionMap to_selection_map(const std::vector<FeatureSelection>& selections);

struct BacktestSettings {
  std::size_t top_k = 4;
  std::size_t min_blocks = 24;  // supervised blocks required before a forecast
  std::optional<double> periods_per_year;  // default 12 / h
  double risk_free = 0.0;
};

class InsufficientHistory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Walk-forward model forecaster: at each call, fits `kind` on every block of
/// the given history whose target month is inside it, then predicts from the
/// block ending at the last row. Sector seeds are derived from `seed` and the
/// ticker's panel column so that refits at later dates reuse the same
/// initialisation (and, for the ESN, the same reservoir).
Forecaster make_model_forecaster(SelectionMap selections, ModelKind kind, std::size_t lookback,
                                 std::size_t horizon, ModelConfig models, std::uint64_t seed,
                                 std::size_t min_blocks = 24);

/// First panel row at which a model with this lookback and horizon has
/// `min_blocks` supervised blocks: L + h + min_blocks - 2.
std::size_t earliest_feasible_row(std::size_t lookback, std::size_t horizon, std::size_t min_blocks = 24);

/// Rebalances at rows start, start + h, ... while the period end stays <= end_row.
PortfolioPath run_path(const MonthlyPanel& panel, const Forecaster& forecaster, std::size_t horizon,
                       std::size_t start_row, std::size_t end_row, std::size_t top_k = 4,
                       std::vector<RankedPrediction>* predictions = nullptr);

/// All sectors at equal weight over the same period grid as run_path.
PortfolioPath benchmark_path(const MonthlyPanel& panel, std::size_t horizon, std::size_t start_row,
                             std::size_t end_row);

struct CellSpec {
  ModelKind model = ModelKind::ridge;
  std::size_t lookback = 0;
  std::size_t horizon = 0;
};

std::string cell_name(const CellSpec& spec);

struct SpanResult {
  std::size_t start_row = 0;
  std::size_t end_row = 0;
  PortfolioPath path;
  MetricsReport metrics;
};

struct CellResult {
  CellSpec spec;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string reason;  // why the cell failed
  SpanResult in_sample;
  SpanResult out_of_sample;
  double wall_seconds = 0.0;
};

struct BenchmarkResult {
  std::size_t horizon = 0;
  SpanResult in_sample;
  SpanResult out_of_sample;
};

struct GridResult {
  std::vector<CellResult> cells;            // in grid order
  std::vector<BenchmarkResult> benchmarks;  // one per horizon, ascending
};

/// Builds the forecaster for a cell; the default uses make_model_forecaster.
using ForecasterFactory = std::function<Forecaster(const CellSpec&, std::uint64_t seed)>;

struct GridOptions {
  BacktestSettings settings;
  ModelConfig models;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  ForecasterFactory factory;  // empty: model forecasters over `selections`
};

/// Seed of one grid cell, a function of the global seed and the cell only.
std::uint64_t cell_seed(std::uint64_t global_seed, const CellSpec& spec);

/// Runs every cell. Within a horizon all cells (and the benchmark) share the
/// same in-sample start, the latest earliest-feasible row among that horizon's
/// feasible cells, so their paths cover identical periods. The in-sample span
/// ends at `split_row`; the out-of-sample span starts there. Cells that cannot
/// fit are marked failed and the rest continue.
GridResult run_grid(const MonthlyPanel& panel, const SelectionMap& selections, const std::vector<CellSpec>& grid,
                    std::size_t split_row, const GridOptions& options);

}  // namespace sector_rank
