#include "sector_rank/backtest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "sector_rank/parallel.hpp"
#include "sector_rank/rng.hpp"

namespace sector_rank {

std::vector<std::size_t> rank_sectors(const std::vector<SectorForecast>& sectors) {
  std::vector<std::size_t> order(sectors.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = sectors[a];
    const auto& y = sectors[b];
    if (x.predicted_return != y.predicted_return) return x.predicted_return > y.predicted_return;
    return x.ticker < y.ticker;
  });
  return order;
}

std::vector<std::string> select_top_k(const RankedPrediction& prediction, std::size_t k) {
  if (k > prediction.sectors.size())
    throw std::invalid_argument("select_top_k: k = " + std::to_string(k) + " exceeds universe of " +
                                std::to_string(prediction.sectors.size()));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(prediction.sectors[prediction.ranking[i]].ticker);
  return out;
}

RankedPrediction rank_forecasts(const MonthlyPanel& panel, std::size_t as_of_row, std::size_t horizon,
                                const Forecaster& forecaster) {
  if (as_of_row >= panel.rows()) throw std::out_of_range("rank_forecasts: as-of row outside the panel");
  const MonthlyPanel history = panel.head(as_of_row + 1);
  RankedPrediction rp;
  rp.as_of = panel.month(as_of_row);
  rp.horizon = horizon;
  for (std::size_t s = 0; s < panel.tickers().size(); ++s) {
    SectorForecast f;
    f.ticker = panel.tickers()[s];
    f.current_price = panel.prices()(static_cast<Eigen::Index>(as_of_row), static_cast<Eigen::Index>(s));
    f.predicted_price = forecaster(history, f.ticker);
    f.predicted_return = rate_of_return(f.current_price, f.predicted_price);
    if (!std::isfinite(f.predicted_return))
      throw std::runtime_error("non-finite predicted return for " + f.ticker + " at " + format_month(rp.as_of));
    rp.sectors.push_back(std::move(f));
  }
  rp.ranking = rank_sectors(rp.sectors);
  return rp;
}

SelectionMap to_selection_map(const std::vector<FeatureSelection>& selections) {
  SelectionMap m;
  for (const auto& s : selections) m[s.sector] = s.kept;
  return m;
}

std::size_t earliest_feasible_row(std::size_t lookback, std::size_t horizon, std::size_t min_blocks) {
  // Blocks at history rows [L-1, m-h] number m - h - L + 2.
  return lookback + horizon + std::max<std::size_t>(min_blocks, 1) - 2;
}

Forecaster make_model_forecaster(SelectionMap selections, ModelKind kind, std::size_t lookback,
                                 std::size_t horizon, ModelConfig models, std::uint64_t seed,
                                 std::size_t min_blocks) {
  // The ESN reservoir depends only on the sector seed, so it is built once per
  // sector and reused by every refit.
  struct ReservoirCache {
    std::mutex mutex;
    std::map<std::string, EchoStateNetwork, std::less<>> networks;
  };
  auto cache = std::make_shared<ReservoirCache>();
  return [selections = std::move(selections), kind, lookback, horizon, models = std::move(models), seed, min_blocks,
          cache](const MonthlyPanel& history, const std::string& ticker) -> double {
    const auto it = selections.find(ticker);
    if (it == selections.end()) throw std::runtime_error("no feature selection for " + ticker);
    const std::size_t n = history.rows();
    if (n < lookback + horizon || n - lookback - horizon + 1 < min_blocks)
      throw InsufficientHistory(ticker + ": fewer than " + std::to_string(min_blocks) + " supervised blocks at " +
                                format_month(history.last_month()) + " (lookback " + std::to_string(lookback) +
                                ", horizon " + std::to_string(horizon) + ")");
    const auto windows = make_supervised(history, ticker, it->second, lookback, horizon);
    const std::uint64_t s = derive_seed(seed, {history.ticker_index(ticker)});
    FittedPredictor model;
    if (kind == ModelKind::esn) {
      std::optional<EchoStateNetwork> reservoir;
      {
        std::lock_guard lock(cache->mutex);
        auto c = cache->networks.find(ticker);
        if (c == cache->networks.end())
          c = cache->networks
                  .emplace(ticker, EchoStateNetwork::create(static_cast<Eigen::Index>(it->second.size()), models.esn, s))
                  .first;
        reservoir = c->second;
      }
      model = fit_esn(windows, std::move(*reservoir));
    } else {
      model = fit_predictor(kind, windows, models, s);
    }
    return predict_price(model, feature_block(history, it->second, n - 1, lookback));
  };
}

PortfolioPath run_path(const MonthlyPanel& panel, const Forecaster& forecaster, std::size_t horizon,
                       std::size_t start_row, std::size_t end_row, std::size_t top_k,
                       std::vector<RankedPrediction>* predictions) {
  if (horizon < 1) throw std::invalid_argument("run_path: horizon must be at least 1");
  if (end_row >= panel.rows() || start_row + horizon > end_row)
    throw std::out_of_range("run_path: span [" + std::to_string(start_row) + ", " + std::to_string(end_row) +
                            "] holds no full period inside the panel");
  PortfolioPath path;
  const auto& P = panel.prices();
  for (std::size_t m = start_row; m + horizon <= end_row; m += horizon) {
    RankedPrediction rp = rank_forecasts(panel, m, horizon, forecaster);
    HoldingPeriod period{panel.month(m), panel.month(m + horizon), select_top_k(rp, top_k), 0.0};
    double sum = 0.0;
    for (const auto& t : period.holdings) {
      const auto c = static_cast<Eigen::Index>(panel.ticker_index(t));
      sum += rate_of_return(P(static_cast<Eigen::Index>(m), c), P(static_cast<Eigen::Index>(m + horizon), c));
    }
    period.realized_return = sum / static_cast<double>(period.holdings.size());
    path.append(std::move(period));
    if (predictions) predictions->push_back(std::move(rp));
  }
  return path;
}

PortfolioPath benchmark_path(const MonthlyPanel& panel, std::size_t horizon, std::size_t start_row,
                             std::size_t end_row) {
  if (horizon < 1) throw std::invalid_argument("benchmark_path: horizon must be at least 1");
  if (end_row >= panel.rows() || start_row + horizon > end_row)
    throw std::out_of_range("benchmark_path: span outside the panel");
  PortfolioPath path;
  const auto& P = panel.prices();
  for (std::size_t m = start_row; m + horizon <= end_row; m += horizon) {
    HoldingPeriod period{panel.month(m), panel.month(m + horizon), panel.tickers(), 0.0};
    double sum = 0.0;
    for (Eigen::Index c = 0; c < P.cols(); ++c)
      sum += rate_of_return(P(static_cast<Eigen::Index>(m), c), P(static_cast<Eigen::Index>(m + horizon), c));
    period.realized_return = sum / static_cast<double>(P.cols());
    path.append(std::move(period));
  }
  return path;
}

std::string cell_name(const CellSpec& spec) {
  return std::string(to_string(spec.model)) + "_L" + std::to_string(spec.lookback) + "_h" +
         std::to_string(spec.horizon);
}

std::uint64_t cell_seed(std::uint64_t global_seed, const CellSpec& spec) {
  return derive_seed(global_seed, {static_cast<std::uint64_t>(spec.model), spec.lookback, spec.horizon});
}

namespace {

SpanResult evaluate(PortfolioPath path, std::size_t start, std::size_t end, double n, double rf) {
  SpanResult r;
  r.start_row = start;
  r.end_row = end;
  r.metrics = report(path, n, rf);
  r.path = std::move(path);
  return r;
}

}  // namespace

GridResult run_grid(const MonthlyPanel& panel, const SelectionMap& selections, const std::vector<CellSpec>& grid,
                    std::size_t split_row, const GridOptions& options) {
  const auto& st = options.settings;
  const std::size_t last = panel.rows() - 1;
  if (split_row == 0 || split_row >= last) throw std::invalid_argument("run_grid: split row must lie inside the panel");

  GridResult out;
  out.cells.resize(grid.size());

  std::map<std::size_t, std::size_t> start_of;  // horizon -> common in-sample start
  std::vector<bool> feasible(grid.size(), false);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& c = grid[i];
    auto& r = out.cells[i];
    r.spec = c;
    r.seed = cell_seed(options.seed, c);
    if (c.lookback < 1 || c.horizon < 1) {
      r.reason = "lookback and horizon must be positive";
      continue;
    }
    const std::size_t e = earliest_feasible_row(c.lookback, c.horizon, st.min_blocks);
    if (e + c.horizon > split_row) {
      r.reason = "insufficient history: first forecast possible at " +
                 (e <= last ? format_month(panel.month(e)) : std::string("beyond the panel")) +
                 ", in-sample span ends at " + format_month(panel.month(split_row));
      continue;
    }
    if (split_row + c.horizon > last) {
      r.reason = "out-of-sample span shorter than the horizon";
      continue;
    }
    feasible[i] = true;
    auto [it, inserted] = start_of.try_emplace(c.horizon, e);
    if (!inserted) it->second = std::max(it->second, e);
  }

  for (const auto& [h, start] : start_of) {
    const double n = st.periods_per_year.value_or(12.0 / static_cast<double>(h));
    BenchmarkResult b;
    b.horizon = h;
    b.in_sample = evaluate(benchmark_path(panel, h, start, split_row), start, split_row, n, st.risk_free);
    b.out_of_sample = evaluate(benchmark_path(panel, h, split_row, last), split_row, last, n, st.risk_free);
    out.benchmarks.push_back(std::move(b));
  }

  parallel_for(grid.size(), options.jobs, [&](std::size_t i) {
    if (!feasible[i]) return;
    auto& r = out.cells[i];
    const auto& c = r.spec;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Forecaster f = options.factory
                               ? options.factory(c, r.seed)
                               : make_model_forecaster(selections, c.model, c.lookback, c.horizon, options.models,
                                                       r.seed, st.min_blocks);
      const std::size_t start = start_of.at(c.horizon);
      const double n = st.periods_per_year.value_or(12.0 / static_cast<double>(c.horizon));
      r.in_sample = evaluate(run_path(panel, f, c.horizon, start, split_row, st.top_k), start, split_row, n,
                             st.risk_free);
      r.out_of_sample =
          evaluate(run_path(panel, f, c.horizon, split_row, last, st.top_k), split_row, last, n, st.risk_free);
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.reason = e.what();
    }
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });
  return out;
}

}  // namespace sector_rank
