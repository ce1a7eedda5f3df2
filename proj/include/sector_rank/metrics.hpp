#pragma once

#include <optional>
#include <span>
#include <string>

#include "sector_rank/portfolio.hpp"

namespace sector_rank {

/// A metric that may be undefined (zero variance, zero drawdown).
using Metric = std::optional<double>;

/// Geometric annualisation in percent: ((1 + total)^(n / periods) - 1) * 100.
double annualized_return(double total_return, double periods_per_year, std::size_t periods);

/// Mean excess return over its sample (N - 1) standard deviation. Undefined
/// for fewer than two returns or zero variance.
Metric sharpe(std::span<const double> period_returns, double risk_free = 0.0);

Metric annualized_sharpe(Metric sharpe, double periods_per_year);

/// Largest fractional fall from a running peak. Throws on non-positive wealth.
double max_drawdown(std::span<const double> wealth);

/// (annualized return / 100) / max drawdown; undefined when the drawdown is 0.
Metric calmar(double annualized_return_percent, double max_drawdown);

struct MetricsReport {
  double total_return = 0.0;
  std::size_t periods = 0;
  double periods_per_year = 12.0;
  double risk_free = 0.0;
  double annualized_return = 0.0;  // percent
  Metric sharpe;
  Metric annualized_sharpe;
  double max_drawdown = 0.0;
  Metric calmar;
};

MetricsReport report(const PortfolioPath& path, double periods_per_year = 12.0, double risk_free = 0.0);

/// Shortest round-trip text, or the literal `undefined`.
std::string format_metric(const Metric& m);

}  // namespace sector_rank
