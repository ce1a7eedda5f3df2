#include "sector_rank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sector_rank/csv.hpp"

namespace sector_rank {

double annualized_return(double total_return, double periods_per_year, std::size_t periods) {
  if (!(total_return > -1.0)) throw std::invalid_argument("annualized_return: total return must exceed -100%");
  if (periods == 0) throw std::invalid_argument("annualized_return: need at least one period");
  if (!(periods_per_year > 0.0)) throw std::invalid_argument("annualized_return: periods per year must be positive");
  return (std::pow(1.0 + total_return, periods_per_year / static_cast<double>(periods)) - 1.0) * 100.0;
}

Metric sharpe(std::span<const double> period_returns, double risk_free) {
  const std::size_t n = period_returns.size();
  if (n < 2) return std::nullopt;
  double mean = 0.0;
  for (double r : period_returns) mean += r - risk_free;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double r : period_returns) ss += (r - risk_free - mean) * (r - risk_free - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  // Returns that differ only by rounding should not produce a huge ratio.
  if (!(sd > 1e-14 * std::max(1.0, std::abs(mean)))) return std::nullopt;
  return mean / sd;
}

Metric annualized_sharpe(Metric s, double periods_per_year) {
  if (!s) return std::nullopt;
  return *s * std::sqrt(periods_per_year);
}

double max_drawdown(std::span<const double> wealth) {
  double peak = 0.0, worst = 0.0;
  for (double w : wealth) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("max_drawdown: wealth must be positive and finite");
    peak = std::max(peak, w);
    worst = std::max(worst, (peak - w) / peak);
  }
  return worst;
}

Metric calmar(double annualized_return_percent, double mdd) {
  if (!(mdd > 0.0)) return std::nullopt;
  return annualized_return_percent / 100.0 / mdd;
}

MetricsReport report(const PortfolioPath& path, double periods_per_year, double risk_free) {
  if (path.empty()) throw std::invalid_argument("report: empty portfolio path");
  MetricsReport m;
  m.total_return = path.total_return();
  m.periods = path.periods.size();
  m.periods_per_year = periods_per_year;
  m.risk_free = risk_free;
  m.annualized_return = annualized_return(m.total_return, periods_per_year, m.periods);
  const auto r = path.returns();
  m.sharpe = sharpe(r, risk_free);
  m.annualized_sharpe = annualized_sharpe(m.sharpe, periods_per_year);
  m.max_drawdown = max_drawdown(path.wealth);
  m.calmar = calmar(m.annualized_return, m.max_drawdown);
  return m;
}

std::string format_metric(const Metric& m) { return m ? csv::format(*m) : "undefined"; }

}  // namespace sector_rank
