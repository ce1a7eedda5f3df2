#pragma once

#include <string>
#include <vector>

#include "sector_rank/marketdata.hpp"

namespace sector_rank {

struct HoldingPeriod {
  Month start;
  Month end;
  std::vector<std::string> holdings;  // equal weight each
  double realized_return = 0.0;

  double weight() const { return holdings.empty() ? 0.0 : 1.0 / static_cast<double>(holdings.size()); }
};

/// Non-overlapping holding periods with compounded wealth; wealth[0] == 1 and
/// wealth[k] == wealth[k-1] * (1 + periods[k-1].realized_return).
struct PortfolioPath {
  std::vector<HoldingPeriod> periods;
  std::vector<double> wealth{1.0};

  void append(HoldingPeriod p) {
    wealth.push_back(wealth.back() * (1.0 + p.realized_return));
    periods.push_back(std::move(p));
  }

  std::vector<double> returns() const {
    std::vector<double> r;
    r.reserve(periods.size());
    for (const auto& p : periods) r.push_back(p.realized_return);
    return r;
  }

  bool empty() const { return periods.empty(); }
  double total_return() const { return wealth.back() - 1.0; }
};

}  // namespace sector_rank
