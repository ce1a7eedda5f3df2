#pragma once

#include <string>
#include <vector>

namespace sector_rank::svg {

struct Series {
  std::string name;
  std::vector<double> y;  // non-finite values break the line
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<std::string> x_ticks;  // optional labels, one per x
  std::vector<Series> series;
};

/// Minimal standalone SVG line chart with a legend.
std::string render(const LineChart& chart, int width = 720, int height = 420);

}  // namespace sector_rank::svg
