#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sector_rank {

using Date = std::chrono::year_month_day;
using Month = std::chrono::year_month;

/// Raised for malformed or insufficient input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Frequency { daily, weekly, monthly, quarterly, annual };

Frequency parse_frequency(std::string_view tag);
std::string_view to_string(Frequency f);

/// Daily and weekly series are sampled at month end; coarser ones are interpolated.
constexpr bool is_sampled(Frequency f) { return f == Frequency::daily || f == Frequency::weekly; }

// Calendar helpers. Months are anchored on their last calendar day.
Date parse_date(std::string_view iso);
std::string format_date(Date d);
Month parse_month(std::string_view yyyy_mm);
std::string format_month(Month m);
Date month_end(Month m);
Month month_of(Date d);
Month add_months(Month m, int n);
/// Number of months from `a` to `b` (b - a); negative when b precedes a.
int months_between(Month a, Month b);

struct Observation {
  Date date;
  double value;
};

/// A named raw series at its native frequency. Observations are strictly
/// increasing in date, finite, and number at least two.
class RawSeries {
 public:
  RawSeries(std::string name, Frequency frequency, std::vector<Observation> observations);

  const std::string& name() const { return name_; }
  Frequency frequency() const { return frequency_; }
  const std::vector<Observation>& observations() const { return observations_; }
  Date first_date() const { return observations_.front().date; }
  Date last_date() const { return observations_.back().date; }

 private:
  std::string name_;
  Frequency frequency_;
  std::vector<Observation> observations_;
};

/// Inclusive range of months.
struct MonthRange {
  Month first;
  Month last;

  bool empty() const { return last < first; }
  std::size_t size() const { return empty() ? 0 : static_cast<std::size_t>(months_between(first, last) + 1); }
  bool contains(Month m) const { return first <= m && m <= last; }
};

MonthRange intersect(const MonthRange& a, const MonthRange& b);

struct SeriesLoad {
  RawSeries series;
  std::size_t dropped_rows = 0;  // rows with an empty value cell
};

/// Reads a `date,value` CSV. Rows with an empty value are dropped; the result is
/// sorted by date. Throws DataError on unreadable files, unparseable rows
/// (reported by 1-based data row), duplicate dates or fewer than two rows.
SeriesLoad load_series_csv(const std::filesystem::path& path, std::string name, Frequency frequency);
RawSeries parse_series_csv(const std::filesystem::path& path, std::string name, Frequency frequency);

/// Months for which resample_monthly can produce a value without extrapolation.
MonthRange coverage(const RawSeries& series);

struct Resampled {
  std::vector<double> values;
  std::size_t exact = 0;         // anchor coincided with an observation
  std::size_t interpolated = 0;  // linear in days between bracketing observations
  std::size_t sampled = 0;       // last observation at or before the anchor
};

Resampled resample_monthly_detailed(const RawSeries& series, const MonthRange& span);
std::vector<double> resample_monthly(const RawSeries& series, const MonthRange& span);

struct Sector {
  std::string name;
  std::string ticker;
};

class SectorUniverse {
 public:
  explicit SectorUniverse(std::vector<Sector> sectors);

  /// healthcare/IYH, energy/IYE, utilities/IDU, finance/IYG, technology/IYW,
  /// materials/IYM, industrials/IYJ, consumer goods/IYK.
  static SectorUniverse standard();

  const std::vector<Sector>& sectors() const { return sectors_; }
  std::size_t size() const { return sectors_.size(); }
  std::optional<std::size_t> find(std::string_view ticker) const;

 private:
  std::vector<Sector> sectors_;
};

/// Rectangular monthly grid of features and sector prices. Row i corresponds to
/// month first_month() + i.
class MonthlyPanel {
 public:
  MonthlyPanel(Month first, std::vector<std::string> feature_names, Eigen::MatrixXd features,
               std::vector<std::string> tickers, Eigen::MatrixXd prices);

  std::size_t rows() const { return static_cast<std::size_t>(prices_.rows()); }
  Month first_month() const { return first_; }
  Month last_month() const { return month(rows() - 1); }
  Month month(std::size_t row) const { return add_months(first_, static_cast<int>(row)); }
  std::optional<std::size_t> row_of(Month m) const;

  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::string>& tickers() const { return tickers_; }
  const Eigen::MatrixXd& features() const { return features_; }
  const Eigen::MatrixXd& prices() const { return prices_; }

  std::size_t feature_index(std::string_view name) const;
  std::size_t ticker_index(std::string_view ticker) const;

  /// The first `rows` months only.
  MonthlyPanel head(std::size_t rows) const;

 private:
  Month first_;
  std::vector<std::string> feature_names_;
  Eigen::MatrixXd features_;
  std::vector<std::string> tickers_;
  Eigen::MatrixXd prices_;
};

struct SeriesCoverage {
  std::string name;
  MonthRange months;
  Resampled resampled;
};

struct PanelAssembly {
  MonthlyPanel panel;
  std::string binding_start;  // series whose coverage starts last
  std::string binding_end;    // series whose coverage ends first
  std::vector<SeriesCoverage> series;
};

/// Aligns sector prices (matched to the universe by series name == ticker) and
/// macro series on the intersection of their monthly coverage.
PanelAssembly assemble_panel(const std::vector<RawSeries>& price_series,
                             const std::vector<RawSeries>& macro_series,
                             const SectorUniverse& universe);
MonthlyPanel build_panel(const std::vector<RawSeries>& price_series,
                         const std::vector<RawSeries>& macro_series,
                         const SectorUniverse& universe);

/// (p1 - p0) / p0. Throws std::invalid_argument when p0 <= 0.
double rate_of_return(double p0, double p1);

// Versioned panel artifact (CSV with `feature:` / `price:` column prefixes).
void write_panel_csv(std::ostream& out, const MonthlyPanel& panel);
void write_panel_csv(const std::filesystem::path& path, const MonthlyPanel& panel);
MonthlyPanel read_panel_csv(std::istream& in);
MonthlyPanel read_panel_csv(const std::filesystem::path& path);

}  // namespace sector_rank
