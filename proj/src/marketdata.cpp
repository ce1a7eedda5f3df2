#include "sector_rank/marketdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sector_rank/csv.hpp"

namespace sector_rank {

using namespace std::chrono;

Frequency parse_frequency(std::string_view tag) {
  if (tag == "daily") return Frequency::daily;
  if (tag == "weekly") return Frequency::weekly;
  if (tag == "monthly") return Frequency::monthly;
  if (tag == "quarterly") return Frequency::quarterly;
  if (tag == "annual") return Frequency::annual;
  throw DataError("unknown frequency tag '" + std::string(tag) + "'");
}

std::string_view to_string(Frequency f) {
  switch (f) {
    case Frequency::daily: return "daily";
    case Frequency::weekly: return "weekly";
    case Frequency::monthly: return "monthly";
    case Frequency::quarterly: return "quarterly";
    case Frequency::annual: return "annual";
  }
  return "?";
}

namespace {

bool parse_int_part(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string pad2(unsigned v) { return v < 10 ? "0" + std::to_string(v) : std::to_string(v); }

}  // namespace

Date parse_date(std::string_view iso) {
  while (!iso.empty() && (iso.back() == ' ' || iso.back() == '\r')) iso.remove_suffix(1);
  while (!iso.empty() && iso.front() == ' ') iso.remove_prefix(1);
  int y = 0, m = 0, d = 0;
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' || !parse_int_part(iso.substr(0, 4), y) ||
      !parse_int_part(iso.substr(5, 2), m) || !parse_int_part(iso.substr(8, 2), d))
    throw DataError("invalid ISO date '" + std::string(iso) + "'");
  Date date{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!date.ok()) throw DataError("invalid calendar date '" + std::string(iso) + "'");
  return date;
}

std::string format_date(Date d) {
  return std::to_string(static_cast<int>(d.year())) + "-" + pad2(static_cast<unsigned>(d.month())) + "-" +
         pad2(static_cast<unsigned>(d.day()));
}

Month parse_month(std::string_view s) {
  int y = 0, m = 0;
  if (s.size() != 7 || s[4] != '-' || !parse_int_part(s.substr(0, 4), y) || !parse_int_part(s.substr(5, 2), m) ||
      m < 1 || m > 12)
    throw DataError("invalid month '" + std::string(s) + "' (expected YYYY-MM)");
  return Month{year{y}, month{static_cast<unsigned>(m)}};
}

std::string format_month(Month m) {
  return std::to_string(static_cast<int>(m.year())) + "-" + pad2(static_cast<unsigned>(m.month()));
}

Date month_end(Month m) { return Date{m / last}; }

Month month_of(Date d) { return Month{d.year(), d.month()}; }

Month add_months(Month m, int n) { return m + months{n}; }

int months_between(Month a, Month b) {
  return (static_cast<int>(b.year()) - static_cast<int>(a.year())) * 12 +
         (static_cast<int>(static_cast<unsigned>(b.month())) - static_cast<int>(static_cast<unsigned>(a.month())));
}

MonthRange intersect(const MonthRange& a, const MonthRange& b) {
  return MonthRange{std::max(a.first, b.first), std::min(a.last, b.last)};
}

RawSeries::RawSeries(std::string name, Frequency frequency, std::vector<Observation> observations)
    : name_(std::move(name)), frequency_(frequency), observations_(std::move(observations)) {
  if (observations_.size() < 2)
    throw DataError("series '" + name_ + "': insufficient observations (" + std::to_string(observations_.size()) +
                    ", need at least 2)");
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    if (!std::isfinite(observations_[i].value))
      throw DataError("series '" + name_ + "': non-finite value at " + format_date(observations_[i].date));
    if (i > 0 && !(sys_days{observations_[i - 1].date} < sys_days{observations_[i].date}))
      throw DataError("series '" + name_ + "': dates not strictly increasing at " +
                      format_date(observations_[i].date));
  }
}

SeriesLoad load_series_csv(const std::filesystem::path& path, std::string name, Frequency frequency) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read series file " + path.string());

  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  std::size_t dropped = 0;
  std::vector<Observation> obs;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      auto h = csv::split(line);
      if (h.size() == 2 && h[0] == "date" && h[1] == "value") continue;
      throw DataError(path.string() + ": expected header 'date,value'");
    }
    ++row;
    auto fields = csv::split(line);
    if (fields.size() != 2)
      throw DataError(path.string() + ": row " + std::to_string(row) + ": expected 2 fields");
    Date d;
    try {
      d = parse_date(fields[0]);
    } catch (const DataError& e) {
      throw DataError(path.string() + ": row " + std::to_string(row) + ": " + e.what());
    }
    std::string_view cell = fields[1];
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
    if (cell.empty()) {
      ++dropped;
      continue;
    }
    auto v = csv::parse_double(cell);
    if (!v || !std::isfinite(*v))
      throw DataError(path.string() + ": row " + std::to_string(row) + ": unparseable number '" +
                      std::string(cell) + "'");
    obs.push_back({d, *v});
  }

  std::stable_sort(obs.begin(), obs.end(),
                   [](const Observation& a, const Observation& b) { return sys_days{a.date} < sys_days{b.date}; });
  for (std::size_t i = 1; i < obs.size(); ++i)
    if (obs[i].date == obs[i - 1].date)
      throw DataError(path.string() + ": duplicate date " + format_date(obs[i].date));
  if (obs.size() < 2)
    throw DataError(path.string() + ": insufficient observations (" + std::to_string(obs.size()) + " valid rows)");
  return SeriesLoad{RawSeries(std::move(name), frequency, std::move(obs)), dropped};
}

RawSeries parse_series_csv(const std::filesystem::path& path, std::string name, Frequency frequency) {
  return load_series_csv(path, std::move(name), frequency).series;
}

MonthRange coverage(const RawSeries& series) {
  const Month first = month_of(series.first_date());
  Month last = month_of(series.last_date());
  if (!is_sampled(series.frequency()) && series.last_date() != month_end(last)) last = add_months(last, -1);
  return MonthRange{first, last};
}

Resampled resample_monthly_detailed(const RawSeries& series, const MonthRange& span) {
  const MonthRange cov = coverage(series);
  if (span.first < cov.first)
    throw DataError("series '" + series.name() + "': span start " + format_month(span.first) +
                    " precedes coverage start " + format_month(cov.first));
  if (span.last > cov.last)
    throw DataError("series '" + series.name() + "': span end " + format_month(span.last) +
                    " exceeds coverage end " + format_month(cov.last));

  const auto& obs = series.observations();
  Resampled out;
  out.values.reserve(span.size());
  for (Month m = span.first; m <= span.last; m = add_months(m, 1)) {
    const sys_days anchor{month_end(m)};
    auto it = std::lower_bound(obs.begin(), obs.end(), anchor,
                               [](const Observation& o, sys_days a) { return sys_days{o.date} < a; });
    if (it != obs.end() && sys_days{it->date} == anchor) {
      out.values.push_back(it->value);
      ++out.exact;
      continue;
    }
    // `it` is the first observation after the anchor; coverage guarantees a predecessor.
    const Observation& before = *(it - 1);
    if (is_sampled(series.frequency())) {
      out.values.push_back(before.value);
      ++out.sampled;
      continue;
    }
    const Observation& after = *it;
    const double span_days = static_cast<double>((sys_days{after.date} - sys_days{before.date}).count());
    const double offset = static_cast<double>((anchor - sys_days{before.date}).count());
    out.values.push_back(before.value + (after.value - before.value) * (offset / span_days));
    ++out.interpolated;
  }
  return out;
}

std::vector<double> resample_monthly(const RawSeries& series, const MonthRange& span) {
  return resample_monthly_detailed(series, span).values;
}

SectorUniverse::SectorUniverse(std::vector<Sector> sectors) : sectors_(std::move(sectors)) {
  if (sectors_.empty()) throw std::invalid_argument("sector universe is empty");
  std::set<std::string> seen;
  for (const auto& s : sectors_) {
    if (s.ticker.empty()) throw std::invalid_argument("sector '" + s.name + "' has an empty ticker");
    if (!seen.insert(s.ticker).second) throw std::invalid_argument("duplicate ticker " + s.ticker);
  }
}

SectorUniverse SectorUniverse::standard() {
  return SectorUniverse({{"healthcare", "IYH"},
                         {"energy", "IYE"},
                         {"utilities", "IDU"},
                         {"finance", "IYG"},
                         {"technology", "IYW"},
                         {"materials", "IYM"},
                         {"industrials", "IYJ"},
                         {"consumer goods", "IYK"}});
}

std::optional<std::size_t> SectorUniverse::find(std::string_view ticker) const {
  for (std::size_t i = 0; i < sectors_.size(); ++i)
    if (sectors_[i].ticker == ticker) return i;
  return std::nullopt;
}

MonthlyPanel::MonthlyPanel(Month first, std::vector<std::string> feature_names, Eigen::MatrixXd features,
                           std::vector<std::string> tickers, Eigen::MatrixXd prices)
    : first_(first),
      feature_names_(std::move(feature_names)),
      features_(std::move(features)),
      tickers_(std::move(tickers)),
      prices_(std::move(prices)) {
  if (prices_.rows() == 0) throw DataError("panel has no months");
  if (features_.rows() != prices_.rows())
    throw DataError("panel features and prices disagree on month count");
  if (static_cast<std::size_t>(features_.cols()) != feature_names_.size() ||
      static_cast<std::size_t>(prices_.cols()) != tickers_.size())
    throw DataError("panel column names do not match matrix widths");
  if (!features_.allFinite() || !prices_.allFinite()) throw DataError("panel contains non-finite values");
}

std::optional<std::size_t> MonthlyPanel::row_of(Month m) const {
  const int k = months_between(first_, m);
  if (k < 0 || static_cast<std::size_t>(k) >= rows()) return std::nullopt;
  return static_cast<std::size_t>(k);
}

std::size_t MonthlyPanel::feature_index(std::string_view name) const {
  for (std::size_t i = 0; i < feature_names_.size(); ++i)
    if (feature_names_[i] == name) return i;
  throw DataError("panel has no feature '" + std::string(name) + "'");
}

std::size_t MonthlyPanel::ticker_index(std::string_view ticker) const {
  for (std::size_t i = 0; i < tickers_.size(); ++i)
    if (tickers_[i] == ticker) return i;
  throw DataError("panel has no price column for ticker '" + std::string(ticker) + "'");
}

MonthlyPanel MonthlyPanel::head(std::size_t n) const {
  if (n == 0 || n > rows()) throw std::out_of_range("MonthlyPanel::head: bad row count");
  const auto k = static_cast<Eigen::Index>(n);
  return MonthlyPanel(first_, feature_names_, features_.topRows(k), tickers_, prices_.topRows(k));
}

PanelAssembly assemble_panel(const std::vector<RawSeries>& price_series, const std::vector<RawSeries>& macro_series,
                             const SectorUniverse& universe) {
  std::vector<const RawSeries*> prices;
  for (const auto& sector : universe.sectors()) {
    auto it = std::find_if(price_series.begin(), price_series.end(),
                           [&](const RawSeries& s) { return s.name() == sector.ticker; });
    if (it == price_series.end()) throw DataError("missing price series for ticker " + sector.ticker);
    prices.push_back(&*it);
  }

  std::vector<const RawSeries*> all(prices);
  for (const auto& s : macro_series) all.push_back(&s);

  MonthRange span = coverage(*all.front());
  std::string binding_start = all.front()->name(), binding_end = all.front()->name();
  for (const RawSeries* s : all) {
    const MonthRange c = coverage(*s);
    if (c.first > span.first) binding_start = s->name();
    if (c.last < span.last) binding_end = s->name();
    span = intersect(span, c);
  }
  if (span.empty())
    throw DataError("series coverages do not overlap (latest start from '" + binding_start +
                    "', earliest end from '" + binding_end + "')");

  const auto n = static_cast<Eigen::Index>(span.size());
  std::vector<SeriesCoverage> report;

  Eigen::MatrixXd price_matrix(n, static_cast<Eigen::Index>(prices.size()));
  std::vector<std::string> tickers;
  for (std::size_t j = 0; j < prices.size(); ++j) {
    Resampled r = resample_monthly_detailed(*prices[j], span);
    for (Eigen::Index i = 0; i < n; ++i) price_matrix(i, static_cast<Eigen::Index>(j)) = r.values[i];
    tickers.push_back(prices[j]->name());
    report.push_back({prices[j]->name(), coverage(*prices[j]), std::move(r)});
  }

  Eigen::MatrixXd feature_matrix(n, static_cast<Eigen::Index>(macro_series.size()));
  std::vector<std::string> names;
  for (std::size_t j = 0; j < macro_series.size(); ++j) {
    if (std::find(names.begin(), names.end(), macro_series[j].name()) != names.end())
      throw DataError("duplicate macro series name '" + macro_series[j].name() + "'");
    Resampled r = resample_monthly_detailed(macro_series[j], span);
    for (Eigen::Index i = 0; i < n; ++i) feature_matrix(i, static_cast<Eigen::Index>(j)) = r.values[i];
    names.push_back(macro_series[j].name());
    report.push_back({macro_series[j].name(), coverage(macro_series[j]), std::move(r)});
  }

  return PanelAssembly{MonthlyPanel(span.first, std::move(names), std::move(feature_matrix), std::move(tickers),
                                    std::move(price_matrix)),
                       binding_start, binding_end, std::move(report)};
}

MonthlyPanel build_panel(const std::vector<RawSeries>& price_series, const std::vector<RawSeries>& macro_series,
                         const SectorUniverse& universe) {
  return assemble_panel(price_series, macro_series, universe).panel;
}

double rate_of_return(double p0, double p1) {
  if (!(p0 > 0.0)) throw std::invalid_argument("rate_of_return: base price must be positive");
  return (p1 - p0) / p0;
}

namespace {
constexpr std::string_view kPanelMagic = "# sector-rank panel v1";
}

void write_panel_csv(std::ostream& out, const MonthlyPanel& panel) {
  out << kPanelMagic << '\n';
  std::vector<std::string> header{"month"};
  for (const auto& f : panel.feature_names()) header.push_back("feature:" + f);
  for (const auto& t : panel.tickers()) header.push_back("price:" + t);
  out << csv::join(header) << '\n';
  for (std::size_t i = 0; i < panel.rows(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << format_month(panel.month(i));
    for (Eigen::Index j = 0; j < panel.features().cols(); ++j) out << ',' << csv::format(panel.features()(r, j));
    for (Eigen::Index j = 0; j < panel.prices().cols(); ++j) out << ',' << csv::format(panel.prices()(r, j));
    out << '\n';
  }
}

void write_panel_csv(const std::filesystem::path& path, const MonthlyPanel& panel) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_panel_csv(out, panel);
}

MonthlyPanel read_panel_csv(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic) || magic.rfind(kPanelMagic, 0) != 0)
    throw DataError("not a panel artifact (missing '" + std::string(kPanelMagic) + "' line)");
  const csv::Table t = csv::read(in);
  if (t.header.empty() || t.header[0] != "month") throw DataError("panel artifact: first column must be 'month'");
  if (t.rows.empty()) throw DataError("panel artifact has no rows");

  std::vector<std::size_t> fcols, pcols;
  std::vector<std::string> fnames, tickers;
  for (std::size_t j = 1; j < t.header.size(); ++j) {
    const std::string& h = t.header[j];
    if (h.rfind("feature:", 0) == 0) {
      fcols.push_back(j);
      fnames.push_back(h.substr(8));
    } else if (h.rfind("price:", 0) == 0) {
      pcols.push_back(j);
      tickers.push_back(h.substr(6));
    } else {
      throw DataError("panel artifact: unrecognised column '" + h + "'");
    }
  }

  const auto n = static_cast<Eigen::Index>(t.rows.size());
  Eigen::MatrixXd f(n, static_cast<Eigen::Index>(fcols.size())), p(n, static_cast<Eigen::Index>(pcols.size()));
  const Month first = parse_month(t.rows.front()[0]);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    if (parse_month(row[0]) != add_months(first, static_cast<int>(i)))
      throw DataError("panel artifact: months not contiguous at " + row[0]);
    auto cell = [&](std::size_t c) {
      auto v = csv::parse_double(row[c]);
      if (!v) throw DataError("panel artifact: bad number '" + row[c] + "' at " + row[0]);
      return *v;
    };
    for (std::size_t j = 0; j < fcols.size(); ++j) f(i, static_cast<Eigen::Index>(j)) = cell(fcols[j]);
    for (std::size_t j = 0; j < pcols.size(); ++j) p(i, static_cast<Eigen::Index>(j)) = cell(pcols[j]);
  }
  return MonthlyPanel(first, std::move(fnames), std::move(f), std::move(tickers), std::move(p));
}

MonthlyPanel read_panel_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read panel artifact " + path.string());
  return read_panel_csv(in);
}

}  // namespace sector_rank
