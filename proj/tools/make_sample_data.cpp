// Writes the packaged synthetic dataset: daily sector ETF prices for
// 2000-07-14 .. 2019-11-10 and mixed-frequency macro series named after the
// per-sector catalog, plus a manifest.
//
// Planted regime: IYW, IYH, IYJ and IDU drift upward at 14% a year while the
// other four sectors have no drift. Every sector also gets a monthly
// "<ticker>_leading_index" whose month-end value is the sector's next
// month-end price with 2% multiplicative noise, so a model that learns the
// mapping can rank next month's returns. All other series are unrelated
// random walks. Also writes esn_probe.csv, the reservoir echo-property probe
// input.
//
//   make_sample_data <output dir> [seed]
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sector_rank/csv.hpp"
#include "sector_rank/marketdata.hpp"
#include "sector_rank/rng.hpp"

namespace fs = std::filesystem;
using namespace sector_rank;
using namespace std::chrono;

namespace {

const Date kPriceFirst = year{2000} / July / 14;
const Date kPriceLast = year{2019} / November / 10;
const Date kMacroFirst = year{1998} / January / 1;
const Date kMacroLast = year{2020} / December / 31;

bool is_weekday(Date d) {
  const weekday w{sys_days{d}};
  return w != Saturday && w != Sunday;
}

std::vector<Date> calendar_days(Date a, Date b) {
  std::vector<Date> out;
  for (sys_days d{a}; d <= sys_days{b}; d += days{1}) out.push_back(Date{d});
  return out;
}

void write_series(const fs::path& path, const std::vector<std::pair<Date, double>>& rows,
                  const std::vector<std::size_t>& blank = {}) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path);
  f << "date,value\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool empty = std::find(blank.begin(), blank.end(), i) != blank.end();
    f << format_date(rows[i].first) << ',' << (empty ? "" : csv::format(std::round(rows[i].second * 1e4) / 1e4))
      << '\n';
  }
}

struct Macro {
  std::string name;
  Frequency frequency;
  std::vector<std::string> sectors;  // "*" for all
  double level;
  double drift;  // per year, log
  double vol;    // per sqrt(year), log
};

// Dates at which a series of the given frequency is observed.
std::vector<Date> schedule(Frequency f) {
  std::vector<Date> out;
  for (const Date d : calendar_days(kMacroFirst, kMacroLast)) {
    const bool eom = d == month_end(month_of(d));
    switch (f) {
      case Frequency::daily: if (is_weekday(d)) out.push_back(d); break;
      case Frequency::weekly: if (weekday{sys_days{d}} == Friday) out.push_back(d); break;
      case Frequency::monthly: if (d.day() == day{1}) out.push_back(d); break;  // first-of-month convention
      case Frequency::quarterly:
        if (eom && (static_cast<unsigned>(d.month()) % 3 == 0)) out.push_back(d);
        break;
      case Frequency::annual: if (d.month() == December && d.day() == day{31}) out.push_back(d); break;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_sample_data <output dir> [seed]\n";
    return 2;
  }
  const fs::path out = argv[1];
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 20200101;

  const std::vector<std::string> tickers{"IYH", "IYE", "IDU", "IYG", "IYW", "IYM", "IYJ", "IYK"};
  const std::map<std::string, double> drift{{"IYW", 0.14}, {"IYH", 0.14}, {"IYJ", 0.14}, {"IDU", 0.14},
                                            {"IYE", 0.0},  {"IYG", 0.0},  {"IYM", 0.0},  {"IYK", 0.0}};
  const double sector_vol = 0.18;

  // Daily prices run past the published span so each leading index has its
  // next month-end price available.
  const std::vector<Date> trading = [&] {
    std::vector<Date> t;
    for (Date d : calendar_days(kPriceFirst, year{2020} / January / 31))
      if (is_weekday(d)) t.push_back(d);
    return t;
  }();

  nlohmann::ordered_json manifest;
  manifest["description"] =
      "Synthetic 8-sector sample. IYW, IYH, IYJ and IDU carry a planted upward drift; every sector has a monthly "
      "leading index that anticipates its next month-end price. Regenerate with tools/make_sample_data.";
  manifest["prices"] = nlohmann::ordered_json::array();
  manifest["series"] = nlohmann::ordered_json::array();

  for (std::size_t s = 0; s < tickers.size(); ++s) {
    const std::string& t = tickers[s];
    Rng rng = make_rng(seed, {1, s});
    const double dt = 1.0 / 252.0;
    double logp = std::log(40.0 + 10.0 * static_cast<double>(s));
    std::vector<std::pair<Date, double>> all;
    for (Date d : trading) {
      all.emplace_back(d, std::exp(logp));
      logp += (drift.at(t) - 0.5 * sector_vol * sector_vol) * dt + sector_vol * std::sqrt(dt) * normal(rng);
    }
    std::vector<std::pair<Date, double>> published;
    for (const auto& r : all)
      if (r.first <= kPriceLast) published.push_back(r);
    write_series(out / "prices" / (t + ".csv"), published);
    manifest["prices"].push_back({{"ticker", t}, {"path", "prices/" + t + ".csv"}, {"frequency", "daily"}});

    // Month-end close = last trading day on or before each month end.
    std::map<int, double> month_close;
    const Month first = month_of(kPriceFirst);
    for (const auto& [d, p] : all) month_close[months_between(first, month_of(d))] = p;

    Rng noise = make_rng(seed, {2, s});
    std::vector<std::pair<Date, double>> lead;
    for (int m = 0; month_close.count(m + 1); ++m)
      lead.emplace_back(month_end(add_months(first, m)), month_close.at(m + 1) * std::exp(0.02 * normal(noise)));
    // A few months before the price history starts, so coverage is not binding.
    const double p0 = lead.front().second;
    for (int m = -1; m >= -6; --m) lead.insert(lead.begin(), {month_end(add_months(first, m)), p0});
    const std::string name = t + "_leading_index";
    write_series(out / "macro" / (name + ".csv"), lead);
    manifest["series"].push_back(
        {{"name", name}, {"path", "macro/" + name + ".csv"}, {"frequency", "monthly"}, {"sectors", {t}}});
  }

  const std::vector<Macro> macros{
      {"gdp", Frequency::quarterly, {"*"}, 10000, 0.04, 0.02},
      {"unemployment_rate", Frequency::monthly, {"*"}, 5, 0.0, 0.15},
      {"cpi", Frequency::monthly, {"*"}, 170, 0.02, 0.01},
      {"mortgage30us", Frequency::weekly, {"*"}, 7, -0.03, 0.1},
      {"fed_funds_rate", Frequency::monthly, {"*"}, 4, -0.05, 0.3},
      {"life_expectancy", Frequency::annual, {"IYH"}, 77, 0.002, 0.002},
      {"population", Frequency::annual, {"IYH"}, 280, 0.008, 0.002},
      {"birth_rate", Frequency::annual, {"IYH"}, 14, -0.01, 0.01},
      {"death_rate", Frequency::annual, {"IYH"}, 8.5, 0.0, 0.01},
      {"us_inflation_rate", Frequency::annual, {"IYG", "IYM"}, 2.5, 0.0, 0.3},
      {"libor_rate", Frequency::daily, {"IYG"}, 5, -0.05, 0.3},
      {"ted_spread", Frequency::daily, {"IYG"}, 0.4, 0.0, 0.4},
      {"debt_to_gdp", Frequency::monthly, {"IYG"}, 60, 0.03, 0.03},
      {"gold", Frequency::monthly, {"IYM"}, 280, 0.07, 0.15},
      {"copper", Frequency::daily, {"IYM"}, 1800, 0.05, 0.25},
      {"aluminum", Frequency::monthly, {"IYM"}, 1500, 0.01, 0.2},
      {"industrial_production", Frequency::monthly, {"IYJ"}, 90, 0.01, 0.04},
      {"crude_oil_price", Frequency::monthly, {"IYJ", "IYE", "IDU"}, 30, 0.04, 0.35},
      {"capacity_utilization", Frequency::monthly, {"IYJ"}, 80, 0.0, 0.03},
      {"manufacturing", Frequency::monthly, {"IYJ"}, 55, 0.0, 0.08},
      {"consumer_confidence", Frequency::monthly, {"IYK", "IYW"}, 100, 0.0, 0.05},
      {"business_confidence", Frequency::monthly, {"IYK"}, 100, 0.0, 0.04},
      {"import", Frequency::monthly, {"IYW", "IYE", "IDU"}, 120, 0.04, 0.08},
      {"export_value", Frequency::annual, {"IYW"}, 1000, 0.04, 0.06},
      {"rd_value", Frequency::annual, {"IYW"}, 300, 0.05, 0.03},
      {"technology_investment", Frequency::annual, {"IYW"}, 400, 0.05, 0.08},
      {"refinery_utilization", Frequency::weekly, {"IYE", "IDU"}, 90, 0.0, 0.04},
      {"primary_energy_production", Frequency::monthly, {"IYE"}, 6, 0.02, 0.04},
      {"primary_energy_consumption", Frequency::monthly, {"IYE"}, 8, 0.005, 0.03},
      {"natural_gas_consumption", Frequency::annual, {"IDU"}, 23, 0.01, 0.03},
      {"natural_gas_price", Frequency::annual, {"IDU"}, 4, 0.0, 0.3},
      {"interest_rate", Frequency::daily, {"IDU"}, 5, -0.04, 0.2},
      {"energy_consumption", Frequency::monthly, {"IDU"}, 8, 0.005, 0.03},
      {"electricity_gas_production", Frequency::monthly, {"IDU"}, 100, 0.01, 0.04},
  };
  std::size_t k = 0;
  for (const auto& m : macros) {
    Rng rng = make_rng(seed, {3, k++});
    const auto dates = schedule(m.frequency);
    std::vector<std::pair<Date, double>> rows;
    double x = std::log(m.level);
    Date prev = dates.front();
    for (Date d : dates) {
      const double dt = static_cast<double>((sys_days{d} - sys_days{prev}).count()) / 365.25;
      x += m.drift * dt + m.vol * std::sqrt(dt) * normal(rng);
      rows.emplace_back(d, std::exp(x));
      prev = d;
    }
    // cpi ships with a few blank cells, as vendor downloads often do
    const std::vector<std::size_t> blank = m.name == "cpi" ? std::vector<std::size_t>{40, 41, 150} : std::vector<std::size_t>{};
    write_series(out / "macro" / (m.name + ".csv"), rows, blank);
    manifest["series"].push_back({{"name", m.name},
                                  {"path", "macro/" + m.name + ".csv"},
                                  {"frequency", std::string(to_string(m.frequency))},
                                  {"sectors", m.sectors}});
  }

  std::ofstream(out / "manifest.json") << manifest.dump(2) << '\n';

  // Echo-property probe input: 200 steps of 4 channels, uniform in [-3, 3].
  // Inputs of this size keep tanh partly saturated, which the literal leaky
  // update needs in order to forget its initial state at spectral radius 1.
  {
    Rng rng = make_rng(seed, {4});
    std::ofstream f(out / "esn_probe.csv");
    f << "u0,u1,u2,u3\n";
    for (int t = 0; t < 200; ++t)
      for (int j = 0; j < 4; ++j) f << csv::format(std::round(uniform(rng, -3.0, 3.0) * 1e6) / 1e6) << (j < 3 ? ',' : '\n');
  }
  std::cout << "wrote sample dataset to " << out.string() << '\n';
  return 0;
}
