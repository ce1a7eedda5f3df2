#include "sector_rank/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sector_rank/csv.hpp"
#include "sector_rank/parallel.hpp"
#include "sector_rank/rng.hpp"
#include "sector_rank/svg.hpp"

namespace sector_rank {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSelectionStream = 0x5e1ec7;

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  return f;
}

void write_text(const fs::path& path, const std::string& text) {
  auto f = open_out(path);
  f << text;
}

std::string opt_text(const std::optional<double>& v) { return format_metric(v); }

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> span_names() { return {"in_sample", "out_of_sample"}; }

const SpanResult& span_of(const CellResult& c, std::size_t s) { return s == 0 ? c.in_sample : c.out_of_sample; }
const SpanResult& span_of(const BenchmarkResult& b, std::size_t s) { return s == 0 ? b.in_sample : b.out_of_sample; }

}  // namespace

fs::path resolve_output_dir(const ExperimentConfig& config, const std::optional<fs::path>& out_flag) {
  if (out_flag && !out_flag->empty()) return *out_flag;
  if (config.output) return *config.output;
  if (const char* env = std::getenv("SECTOR_RANK_OUT"); env && *env) return fs::path(env);
  throw ConfigError("no output directory: pass --out, set \"output\" in the config, or set SECTOR_RANK_OUT");
}

fs::path panel_path(const fs::path& out) { return out / "panel.csv"; }
fs::path selections_path(const fs::path& out) { return out / "selection" / "selections.csv"; }
fs::path results_path(const fs::path& out) { return out / "backtest" / "results.csv"; }

// ---------------------------------------------------------------- ingest

IngestOutcome cmd_ingest(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  const DataManifest manifest = load_manifest(config.manifest);
  const SectorUniverse universe = config.sector_universe();

  struct Loaded {
    std::string role;
    SeriesLoad load;
  };
  std::map<std::string, Loaded> loaded;
  std::vector<RawSeries> prices, macro;
  auto load = [&](const SeriesEntry& e, const std::string& role) {
    try {
      SeriesLoad l = load_series_csv(e.path, e.name, e.frequency);
      (role == "price" ? prices : macro).push_back(l.series);
      loaded.emplace(e.name, Loaded{role, std::move(l)});
    } catch (const DataError& ex) {
      throw DataError("series '" + e.name + "': " + ex.what());
    }
  };
  for (const auto& e : manifest.prices)
    if (universe.find(e.name)) load(e, "price");
  for (const auto& e : manifest.macro) load(e, "feature");

  IngestOutcome r{assemble_panel(prices, macro, universe), panel_path(out), out / "ingest_report.csv"};
  const MonthlyPanel& panel = r.assembly.panel;
  fs::create_directories(out);
  write_panel_csv(r.panel_file, panel);

  auto f = open_out(r.report_file);
  f << "series,role,frequency,first_observation,last_observation,coverage_first,coverage_last,dropped_rows,"
       "exact,interpolated,sampled\n";
  for (const auto& s : r.assembly.series) {
    const auto& l = loaded.at(s.name);
    const RawSeries& raw = l.load.series;
    f << csv::join({s.name, l.role, std::string(to_string(raw.frequency())), format_date(raw.first_date()),
                    format_date(raw.last_date()), format_month(s.months.first), format_month(s.months.last),
                    std::to_string(l.load.dropped_rows), std::to_string(s.resampled.exact),
                    std::to_string(s.resampled.interpolated), std::to_string(s.resampled.sampled)})
      << '\n';
  }

  log << "panel: " << panel.rows() << " months, " << format_month(panel.first_month()) << " .. "
      << format_month(panel.last_month()) << ", " << panel.feature_names().size() << " features, "
      << panel.tickers().size() << " sectors\n";
  log << "span bound by '" << r.assembly.binding_start << "' (start) and '" << r.assembly.binding_end << "' (end)\n";
  for (const auto& [name, l] : loaded)
    if (l.load.dropped_rows) log << "series '" << name << "': dropped " << l.load.dropped_rows << " empty rows\n";
  log << "wrote " << r.panel_file.string() << " and " << r.report_file.string() << '\n';
  return r;
}

// ---------------------------------------------------------------- select

void write_selections_csv(const fs::path& path, const std::vector<FeatureSelection>& selections) {
  auto f = open_out(path);
  f << "ticker,rank,feature,importance\n";
  for (const auto& s : selections)
    for (std::size_t i = 0; i < s.kept.size(); ++i)
      f << csv::join({s.sector, std::to_string(i + 1), s.kept[i],
                      csv::format(s.kept_importances(static_cast<Eigen::Index>(i)))})
        << '\n';
}

SelectionMap read_selections_csv(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("missing selections " + path.string() + " (run `select` first)");
  const csv::Table t = csv::read(path);
  const auto ct = t.column("ticker"), cr = t.column("rank"), cf = t.column("feature");
  std::map<std::string, std::map<long long, std::string>> ranked;
  for (const auto& row : t.rows) {
    const auto rank = csv::parse_int(row[cr]);
    if (!rank) throw DataError("selections: bad rank '" + row[cr] + "'");
    ranked[row[ct]][*rank] = row[cf];
  }
  SelectionMap m;
  for (const auto& [ticker, byrank] : ranked)
    for (const auto& [rank, feature] : byrank) m[ticker].push_back(feature);
  return m;
}

std::vector<FeatureSelection> cmd_select(const ExperimentConfig& config, const fs::path& out, std::size_t jobs,
                                         std::ostream& log) {
  const fs::path pp = panel_path(out);
  if (!fs::exists(pp)) throw DataError("missing panel artifact " + pp.string() + " (run `ingest` first)");
  const MonthlyPanel panel = read_panel_csv(pp);
  const DataManifest manifest = load_manifest(config.manifest);
  const SectorUniverse universe = config.sector_universe();
  const auto& sectors = universe.sectors();

  std::vector<FeatureSelection> result(sectors.size());
  parallel_for(sectors.size(), jobs, [&](std::size_t s) {
    const std::string& ticker = sectors[s].ticker;
    std::vector<std::string> names;
    for (const auto& c : manifest.candidates_for(ticker))
      if (std::find(panel.feature_names().begin(), panel.feature_names().end(), c) != panel.feature_names().end())
        names.push_back(c);
    if (names.size() < config.selection.target_count)
      throw ConfigError(ticker + ": only " + std::to_string(names.size()) + " candidate features for " +
                        std::to_string(config.selection.target_count) + " to keep");
    Eigen::MatrixXd X(static_cast<Eigen::Index>(panel.rows()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j)
      X.col(static_cast<Eigen::Index>(j)) =
          panel.features().col(static_cast<Eigen::Index>(panel.feature_index(names[j])));
    const Eigen::VectorXd y = panel.prices().col(static_cast<Eigen::Index>(panel.ticker_index(ticker)));
    result[s] = rfe_select(X, y, names, config.selection, derive_seed(config.seed, {kSelectionStream, s}), ticker);
  });

  const fs::path dir = out / "selection";
  for (const auto& sel : result) {
    auto kept = open_out(dir / (sel.sector + ".csv"));
    kept << "rank,feature,importance\n";
    for (std::size_t i = 0; i < sel.kept.size(); ++i)
      kept << csv::join({std::to_string(i + 1), sel.kept[i],
                         csv::format(sel.kept_importances(static_cast<Eigen::Index>(i)))})
           << '\n';
    auto elim = open_out(dir / (sel.sector + "_elimination.csv"));
    elim << "round,feature\n";
    for (const auto& e : sel.eliminated) elim << csv::join({std::to_string(e.round), e.name}) << '\n';
    auto bars = open_out(dir / (sel.sector + "_importance.csv"));
    bars << "feature,score\n";
    for (std::size_t i = 0; i < sel.candidates.size(); ++i)
      bars << csv::join({sel.candidates[i], csv::format(sel.initial_importances(static_cast<Eigen::Index>(i)))})
           << '\n';
    log << sel.sector << ": kept";
    for (const auto& k : sel.kept) log << ' ' << k;
    log << " (" << sel.eliminated.size() << " eliminated)\n";
  }
  write_selections_csv(selections_path(out), result);
  return result;
}

// ---------------------------------------------------------------- backtest

void write_results_csv(std::ostream& f, const GridResult& grid) {
  f << "horizon,span,model,lookback,start,end,periods,annualized_return,sharpe,annualized_sharpe,calmar,"
       "max_drawdown,total_return,status,reason\n";
  std::set<std::size_t> horizons;
  for (const auto& c : grid.cells) horizons.insert(c.spec.horizon);
  const auto spans = span_names();
  auto metric_fields = [&](const SpanResult& s) {
    const auto& m = s.metrics;
    return std::vector<std::string>{format_month(s.path.periods.front().start),
                                    format_month(s.path.periods.back().end),
                                    std::to_string(m.periods),
                                    csv::format(m.annualized_return),
                                    opt_text(m.sharpe),
                                    opt_text(m.annualized_sharpe),
                                    opt_text(m.calmar),
                                    csv::format(m.max_drawdown),
                                    csv::format(m.total_return)};
  };
  for (std::size_t h : horizons) {
    for (std::size_t s = 0; s < spans.size(); ++s) {
      for (const auto& c : grid.cells) {
        if (c.spec.horizon != h) continue;
        std::vector<std::string> row{std::to_string(h), spans[s], std::string(to_string(c.spec.model)),
                                     std::to_string(c.spec.lookback)};
        if (c.ok) {
          for (auto& v : metric_fields(span_of(c, s))) row.push_back(std::move(v));
          row.push_back("ok");
          row.push_back("");
        } else {
          row.insert(row.end(), 9, "");
          row.push_back("failed");
          row.push_back(c.reason);
        }
        f << csv::join(row) << '\n';
      }
      for (const auto& b : grid.benchmarks) {
        if (b.horizon != h) continue;
        std::vector<std::string> row{std::to_string(h), spans[s], "benchmark", ""};
        for (auto& v : metric_fields(span_of(b, s))) row.push_back(std::move(v));
        row.push_back("ok");
        row.push_back("");
        f << csv::join(row) << '\n';
      }
    }
  }
}

namespace {

void write_path_csv(const fs::path& path, const CellResult* cell, const BenchmarkResult& bench) {
  auto f = open_out(path);
  f << "span,period,start,end,holdings,strategy_return,strategy_wealth,benchmark_return,benchmark_wealth\n";
  const auto spans = span_names();
  for (std::size_t s = 0; s < spans.size(); ++s) {
    const PortfolioPath& b = span_of(bench, s).path;
    const PortfolioPath* p = cell ? &span_of(*cell, s).path : nullptr;
    for (std::size_t k = 0; k < b.periods.size(); ++k) {
      const auto& bp = b.periods[k];
      std::string holdings;
      const auto& hs = p ? p->periods[k].holdings : bp.holdings;
      for (const auto& t : hs) holdings += (holdings.empty() ? "" : " ") + t;
      f << csv::join({spans[s], std::to_string(k + 1), format_month(bp.start), format_month(bp.end), holdings,
                      p ? csv::format(p->periods[k].realized_return) : "",
                      p ? csv::format(p->wealth[k + 1]) : "", csv::format(bp.realized_return),
                      csv::format(b.wealth[k + 1])})
        << '\n';
    }
  }
}

struct SeriesMetric {
  const char* name;
  const char* label;
  std::optional<double> (*get)(const MetricsReport&);
};

const SeriesMetric kSeriesMetrics[] = {
    {"annualized_return", "annualized return (%)", [](const MetricsReport& m) -> std::optional<double> {
       return m.annualized_return;
     }},
    {"annualized_sharpe", "annualized Sharpe", [](const MetricsReport& m) { return m.annualized_sharpe; }},
    {"calmar", "Calmar", [](const MetricsReport& m) { return m.calmar; }},
    {"max_drawdown", "max drawdown", [](const MetricsReport& m) -> std::optional<double> { return m.max_drawdown; }},
};

void write_metric_series(const fs::path& dir, const GridResult& grid, const std::vector<ModelKind>& models,
                         bool plots) {
  std::map<std::size_t, std::set<std::size_t>> lookbacks;
  for (const auto& c : grid.cells) lookbacks[c.spec.horizon].insert(c.spec.lookback);
  const auto spans = span_names();
  for (const auto& [h, Ls] : lookbacks) {
    for (std::size_t s = 0; s < spans.size(); ++s) {
      for (const auto& metric : kSeriesMetrics) {
        const std::string stem = "h" + std::to_string(h) + "_" + spans[s] + "_" + metric.name;
        auto f = open_out(dir / "series" / (stem + ".csv"));
        f << "lookback";
        for (auto m : models) f << ',' << to_string(m);
        f << '\n';
        svg::LineChart chart{metric.label + std::string(" by lookback, h=") + std::to_string(h) + ", " + spans[s],
                             "lookback (months)", metric.label, {}, {}, {}};
        for (auto m : models) chart.series.push_back({std::string(to_string(m)), {}});
        for (std::size_t L : Ls) {
          f << L;
          chart.x.push_back(static_cast<double>(L));
          for (std::size_t k = 0; k < models.size(); ++k) {
            const CellResult* cell = nullptr;
            for (const auto& c : grid.cells)
              if (c.spec.horizon == h && c.spec.lookback == L && c.spec.model == models[k]) cell = &c;
            std::string text;
            double y = std::numeric_limits<double>::quiet_NaN();
            if (cell && cell->ok) {
              const auto v = metric.get(span_of(*cell, s).metrics);
              text = format_metric(v);
              if (v) y = *v;
            }
            f << ',' << text;
            chart.series[k].y.push_back(y);
          }
          f << '\n';
        }
        if (plots) write_text(dir / "plots" / (stem + ".svg"), svg::render(chart));
      }
    }
  }
}

void plot_wealth(const fs::path& path, const std::string& title, const PortfolioPath* strategy,
                 const PortfolioPath& bench) {
  svg::LineChart chart{title, "period end", "wealth", {}, {}, {}};
  chart.x.push_back(0);
  chart.x_ticks.push_back(format_month(bench.periods.front().start));
  for (std::size_t k = 0; k < bench.periods.size(); ++k) {
    chart.x.push_back(static_cast<double>(k + 1));
    chart.x_ticks.push_back(format_month(bench.periods[k].end));
  }
  if (strategy) chart.series.push_back({"top-4 strategy", strategy->wealth});
  chart.series.push_back({"equal-weight benchmark", bench.wealth});
  write_text(path, svg::render(chart));
}

}  // namespace

BacktestOutcome cmd_backtest(const ExperimentConfig& config, const fs::path& out, std::size_t jobs, bool plots,
                             std::ostream& log) {
  const fs::path pp = panel_path(out);
  if (!fs::exists(pp)) throw DataError("missing panel artifact " + pp.string() + " (run `ingest` first)");
  const MonthlyPanel panel = read_panel_csv(pp);
  const SelectionMap selections = read_selections_csv(selections_path(out));
  for (const auto& t : panel.tickers())
    if (!selections.count(t)) throw DataError("selections have no entry for " + t);

  BacktestOutcome r;
  r.split_row = config.split.row(panel);
  const auto cells = config.grid.cells();
  GridOptions opt;
  opt.settings = config.backtest;
  opt.models = config.models;
  opt.seed = config.seed;
  opt.jobs = jobs;
  log << "backtest: " << cells.size() << " cells, split at " << format_month(panel.month(r.split_row)) << ", "
      << jobs << " job(s)\n";
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_timestamp();
  r.grid = run_grid(panel, selections, cells, r.split_row, opt);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path dir = out / "backtest";
  {
    auto f = open_out(results_path(out));
    write_results_csv(f, r.grid);
  }

  std::map<std::size_t, const BenchmarkResult*> bench;
  for (const auto& b : r.grid.benchmarks) bench[b.horizon] = &b;
  for (const auto& [h, b] : bench) {
    const std::string name = "benchmark_h" + std::to_string(h);
    write_path_csv(dir / "paths" / (name + ".csv"), nullptr, *b);
    if (plots)
      for (std::size_t s = 0; s < 2; ++s)
        plot_wealth(dir / "plots" / (name + "_" + span_names()[s] + ".svg"), name + " " + span_names()[s], nullptr,
                    span_of(*b, s).path);
  }
  for (const auto& c : r.grid.cells) {
    if (!c.ok) {
      ++r.failed;
      log << "  " << cell_name(c.spec) << ": FAILED: " << c.reason << '\n';
      continue;
    }
    const BenchmarkResult& b = *bench.at(c.spec.horizon);
    write_path_csv(dir / "paths" / (cell_name(c.spec) + ".csv"), &c, b);
    if (plots)
      for (std::size_t s = 0; s < 2; ++s)
        plot_wealth(dir / "plots" / (cell_name(c.spec) + "_" + span_names()[s] + ".svg"),
                    cell_name(c.spec) + " " + span_names()[s], &span_of(c, s).path, span_of(b, s).path);
  }
  write_metric_series(dir, r.grid, config.grid.models, plots);

  nlohmann::ordered_json m;
  m["seed"] = config.seed;
  m["config"] = config.source.string();
  m["config_hash"] = config.source.empty() ? "" : file_hash(config.source);
  m["manifest_hash"] = file_hash(config.manifest);
  m["panel_rows"] = panel.rows();
  m["first_month"] = format_month(panel.first_month());
  m["last_month"] = format_month(panel.last_month());
  m["split_month"] = format_month(panel.month(r.split_row));
  m["jobs"] = jobs;
  m["started_utc"] = started;
  m["total_wall_seconds"] = total;
  auto& arr = m["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : r.grid.cells)
    arr.push_back({{"cell", cell_name(c.spec)},
                   {"seed", c.seed},
                   {"status", c.ok ? "ok" : "failed"},
                   {"wall_seconds", c.wall_seconds}});
  write_text(dir / "run_manifest.json", m.dump(2) + "\n");

  log << "completed " << cells.size() - r.failed << " of " << cells.size() << " cells in " << total << " s; wrote "
      << results_path(out).string() << '\n';
  return r;
}

// ---------------------------------------------------------------- report

std::vector<std::array<std::size_t, 3>> metric_ranks(const std::vector<ScoredCell>& cells) {
  auto value = [](const ScoredCell& c, int k) -> std::optional<double> {
    if (k == 0) return c.annualized_return;
    return k == 1 ? c.sharpe : c.calmar;
  };
  // a is strictly better than b; undefined is worse than anything defined
  auto better = [](const std::optional<double>& a, const std::optional<double>& b) {
    if (!a) return false;
    if (!b) return true;
    return *a > *b;
  };
  std::vector<std::array<std::size_t, 3>> ranks(cells.size());
  for (int k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < cells.size(); ++i) {
      std::size_t r = 1;
      for (std::size_t j = 0; j < cells.size(); ++j)
        if (better(value(cells[j], k), value(cells[i], k))) ++r;
      ranks[i][static_cast<std::size_t>(k)] = r;
    }
  return ranks;
}

std::size_t balanced_pick(const std::vector<ScoredCell>& cells, std::string_view rule) {
  if (cells.empty()) throw std::invalid_argument("balanced_pick: no cells");
  if (rule != "max_rank" && rule != "mean_rank") throw std::invalid_argument("unknown pick rule");
  const auto ranks = metric_ranks(cells);
  auto key = [&](std::size_t i) {
    const auto& r = ranks[i];
    return rule == "max_rank" ? std::max({r[0], r[1], r[2]}) : r[0] + r[1] + r[2];
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (key(i) < key(best) || (key(i) == key(best) && cells[i].annualized_return > cells[best].annualized_return))
      best = i;
  }
  return best;
}

void cmd_report(const fs::path& out, std::string_view rule, std::ostream& log) {
  const fs::path rp = results_path(out);
  if (!fs::exists(rp)) throw DataError("missing results " + rp.string() + " (run `backtest` first)");
  const csv::Table t = csv::read(rp);
  const auto ch = t.column("horizon"), cs = t.column("span"), cm = t.column("model"), cl = t.column("lookback"),
             ca = t.column("annualized_return"), csh = t.column("annualized_sharpe"), cc = t.column("calmar"),
             cst = t.column("status");

  auto metric = [](const std::string& s) -> Metric {
    if (s == "undefined") return std::nullopt;
    auto v = csv::parse_double(s);
    if (!v) throw DataError("results: bad metric '" + s + "'");
    return v;
  };

  struct Group {
    std::vector<ScoredCell> cells;
    std::optional<ScoredCell> benchmark;
    std::size_t failed = 0;
  };
  std::map<std::pair<long long, std::string>, Group> groups;
  std::vector<std::pair<long long, std::string>> order;
  for (const auto& row : t.rows) {
    const auto h = csv::parse_int(row[ch]);
    if (!h) throw DataError("results: bad horizon '" + row[ch] + "'");
    const auto key = std::make_pair(*h, row[cs]);
    if (!groups.count(key)) order.push_back(key);
    Group& g = groups[key];
    if (row[cst] != "ok") {
      ++g.failed;
      continue;
    }
    ScoredCell c;
    c.model = row[cm];
    c.lookback = row[cl].empty() ? 0 : static_cast<std::size_t>(csv::parse_int(row[cl]).value_or(0));
    const auto ar = metric(row[ca]);
    if (!ar) throw DataError("results: annualized return cannot be undefined");
    c.annualized_return = *ar;
    c.sharpe = metric(row[csh]);
    c.calmar = metric(row[cc]);
    if (c.model == "benchmark")
      g.benchmark = c;
    else
      g.cells.push_back(c);
  }
  if (order.empty()) throw DataError("results " + rp.string() + " has no rows");

  const fs::path dir = out / "report";
  auto csvf = open_out(dir / "summary.csv");
  auto md = open_out(dir / "summary.md");
  csvf << "horizon,span,criterion,model,lookback,annualized_return,annualized_sharpe,calmar,worst_rank\n";
  md << "# Backtest summary\n\nBalanced pick rule: `" << rule << "`.\n";
  const char* criteria[] = {"best_annualized_return", "best_sharpe", "best_calmar"};
  for (const auto& key : order) {
    const Group& g = groups.at(key);
    md << "\n## h = " << key.first << ", " << key.second << "\n\n";
    md << "| criterion | model | lookback | annualized return (%) | Sharpe | Calmar |\n|---|---|---|---|---|---|\n";
    auto emit = [&](const std::string& crit, const ScoredCell& c, const std::string& worst) {
      const std::string L = c.model == "benchmark" ? "" : std::to_string(c.lookback);
      csvf << csv::join({std::to_string(key.first), key.second, crit, c.model, L, csv::format(c.annualized_return),
                         format_metric(c.sharpe), format_metric(c.calmar), worst})
           << '\n';
      char ar[32];
      std::snprintf(ar, sizeof ar, "%.2f", c.annualized_return);
      auto fmt3 = [](const Metric& m) {
        if (!m) return std::string("undefined");
        char b[32];
        std::snprintf(b, sizeof b, "%.3f", *m);
        return std::string(b);
      };
      md << "| " << crit << " | " << c.model << " | " << L << " | " << ar << " | " << fmt3(c.sharpe) << " | "
         << fmt3(c.calmar) << " |\n";
    };
    if (!g.cells.empty()) {
      const auto ranks = metric_ranks(g.cells);
      for (std::size_t k = 0; k < 3; ++k) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < g.cells.size(); ++i)
          if (ranks[i][k] < ranks[best][k]) best = i;
        emit(criteria[k], g.cells[best], std::to_string(std::max({ranks[best][0], ranks[best][1], ranks[best][2]})));
      }
      const std::size_t pick = balanced_pick(g.cells, rule);
      emit("balanced_pick", g.cells[pick], std::to_string(std::max({ranks[pick][0], ranks[pick][1], ranks[pick][2]})));
      log << "h=" << key.first << " " << key.second << ": balanced pick " << g.cells[pick].model << " L="
          << g.cells[pick].lookback << '\n';
    }
    if (g.benchmark) emit("benchmark", *g.benchmark, "");
    if (g.failed) md << "\n" << g.failed << " failed cell(s) omitted.\n";
  }
  log << "wrote " << (dir / "summary.csv").string() << " and " << (dir / "summary.md").string() << '\n';
}

}  // namespace sector_rank
