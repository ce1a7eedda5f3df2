// sector_rank: ingest -> select -> backtest -> report.
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "sector_rank/commands.hpp"

namespace fs = std::filesystem;
using namespace sector_rank;

namespace {

constexpr int kExitData = 2;        // bad config, manifest or input files
constexpr int kExitAllFailed = 3;   // every grid cell failed

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 0;
  std::string split;
  bool plots = false;
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig c = load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (!o.split.empty()) c.split = parse_split(o.split);
  return c;
}

std::size_t jobs_of(const Options& o) {
  if (o.jobs > 0) return o.jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sector ranking by macro-driven price forecasts: ingest, select, backtest, report"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "experiment config (JSON)");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (default: config \"output\", then $SECTOR_RANK_OUT)");
  };
  auto* ingest = app.add_subcommand("ingest", "align the manifest's series into a monthly panel");
  auto* select = app.add_subcommand("select", "recursive feature elimination per sector");
  auto* backtest = app.add_subcommand("backtest", "run the lookback x horizon x model grid");
  auto* report = app.add_subcommand("report", "summarise backtest results");
  common(ingest, true);
  common(select, true);
  common(backtest, true);
  common(report, false);
  for (auto* sub : {ingest, select, backtest}) sub->add_option("--seed", o.seed, "override the config seed");
  for (auto* sub : {select, backtest}) sub->add_option("--jobs", o.jobs, "parallel workers (default: all cores)");
  backtest->add_option("--split", o.split, "train/test split: YYYY-MM or a fraction of the panel");
  backtest->add_flag("--plots", o.plots, "also render SVG line charts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed()) {
      std::string rule = "max_rank";
      fs::path out;
      if (!o.config.empty()) {
        const ExperimentConfig c = load(o);
        rule = c.pick_rule;
        out = resolve_output_dir(c, o.out.empty() ? std::nullopt : std::optional<fs::path>(o.out));
      } else if (!o.out.empty()) {
        out = o.out;
      } else if (const char* env = std::getenv("SECTOR_RANK_OUT"); env && *env) {
        out = env;
      } else {
        throw ConfigError("report: pass --out or --config, or set SECTOR_RANK_OUT");
      }
      cmd_report(out, rule, std::cout);
      return 0;
    }
    const ExperimentConfig c = load(o);
    const fs::path out = resolve_output_dir(c, o.out.empty() ? std::nullopt : std::optional<fs::path>(o.out));
    if (ingest->parsed()) {
      cmd_ingest(c, out, std::cout);
    } else if (select->parsed()) {
      cmd_select(c, out, jobs_of(o), std::cout);
    } else {
      const auto r = cmd_backtest(c, out, jobs_of(o), o.plots, std::cout);
      if (r.failed == r.grid.cells.size()) {
        std::cerr << "error: every grid cell failed\n";
        return kExitAllFailed;
      }
    }
    return 0;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
