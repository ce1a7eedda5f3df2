#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sector_rank/backtest.hpp"
#include "sector_rank/config.hpp"
#include "sector_rank/rfe.hpp"

namespace sector_rank {

/// --out, then the config's "output", then $SECTOR_RANK_OUT. Throws
/// ConfigError when none is set.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config,
                                         const std::optional<std::filesystem::path>& out_flag);

// Artifact locations inside the output directory.
std::filesystem::path panel_path(const std::filesystem::path& out);
std::filesystem::path selections_path(const std::filesystem::path& out);
std::filesystem::path results_path(const std::filesystem::path& out);

struct IngestOutcome {
  PanelAssembly assembly;
  std::filesystem::path panel_file;
  std::filesystem::path report_file;
};

/// Loads every series of the manifest, aligns them and writes panel.csv plus
/// ingest_report.csv (per-series coverage, resampling counts, dropped rows).
IngestOutcome cmd_ingest(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);

/// RFE per sector over its manifest candidates, on the ingested panel. Writes
/// selection/<TICKER>.csv (kept features), selection/<TICKER>_elimination.csv,
/// selection/<TICKER>_importance.csv (first-round scores of every candidate)
/// and selection/selections.csv (all sectors, read back by the backtest).
std::vector<FeatureSelection> cmd_select(const ExperimentConfig& config, const std::filesystem::path& out,
                                         std::size_t jobs, std::ostream& log);

void write_selections_csv(const std::filesystem::path& path, const std::vector<FeatureSelection>& selections);
SelectionMap read_selections_csv(const std::filesystem::path& path);

struct BacktestOutcome {
  GridResult grid;
  std::size_t split_row = 0;
  std::size_t failed = 0;
};

/// Runs the configured grid and writes backtest/results.csv, per-cell path
/// CSVs, metric-by-lookback series, run_manifest.json and, when `plots` is
/// set, SVG line charts.
BacktestOutcome cmd_backtest(const ExperimentConfig& config, const std::filesystem::path& out, std::size_t jobs,
                             bool plots, std::ostream& log);

/// Writes the results table; byte-identical for identical grid results.
void write_results_csv(std::ostream& out, const GridResult& grid);

/// One strategy cell's metrics as read back from results.csv.
struct ScoredCell {
  std::string model;
  std::size_t lookback = 0;
  double annualized_return = 0.0;
  Metric sharpe;  // annualized
  Metric calmar;
};

/// Competition ranks (1 = best, ties share the better rank, undefined ranks
/// last) of each cell under annualized return, Sharpe and Calmar.
std::vector<std::array<std::size_t, 3>> metric_ranks(const std::vector<ScoredCell>& cells);

/// Index of the balanced pick. "max_rank": best worst-case rank across the
/// three metrics; "mean_rank": best mean rank. Ties go to the higher
/// annualized return, then to the earlier cell.
std::size_t balanced_pick(const std::vector<ScoredCell>& cells, std::string_view rule = "max_rank");

/// Reads backtest/results.csv under `out` and writes report/summary.csv and
/// report/summary.md: per horizon and span, the best cell under each metric and
/// the balanced pick.
void cmd_report(const std::filesystem::path& out, std::string_view rule, std::ostream& log);

}  // namespace sector_rank
