#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sector_rank/backtest.hpp"
#include "sector_rank/marketdata.hpp"
#include "sector_rank/predictors.hpp"
#include "sector_rank/rfe.hpp"

namespace sector_rank {

/// Raised for invalid configuration or manifest contents.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SeriesEntry {
  std::string name;
  std::filesystem::path path;  // resolved against the manifest's directory
  Frequency frequency = Frequency::monthly;
  /// Tickers whose models may use this series; "*" means every sector.
  std::vector<std::string> sectors;
};

struct DataManifest {
  std::filesystem::path source;
  std::vector<SeriesEntry> prices;  // name == ticker
  std::vector<SeriesEntry> macro;

  /// Candidate feature names for a ticker, in manifest order.
  std::vector<std::string> candidates_for(std::string_view ticker) const;
};

DataManifest load_manifest(const std::filesystem::path& path);

struct HorizonGrid {
  std::size_t horizon = 1;
  std::vector<std::size_t> lookbacks;
};

/// h = 1: L in {6..36 step 6}; h in {3, 6, 12}: L in {12, 24, 36, 48};
/// h = 24: L in {12, ..., 60}.
std::vector<HorizonGrid> default_horizons();

struct GridConfig {
  std::vector<ModelKind> models{ModelKind::ridge, ModelKind::lstm, ModelKind::gru, ModelKind::esn};
  std::vector<HorizonGrid> horizons = default_horizons();

  /// Cells ordered by horizon, then lookback, then model.
  std::vector<CellSpec> cells() const;
};

/// Split month given either as "YYYY-MM" or as a fraction of the panel's rows.
struct SplitSpec {
  std::optional<Month> month;
  double fraction = 0.8;

  std::size_t row(const MonthlyPanel& panel) const;
};

SplitSpec parse_split(std::string_view text);

struct ExperimentConfig {
  std::filesystem::path source;  // the config file, when loaded from disk
  std::filesystem::path manifest;
  std::optional<std::vector<Sector>> universe;
  std::uint64_t seed = 0;
  SplitSpec split;
  std::optional<std::filesystem::path> output;
  RfeParams selection;
  GridConfig grid;
  ModelConfig models;
  BacktestSettings backtest;
  std::string pick_rule = "max_rank";

  SectorUniverse sector_universe() const;
};

/// Parses a JSON config. Relative paths resolve against the config's directory.
/// A seed is mandatory and the manifest must exist.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir);

/// FNV-1a of the config file bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

}  // namespace sector_rank
