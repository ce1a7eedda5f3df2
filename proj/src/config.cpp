#include "sector_rank/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sector_rank {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(std::string("cannot read ") + what + " " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(std::string_view text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

void only_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ConfigError(where + ": unknown key '" + k + "'");
}

template <typename T>
void read_opt(const json& obj, const char* key, T& dst, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  try {
    dst = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

void read_recurrent(const json& j, RecurrentConfig& r, const std::string& where) {
  only_keys(j,
            {"hidden", "relu_between_layers", "epochs", "patience", "min_delta", "learning_rate", "decay", "beta1",
             "beta2", "epsilon", "weight_decay"},
            where);
  if (j.contains("hidden")) {
    std::vector<long long> h;
    read_opt(j, "hidden", h, where);
    if (h.empty() || std::any_of(h.begin(), h.end(), [](long long v) { return v < 1; }))
      throw ConfigError(where + ".hidden must list positive layer sizes");
    r.hidden_sizes.assign(h.begin(), h.end());
  }
  read_opt(j, "relu_between_layers", r.relu_between_layers, where);
  read_opt(j, "epochs", r.train.epochs, where);
  read_opt(j, "patience", r.train.patience, where);
  read_opt(j, "min_delta", r.train.min_delta, where);
  read_opt(j, "learning_rate", r.train.adam.learning_rate, where);
  read_opt(j, "decay", r.train.adam.decay, where);
  read_opt(j, "beta1", r.train.adam.beta1, where);
  read_opt(j, "beta2", r.train.adam.beta2, where);
  read_opt(j, "epsilon", r.train.adam.epsilon, where);
  read_opt(j, "weight_decay", r.train.adam.weight_decay, where);
  if (!(r.train.adam.learning_rate > 0.0)) throw ConfigError(where + ".learning_rate must be positive");
  if (r.train.epochs < 1) throw ConfigError(where + ".epochs must be at least 1");
}

std::vector<SeriesEntry> read_entries(const json& arr, bool prices, const fs::path& base) {
  const std::string where = prices ? "manifest.prices" : "manifest.series";
  if (!arr.is_array()) throw ConfigError(where + " must be an array");
  std::vector<SeriesEntry> out;
  for (const auto& e : arr) {
    if (prices)
      only_keys(e, {"ticker", "path", "frequency"}, where);
    else
      only_keys(e, {"name", "path", "frequency", "sectors", "source", "description"}, where);
    SeriesEntry s;
    std::string path, freq = prices ? "daily" : "monthly";
    read_opt(e, prices ? "ticker" : "name", s.name, where);
    read_opt(e, "path", path, where);
    read_opt(e, "frequency", freq, where);
    if (s.name.empty() || path.empty()) throw ConfigError(where + ": every entry needs a name and a path");
    try {
      s.frequency = parse_frequency(freq);
    } catch (const std::exception& ex) {
      throw ConfigError(where + " '" + s.name + "': " + ex.what());
    }
    s.path = resolve(base, path);
    if (!fs::exists(s.path)) throw DataError("series '" + s.name + "': missing file " + s.path.string());
    if (prices)
      s.sectors = {s.name};
    else {
      read_opt(e, "sectors", s.sectors, where);
      if (s.sectors.empty()) s.sectors = {"*"};
    }
    out.push_back(std::move(s));
  }
  std::set<std::string> names;
  for (const auto& s : out)
    if (!names.insert(s.name).second) throw ConfigError(where + ": duplicate name '" + s.name + "'");
  return out;
}

}  // namespace

std::vector<std::string> DataManifest::candidates_for(std::string_view ticker) const {
  std::vector<std::string> out;
  for (const auto& s : macro)
    if (std::any_of(s.sectors.begin(), s.sectors.end(), [&](const std::string& t) { return t == "*" || t == ticker; }))
      out.push_back(s.name);
  return out;
}

DataManifest load_manifest(const fs::path& path) {
  const json j = parse_json(read_text(path, "manifest"), path.string());
  only_keys(j, {"description", "prices", "series"}, "manifest");
  if (!j.contains("prices") || !j.contains("series")) throw ConfigError("manifest needs 'prices' and 'series'");
  DataManifest m;
  m.source = path;
  const fs::path base = path.parent_path();
  m.prices = read_entries(j.at("prices"), true, base);
  m.macro = read_entries(j.at("series"), false, base);
  return m;
}

std::vector<HorizonGrid> default_horizons() {
  return {{1, {6, 12, 18, 24, 30, 36}},
          {3, {12, 24, 36, 48}},
          {6, {12, 24, 36, 48}},
          {12, {12, 24, 36, 48}},
          {24, {12, 24, 36, 48, 60}}};
}

std::vector<CellSpec> GridConfig::cells() const {
  std::vector<CellSpec> out;
  for (const auto& h : horizons)
    for (auto L : h.lookbacks)
      for (auto m : models) out.push_back({m, L, h.horizon});
  return out;
}

std::size_t SplitSpec::row(const MonthlyPanel& panel) const {
  if (month) {
    const auto r = panel.row_of(*month);
    if (!r) throw ConfigError("split month " + format_month(*month) + " is outside the panel");
    return *r;
  }
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must lie in (0, 1)");
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(panel.rows() - 1)));
}

SplitSpec parse_split(std::string_view text) {
  SplitSpec s;
  if (text.find('-') != std::string_view::npos) {
    try {
      s.month = parse_month(text);
    } catch (const std::exception& e) {
      throw ConfigError("bad split '" + std::string(text) + "': " + e.what());
    }
    return s;
  }
  const std::string t(text);
  char* end = nullptr;
  s.fraction = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0' || !(s.fraction > 0.0 && s.fraction < 1.0))
    throw ConfigError("bad split '" + t + "': expected YYYY-MM or a fraction in (0, 1)");
  return s;
}

SectorUniverse ExperimentConfig::sector_universe() const {
  return universe ? SectorUniverse(*universe) : SectorUniverse::standard();
}

ExperimentConfig parse_config(std::string_view text, const fs::path& base) {
  const json j = parse_json(text, "config");
  only_keys(j,
            {"description", "manifest", "seed", "split", "output", "universe", "selection", "grid", "models",
             "backtest", "report"},
            "config");
  ExperimentConfig c;

  std::string manifest;
  read_opt(j, "manifest", manifest, "config");
  if (manifest.empty()) throw ConfigError("config: 'manifest' is required");
  c.manifest = resolve(base, manifest);
  if (!fs::exists(c.manifest)) throw DataError("config: missing manifest file " + c.manifest.string());

  if (!j.contains("seed") || !j.at("seed").is_number_integer())
    throw ConfigError("config: an integer 'seed' is required (unseeded runs are not allowed)");
  c.seed = j.at("seed").get<std::uint64_t>();

  if (j.contains("split")) {
    const auto& s = j.at("split");
    if (s.is_string())
      c.split = parse_split(s.get<std::string>());
    else if (s.is_number())
      c.split = parse_split(std::to_string(s.get<double>()));
    else
      throw ConfigError("config.split must be \"YYYY-MM\" or a fraction");
  }
  if (j.contains("output") && !j.at("output").is_null()) c.output = resolve(base, j.at("output").get<std::string>());

  if (j.contains("universe")) {
    std::vector<Sector> u;
    for (const auto& e : j.at("universe")) {
      only_keys(e, {"name", "ticker"}, "config.universe");
      u.push_back({e.value("name", ""), e.value("ticker", "")});
    }
    SectorUniverse check(u);  // validates uniqueness
    c.universe = std::move(u);
  }

  if (j.contains("selection")) {
    const auto& s = j.at("selection");
    only_keys(s, {"target_count", "step", "forest"}, "config.selection");
    read_opt(s, "target_count", c.selection.target_count, "config.selection");
    read_opt(s, "step", c.selection.step, "config.selection");
    if (s.contains("forest")) {
      const auto& f = s.at("forest");
      const std::string w = "config.selection.forest";
      only_keys(f, {"tree_count", "max_depth", "min_samples_split", "features_per_split", "bootstrap"}, w);
      read_opt(f, "tree_count", c.selection.forest.tree_count, w);
      if (f.contains("max_depth") && !f.at("max_depth").is_null())
        c.selection.forest.max_depth = f.at("max_depth").get<std::size_t>();
      read_opt(f, "min_samples_split", c.selection.forest.min_samples_split, w);
      read_opt(f, "features_per_split", c.selection.forest.features_per_split, w);
      read_opt(f, "bootstrap", c.selection.forest.bootstrap, w);
    }
    if (c.selection.target_count < 1 || c.selection.step < 1)
      throw ConfigError("config.selection: target_count and step must be at least 1");
  }

  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    only_keys(g, {"models", "horizons"}, "config.grid");
    if (g.contains("models")) {
      c.grid.models.clear();
      for (const auto& m : g.at("models")) {
        try {
          c.grid.models.push_back(parse_model_kind(m.get<std::string>()));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(std::string("config.grid.models: ") + e.what());
        }
      }
    }
    if (g.contains("horizons")) {
      c.grid.horizons.clear();
      for (const auto& h : g.at("horizons")) {
        only_keys(h, {"horizon", "lookbacks"}, "config.grid.horizons");
        HorizonGrid hg;
        read_opt(h, "horizon", hg.horizon, "config.grid.horizons");
        read_opt(h, "lookbacks", hg.lookbacks, "config.grid.horizons");
        if (hg.horizon < 1 || hg.lookbacks.empty() ||
            std::any_of(hg.lookbacks.begin(), hg.lookbacks.end(), [](std::size_t L) { return L < 1; }))
          throw ConfigError("config.grid.horizons: horizon and lookbacks must be positive and non-empty");
        c.grid.horizons.push_back(std::move(hg));
      }
    }
    if (c.grid.cells().empty()) throw ConfigError("config.grid is empty");
  }

  if (j.contains("models")) {
    const auto& m = j.at("models");
    only_keys(m, {"ridge", "lstm", "gru", "esn"}, "config.models");
    if (m.contains("ridge")) {
      only_keys(m.at("ridge"), {"lambda"}, "config.models.ridge");
      read_opt(m.at("ridge"), "lambda", c.models.ridge_lambda, "config.models.ridge");
    }
    if (m.contains("lstm")) read_recurrent(m.at("lstm"), c.models.lstm, "config.models.lstm");
    if (m.contains("gru")) read_recurrent(m.at("gru"), c.models.gru, "config.models.gru");
    if (m.contains("esn")) {
      const auto& e = m.at("esn");
      const std::string w = "config.models.esn";
      only_keys(e,
                {"reservoir_size", "leaking_rate", "spectral_radius", "density", "input_scaling", "readout_lambda",
                 "washout"},
                w);
      read_opt(e, "reservoir_size", c.models.esn.reservoir_size, w);
      read_opt(e, "leaking_rate", c.models.esn.leaking_rate, w);
      read_opt(e, "spectral_radius", c.models.esn.spectral_radius, w);
      read_opt(e, "density", c.models.esn.density, w);
      read_opt(e, "input_scaling", c.models.esn.input_scaling, w);
      read_opt(e, "readout_lambda", c.models.esn.readout_lambda, w);
      read_opt(e, "washout", c.models.esn.washout, w);
    }
  }

  if (j.contains("backtest")) {
    const auto& b = j.at("backtest");
    const std::string w = "config.backtest";
    only_keys(b, {"top_k", "min_blocks", "periods_per_year", "risk_free"}, w);
    read_opt(b, "top_k", c.backtest.top_k, w);
    read_opt(b, "min_blocks", c.backtest.min_blocks, w);
    if (b.contains("periods_per_year") && !b.at("periods_per_year").is_null())
      c.backtest.periods_per_year = b.at("periods_per_year").get<double>();
    read_opt(b, "risk_free", c.backtest.risk_free, w);
    if (c.backtest.top_k < 1) throw ConfigError("config.backtest.top_k must be at least 1");
  }

  if (j.contains("report")) {
    only_keys(j.at("report"), {"pick_rule"}, "config.report");
    read_opt(j.at("report"), "pick_rule", c.pick_rule, "config.report");
    if (c.pick_rule != "max_rank" && c.pick_rule != "mean_rank")
      throw ConfigError("config.report.pick_rule must be 'max_rank' or 'mean_rank'");
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  ExperimentConfig c = parse_config(read_text(path, "config"), path.parent_path());
  c.source = path;
  return c;
}

std::string file_hash(const fs::path& path) {
  const std::string bytes = read_text(path, "file");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sector_rank
