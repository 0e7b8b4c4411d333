#include "phenosample/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json_io.hpp"
#include "phenosample/error.hpp"

namespace phenosample {
namespace {

using detail::json;

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Walks one JSON object, handing out typed values and rejecting leftovers.
class Section {
 public:
  Section(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(label("") + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    known_.push_back(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(label(key) + ": " + e.what());
    }
  }

  std::optional<json> raw(const char* key) {
    known_.push_back(key);
    if (!j_.contains(key)) return std::nullopt;
    return j_.at(key);
  }

  std::optional<Section> sub(const char* key) {
    known_.push_back(key);
    if (!j_.contains(key)) return std::nullopt;
    return Section(j_.at(key), label(key));
  }

  std::string label(std::string_view key) const {
    if (prefix_.empty()) return std::string(key);
    return key.empty() ? prefix_ : prefix_ + "." + std::string(key);
  }

  void reject_unknown() const {
    for (const auto& [key, value] : j_.items()) {
      if (std::find(known_.begin(), known_.end(), key) != known_.end()) continue;
      std::string msg = "unknown config key '" + label(key) + "'";
      if (const auto s = suggest_key(key, known_)) msg += "; did you mean '" + *s + "'?";
      throw ConfigError(msg);
    }
  }

 private:
  const json& j_;
  std::string prefix_;
  std::vector<std::string> known_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void require_exists(const std::filesystem::path& p, const std::string& field) {
  if (!std::filesystem::exists(p)) throw ConfigError(field + ": path does not exist: " + p.string());
}

}  // namespace

std::optional<std::string> suggest_key(std::string_view key, const std::vector<std::string>& candidates) {
  std::optional<std::string> best;
  std::size_t best_d = 4;
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(key, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

void PipelineConfig::validate() const {
  grid.validate();
  pheno.validate();
  selection.validate();
  weights.validate();
  knn.validate();
  probe.validate();
  if (year_length != 365 && year_length != 366) throw ConfigError("phenology.year_length must be 365 or 366");
  if (workers == 0) throw ConfigError("selection.workers must be positive");
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0)) {
    throw ConfigError("selection.max_failure_fraction must be in [0, 1]");
  }
  if (folds.k_folds == 0) throw ConfigError("folds.k_folds must be positive");
  if (!(folds.train_fraction > 0.0 && folds.train_fraction <= 1.0)) {
    throw ConfigError("folds.train_fraction must be in (0, 1]");
  }
  if (patch_px <= 0) throw ConfigError("manifest.patch_px must be positive");
  if (!(gsd_m > 0.0)) throw ConfigError("manifest.gsd_m must be positive");
  try {
    (void)parse_rfc3339(created_at);
  } catch (const DecodeError&) {
    throw ConfigError("created_at must be an RFC 3339 timestamp");
  }
  if (paths.ndvi.size() > kSeasonCount) throw ConfigError("paths.ndvi takes at most 4 seasonal rasters");
  if (paths.land_mask) require_exists(*paths.land_mask, "paths.land_mask");
  if (paths.evi_csv) require_exists(*paths.evi_csv, "paths.evi_csv");
  for (const auto& set : paths.pheno_rasters) {
    require_exists(set.greenup, "paths.pheno_rasters.greenup");
    require_exists(set.maturity, "paths.pheno_rasters.maturity");
    require_exists(set.senescence, "paths.pheno_rasters.senescence");
    require_exists(set.dormancy, "paths.pheno_rasters.dormancy");
  }
  if (paths.catalog && paths.catalog->rfind("http://", 0) != 0) require_exists(*paths.catalog, "paths.catalog");
  for (const auto& p : paths.ndvi)
    if (p) require_exists(*p, "paths.ndvi");
  if (paths.mountain_mask) require_exists(*paths.mountain_mask, "paths.mountain_mask");
}

PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    root = json::object();
  } else {
    try {
      root = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
  }

  PipelineConfig cfg;
  Section top(root, "");
  top.get("seed", cfg.seed);
  top.get("created_at", cfg.created_at);

  if (auto s = top.sub("grid")) {
    s->get("spacing_km", cfg.grid.spacing_km);
    s->get("earth_radius_km", cfg.grid.earth_radius_km);
    s->reject_unknown();
  }
  if (auto s = top.sub("phenology")) {
    s->get("low_fraction", cfg.pheno.low_fraction);
    s->get("high_fraction", cfg.pheno.high_fraction);
    std::string mode(window_mode_name(cfg.window_mode));
    s->get("window_mode", mode);
    cfg.window_mode = parse_window_mode(mode);
    s->get("year_length", cfg.year_length);
    s->reject_unknown();
  }
  if (auto s = top.sub("selection")) {
    s->get("max_cloud", cfg.selection.max_cloud);
    s->get("year_start", cfg.selection.year_start);
    s->get("year_end", cfg.selection.year_end);
    s->get("min_images", cfg.selection.min_images);
    s->get("workers", cfg.workers);
    s->get("max_failure_fraction", cfg.max_failure_fraction);
    int page_limit = cfg.remote.page_limit, attempts = cfg.remote.max_attempts;
    s->get("page_limit", page_limit);
    s->get("max_attempts", attempts);
    cfg.remote.page_limit = page_limit;
    cfg.remote.max_attempts = attempts;
    s->reject_unknown();
  }
  if (auto s = top.sub("weights")) {
    s->get("nonveg_divisor", cfg.weights.nonveg_divisor);
    s->get("nonveg_threshold", cfg.weights.nonveg_threshold);
    s->get("mountain_multiplier", cfg.weights.mountain_multiplier);
    s->reject_unknown();
  }
  if (auto s = top.sub("knn")) {
    s->get("k", cfg.knn.k);
    s->get("temperature", cfg.knn.temperature);
    s->get("k_grid", cfg.knn.k_grid);
    s->reject_unknown();
  }
  if (auto s = top.sub("probe")) {
    s->get("learning_rate", cfg.probe.learning_rate);
    s->get("batch_size", cfg.probe.batch_size);
    s->get("max_epochs", cfg.probe.max_epochs);
    s->get("patience", cfg.probe.patience);
    s->get("weight_decay", cfg.probe.weight_decay);
    s->get("standardize", cfg.probe.standardize);
    s->reject_unknown();
  }
  if (auto s = top.sub("folds")) {
    s->get("k_folds", cfg.folds.k_folds);
    s->get("train_fraction", cfg.folds.train_fraction);
    s->reject_unknown();
  }
  if (auto s = top.sub("manifest")) {
    s->get("patch_px", cfg.patch_px);
    s->get("gsd_m", cfg.gsd_m);
    s->reject_unknown();
  }
  if (auto s = top.sub("paths")) {
    std::string value;
    const auto path_field = [&](const char* key, std::optional<std::filesystem::path>& out) {
      if (auto v = s->raw(key)) {
        if (!v->is_string()) throw ConfigError(s->label(key) + " must be a string");
        out = resolve(base_dir, v->get<std::string>());
      }
    };
    path_field("land_mask", cfg.paths.land_mask);
    path_field("evi_csv", cfg.paths.evi_csv);
    path_field("mountain_mask", cfg.paths.mountain_mask);
    if (auto v = s->raw("catalog")) {
      if (!v->is_string()) throw ConfigError("paths.catalog must be a string");
      const auto c = v->get<std::string>();
      cfg.paths.catalog = c.rfind("http://", 0) == 0 || c.rfind("https://", 0) == 0 ? c : resolve(base_dir, c).string();
    }
    if (auto v = s->raw("output_dir")) {
      if (!v->is_string()) throw ConfigError("paths.output_dir must be a string");
      cfg.paths.output_dir = resolve(base_dir, v->get<std::string>());
    } else {
      cfg.paths.output_dir = base_dir / cfg.paths.output_dir;
    }
    if (auto v = s->raw("ndvi")) {
      if (!v->is_array()) throw ConfigError("paths.ndvi must be an array of 4 paths (null for missing)");
      for (const auto& e : *v) {
        if (e.is_null()) {
          cfg.paths.ndvi.emplace_back();
        } else if (e.is_string()) {
          cfg.paths.ndvi.emplace_back(resolve(base_dir, e.get<std::string>()));
        } else {
          throw ConfigError("paths.ndvi entries must be strings or null");
        }
      }
    }
    if (auto v = s->raw("pheno_rasters")) {
      if (!v->is_array()) throw ConfigError("paths.pheno_rasters must be an array");
      for (const auto& e : *v) {
        Section r(e, "paths.pheno_rasters[]");
        PhenoRasterSet set;
        std::string g, m, sn, d;
        r.get("year", set.year);
        r.get("greenup", g);
        r.get("maturity", m);
        r.get("senescence", sn);
        r.get("dormancy", d);
        r.reject_unknown();
        if (g.empty() || m.empty() || sn.empty() || d.empty()) {
          throw ConfigError("paths.pheno_rasters entries need greenup, maturity, senescence and dormancy");
        }
        set.greenup = resolve(base_dir, g);
        set.maturity = resolve(base_dir, m);
        set.senescence = resolve(base_dir, sn);
        set.dormancy = resolve(base_dir, d);
        cfg.paths.pheno_rasters.push_back(std::move(set));
      }
    }
    s->reject_unknown();
  } else {
    cfg.paths.output_dir = base_dir / cfg.paths.output_dir;
  }
  top.reject_unknown();
  cfg.folds.seed = cfg.seed;

  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return parse_config(ss.str(), base);
}

}  // namespace phenosample
