#include "cem/config.hpp"

#include <fstream>

#include "cem/error.hpp"

namespace cem {

namespace {

GridSpec grid_from_json(const nlohmann::json& j) {
  GridSpec grid;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& values = it.value();
    if (!values.is_array() || values.empty())
      throw ConfigError("grid entry \"" + it.key() + "\" must be a non-empty array");
    if (values[0].is_string()) {
      std::vector<std::string> vs;
      for (const auto& v : values) vs.push_back(v.get<std::string>());
      grid.str[it.key()] = std::move(vs);
    } else {
      std::vector<double> vs;
      for (const auto& v : values) vs.push_back(v.get<double>());
      grid.num[it.key()] = std::move(vs);
    }
  }
  return grid;
}

}  // namespace

std::map<Family, GridSpec> default_grids(const std::string& preset) {
  std::map<Family, GridSpec> grids;
  if (preset == "published") {
    grids[Family::cart].num = {{"features", {20}}, {"min_sample_split", {28}}, {"ccp", {0.004}}};
    grids[Family::random_forest].num = {{"trees", {300}}, {"features", {8}}};
    grids[Family::gbdt].num = {
        {"trees", {400}}, {"features", {8}}, {"learning_rate", {0.04}}, {"depth", {5}}};
    grids[Family::xgb].num = {
        {"trees", {400}}, {"features", {8}}, {"learning_rate", {0.05}}, {"depth", {5}}};
    grids[Family::svr].num = {{"C", {10000}}};
    grids[Family::svr].str = {{"kernel", {"rbf"}}};
    grids[Family::nn].num = {
        {"neurons", {20}}, {"weight_decay", {0.001}}, {"learning_rate", {0.005}}};
  } else if (preset == "default") {
    grids[Family::cart].num = {{"features", {10, 20, 40}},
                               {"min_sample_split", {14, 28, 42}},
                               {"ccp", {0.002, 0.004, 0.008}}};
    grids[Family::random_forest].num = {{"trees", {200, 300, 400}}, {"features", {6, 8, 10}}};
    grids[Family::gbdt].num = {{"trees", {300, 400, 500}},
                               {"features", {6, 8, 10}},
                               {"learning_rate", {0.03, 0.04, 0.05}},
                               {"depth", {4, 5, 6}}};
    grids[Family::xgb].num = {{"trees", {300, 400, 500}},
                              {"features", {6, 8, 10}},
                              {"learning_rate", {0.04, 0.05, 0.06}},
                              {"depth", {4, 5, 6}}};
    grids[Family::svr].num = {{"C", {1000, 10000, 100000}}, {"epsilon", {0.1}}};
    grids[Family::svr].str = {{"kernel", {"rbf"}}};
    grids[Family::nn].num = {{"neurons", {10, 20, 30}},
                             {"weight_decay", {0.0001, 0.001, 0.01}},
                             {"learning_rate", {0.0005, 0.005, 0.05}}};
  } else if (preset != "none") {
    throw ConfigError("unknown grid preset \"" + preset + "\"");
  }
  // The three regression families have no hyperparameters: empty grids.
  grids[Family::linear];
  grids[Family::log_linear];
  grids[Family::poisson];
  return grids;
}

RunConfig parse_run_config(const nlohmann::json& doc) {
  RunConfig cfg;
  cfg.raw = doc;

  if (doc.contains("paths")) {
    const auto& p = doc["paths"];
    auto get = [&](const char* key, std::filesystem::path& out) {
      if (p.contains(key)) out = p[key].get<std::string>();
    };
    get("trips_csv", cfg.trips_csv);
    get("od_csv", cfg.od_csv);
    get("centroids_csv", cfg.centroids_csv);
    get("features_csv", cfg.features_csv);
    get("holidays", cfg.holidays);
    get("output_dir", cfg.output_dir);
  }

  if (doc.contains("schema")) {
    cfg.schema = FeatureSchema::from_json_text(doc["schema"].dump());
  } else if (doc.contains("schema_file")) {
    cfg.schema = FeatureSchema::from_json_file(doc["schema_file"].get<std::string>());
  }

  if (doc.contains("prep")) {
    const auto& p = doc["prep"];
    if (p.contains("min_trips")) cfg.min_trips = p["min_trips"].get<std::size_t>();
    if (p.contains("assign_seed")) cfg.assign_seed = p["assign_seed"].get<std::uint64_t>();
    if (p.contains("column_map")) {
      const auto& m = p["column_map"];
      auto get = [&](const char* key, std::string& out) {
        if (m.contains(key)) out = m[key].get<std::string>();
      };
      get("pickup_tract", cfg.trip_columns.pickup_tract);
      get("dropoff_tract", cfg.trip_columns.dropoff_tract);
      get("pickup_community", cfg.trip_columns.pickup_community);
      get("dropoff_community", cfg.trip_columns.dropoff_community);
      get("fare", cfg.trip_columns.fare);
      get("distance", cfg.trip_columns.distance);
      get("duration", cfg.trip_columns.duration);
      get("timestamp", cfg.trip_columns.timestamp);
    }
    if (p.contains("feature_roles")) {
      for (auto it = p["feature_roles"].begin(); it != p["feature_roles"].end(); ++it)
        cfg.feature_roles[it.key()] = role_from_string(it.value().get<std::string>());
    }
  }

  if (doc.contains("knowledge")) {
    const auto& k = doc["knowledge"];
    if (k.contains("airport"))
      cfg.airport_tracts = k["airport"].get<std::vector<std::string>>();
    if (k.contains("downtown"))
      cfg.downtown_tracts = k["downtown"].get<std::vector<std::string>>();
  }

  if (doc.contains("clustering")) {
    const auto& c = doc["clustering"];
    if (c.contains("methods")) {
      cfg.clustering.methods.clear();
      for (const auto& m : c["methods"])
        cfg.clustering.methods.push_back(method_from_string(m.get<std::string>()));
    }
    if (c.contains("k_min") || c.contains("k_max")) {
      const std::size_t lo = c.value("k_min", 2);
      const std::size_t hi = c.value("k_max", 7);
      if (lo < 1 || hi > 20 || lo > hi)
        throw ConfigError("clustering k range must satisfy 1 <= k_min <= k_max <= 20");
      cfg.clustering.k_range.clear();
      for (std::size_t k = lo; k <= hi; ++k) cfg.clustering.k_range.push_back(k);
    }
    if (c.contains("k_values")) {
      cfg.clustering.k_range.clear();
      for (const auto& k : c["k_values"]) {
        const std::size_t kv = k.get<std::size_t>();
        if (kv < 1 || kv > 20) throw ConfigError("clustering k must be in [1, 20]");
        cfg.clustering.k_range.push_back(kv);
      }
    }
    if (c.contains("n_seeds")) cfg.clustering.n_seeds = c["n_seeds"].get<std::size_t>();
    if (c.contains("max_iter")) cfg.clustering.max_iter = c["max_iter"].get<std::size_t>();
    if (c.contains("tol")) cfg.clustering.tol = c["tol"].get<double>();
  }
  if (doc.contains("cluster_on")) cfg.cluster_on = doc["cluster_on"].get<std::string>();
  if (doc.contains("normalize_on"))
    cfg.normalize_on = doc["normalize_on"].get<std::string>();
  if (cfg.cluster_on != "train" && cfg.cluster_on != "full")
    throw ConfigError("cluster_on must be \"train\" or \"full\"");
  if (cfg.normalize_on != "train" && cfg.normalize_on != "full")
    throw ConfigError("normalize_on must be \"train\" or \"full\"");

  if (doc.contains("selection")) {
    const auto& s = doc["selection"];
    if (s.contains("families")) {
      cfg.families.clear();
      for (const auto& f : s["families"])
        cfg.families.push_back(family_from_string(f.get<std::string>()));
    }
    if (s.contains("folds")) cfg.folds = s["folds"].get<std::size_t>();
    if (s.contains("grid_preset")) cfg.grid_preset = s["grid_preset"].get<std::string>();
    cfg.grids = default_grids(cfg.grid_preset);
    if (s.contains("grids")) {
      for (auto it = s["grids"].begin(); it != s["grids"].end(); ++it)
        cfg.grids[family_from_string(it.key())] = grid_from_json(it.value());
    }
  } else {
    cfg.grids = default_grids(cfg.grid_preset);
  }

  if (doc.contains("split")) {
    const auto& s = doc["split"];
    if (s.contains("fraction")) cfg.split_fraction = s["fraction"].get<double>();
    if (s.contains("seed")) cfg.split_seed = s["seed"].get<std::uint64_t>();
  }
  if (cfg.split_fraction <= 0.0 || cfg.split_fraction >= 1.0)
    throw ConfigError("split fraction must lie strictly between 0 and 1");

  if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("threads")) cfg.threads = doc["threads"].get<std::size_t>();

  if (doc.contains("synthetic")) {
    const auto& s = doc["synthetic"];
    auto& sp = cfg.synthetic;
    if (s.contains("n_rows")) sp.n_rows = s["n_rows"].get<std::size_t>();
    if (s.contains("n_features")) sp.n_features = s["n_features"].get<std::size_t>();
    if (s.contains("n_clusters")) sp.n_clusters = s["n_clusters"].get<std::size_t>();
    if (s.contains("separation")) sp.separation = s["separation"].get<double>();
    if (s.contains("noise")) sp.noise = s["noise"].get<double>();
    if (s.contains("knowledge_fraction"))
      sp.knowledge_fraction = s["knowledge_fraction"].get<double>();
    if (s.contains("seed")) sp.seed = s["seed"].get<std::uint64_t>();
    if (s.contains("coef_scale")) sp.coef_scale = s["coef_scale"].get<double>();
    if (s.contains("intercept")) sp.intercept = s["intercept"].get<double>();
    if (s.contains("opposed_signs")) sp.opposed_signs = s["opposed_signs"].get<bool>();
    if (s.contains("coefficients"))
      sp.coefficients = s["coefficients"].get<std::vector<std::vector<double>>>();
    if (s.contains("intercepts"))
      sp.intercepts = s["intercepts"].get<std::vector<double>>();
  }

  if (doc.contains("report")) {
    const auto& r = doc["report"];
    if (r.contains("histogram_columns"))
      cfg.histogram_columns = r["histogram_columns"].get<std::vector<std::string>>();
    if (r.contains("histogram_bins"))
      cfg.histogram_bins = r["histogram_bins"].get<std::size_t>();
    if (r.contains("dump_predictions"))
      cfg.dump_predictions = r["dump_predictions"].get<bool>();
  }

  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  try {
    return parse_run_config(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config error in " + path.string() + ": " + e.what());
  }
}

KnowledgeRules knowledge_rules_from(const RunConfig& cfg) {
  std::vector<KnowledgeRule> rules;
  // Airport ahead of downtown: pairs touching both count as airport.
  if (!cfg.airport_tracts.empty()) {
    KnowledgeRule r;
    r.label = "airport";
    r.tracts.insert(cfg.airport_tracts.begin(), cfg.airport_tracts.end());
    rules.push_back(std::move(r));
  }
  if (!cfg.downtown_tracts.empty()) {
    KnowledgeRule r;
    r.label = "downtown";
    r.tracts.insert(cfg.downtown_tracts.begin(), cfg.downtown_tracts.end());
    rules.push_back(std::move(r));
  }
  return KnowledgeRules(std::move(rules));
}

CemExperimentConfig to_experiment_config(const RunConfig& cfg) {
  CemExperimentConfig ec;
  ec.rules = knowledge_rules_from(cfg);
  ec.clustering = cfg.clustering;
  ec.families = cfg.families;
  ec.grids = cfg.grids;
  ec.folds = cfg.folds;
  ec.seed = cfg.seed;
  ec.cluster_on_full = cfg.cluster_on == "full";
  ec.normalize_on_full = cfg.normalize_on == "full";
  ec.threads = cfg.threads;
  return ec;
}

namespace {

void require_file(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string(what) + " path not configured");
  if (!std::filesystem::exists(p))
    throw ConfigError(std::string(what) + " file not found: " + p.string());
}

}  // namespace

void validate_for_prep(const RunConfig& cfg) {
  require_file(cfg.trips_csv, "trip CSV");
  require_file(cfg.centroids_csv, "centroid CSV");
  if (!cfg.features_csv.empty()) require_file(cfg.features_csv, "feature CSV");
  if (!cfg.holidays.empty()) require_file(cfg.holidays, "holiday list");
  if (!cfg.features_csv.empty() && cfg.feature_roles.empty())
    throw ConfigError("feature join requires prep.feature_roles");
}

void validate_for_experiment(const RunConfig& cfg) {
  require_file(cfg.od_csv, "OD CSV");
  if (!cfg.schema) throw ConfigError("experiment requires a schema");
  if (cfg.families.empty()) throw ConfigError("experiment requires learner families");
  if (cfg.folds < 2) throw ConfigError("folds must be >= 2");
  for (std::size_t k : cfg.clustering.k_range)
    if (k < 1 || k > 20) throw ConfigError("clustering k must be in [1, 20]");
}

void validate_for_generate(const RunConfig& cfg) {
  const auto& s = cfg.synthetic;
  if (s.n_rows == 0 || s.n_features == 0 || s.n_clusters == 0)
    throw ConfigError("synthetic spec needs n_rows, n_features, n_clusters >= 1");
  if (s.separation < 0.0 || s.noise < 0.0)
    throw ConfigError("synthetic separation and noise must be nonnegative");
  if (s.knowledge_fraction < 0.0 || s.knowledge_fraction > 1.0)
    throw ConfigError("knowledge_fraction must be in [0, 1]");
}

}  // namespace cem
