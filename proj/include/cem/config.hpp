#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cem/cluster.hpp"
#include "cem/crossval.hpp"
#include "cem/ensemble.hpp"
#include "cem/prep.hpp"
#include "cem/schema.hpp"
#include "cem/synthetic.hpp"

namespace cem {

// One structured config file drives every command; CLI flags override file
// values and the merged result is echoed into the run manifest.
struct RunConfig {
  // paths
  std::filesystem::path trips_csv;
  std::filesystem::path od_csv;
  std::filesystem::path centroids_csv;
  std::filesystem::path features_csv;
  std::filesystem::path holidays;
  std::filesystem::path output_dir = "out";

  std::optional<FeatureSchema> schema;

  // prep
  TripColumnMap trip_columns;
  std::map<std::string, ColumnRole> feature_roles;
  std::size_t min_trips = 50;
  std::uint64_t assign_seed = 7;

  // knowledge
  std::vector<std::string> airport_tracts;
  std::vector<std::string> downtown_tracts;

  // clustering
  ClusteringOptions clustering;
  std::string cluster_on = "train";    // train | full
  std::string normalize_on = "train";  // train | full

  // selection
  std::vector<Family> families{Family::cart,   Family::random_forest, Family::gbdt,
                               Family::xgb,    Family::svr,           Family::nn,
                               Family::linear, Family::log_linear,    Family::poisson};
  std::map<Family, GridSpec> grids;  // merged preset + overrides
  std::string grid_preset = "default";
  std::size_t folds = 5;

  // experiment
  double split_fraction = 0.9;
  std::uint64_t split_seed = 42;
  std::uint64_t seed = 42;
  std::size_t threads = 0;

  SyntheticSpec synthetic;

  // report
  std::vector<std::string> histogram_columns;
  std::size_t histogram_bins = 40;
  bool dump_predictions = true;

  nlohmann::json raw;  // merged document, echoed into the manifest
};

// Grids centered on the published optima (one step either side); the
// "published" preset pins each hyperparameter to its single tuned value.
std::map<Family, GridSpec> default_grids(const std::string& preset);

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

KnowledgeRules knowledge_rules_from(const RunConfig& cfg);
CemExperimentConfig to_experiment_config(const RunConfig& cfg);

// Fail-fast validation: referenced files must exist, ranges must be sane.
void validate_for_prep(const RunConfig& cfg);
void validate_for_experiment(const RunConfig& cfg);
void validate_for_generate(const RunConfig& cfg);

}  // namespace cem
