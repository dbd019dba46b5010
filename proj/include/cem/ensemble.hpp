#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cem/cluster.hpp"
#include "cem/crossval.hpp"
#include "cem/dataset.hpp"
#include "cem/learners.hpp"

namespace cem {

struct CemExperimentConfig {
  KnowledgeRules rules;
  ClusteringOptions clustering;
  std::vector<Family> families{Family::gbdt, Family::linear};
  std::map<Family, GridSpec> grids;
  std::size_t folds = 5;
  std::uint64_t seed = 42;
  bool cluster_on_full = false;    // fit the router on the full dataset
  bool normalize_on_full = false;  // fit the normalizer on the full dataset
  std::size_t threads = 0;
};

struct ClusterFitInfo {
  std::string label;
  std::size_t train_rows = 0;
  double share = 0.0;  // % of training rows
  double mean_target = 0.0;
  Family selected_family = Family::constant_mean;
  HyperParams selected_hp;
  double cv_mse = 0.0;
  bool fallback = false;
  std::vector<CvResult> cv_table;  // per-family best, family order
};

struct CemProvenance {
  ClusterMethod method = ClusterMethod::kmeans;
  std::size_t k = 0;
  double mean_dbi = 0.0;
  double best_dbi = 0.0;
  std::vector<ClusteringCandidate> clustering_table;
  std::vector<ClusterFitInfo> clusters;
  std::vector<std::string> warnings;
};

// Router plus one selected submodel per cluster label. Prediction routes each
// row and delegates to its cluster's submodel; normalization parameters ride
// along so raw feature rows are accepted everywhere.
class CemModel {
 public:
  CemModel() = default;
  CemModel(FeatureSchema schema, ClusterModel router,
           std::vector<std::unique_ptr<Regressor>> submodels);

  const FeatureSchema& schema() const { return schema_; }
  const ClusterModel& router() const { return router_; }
  const std::vector<std::string>& labels() const { return router_.labels(); }
  const Regressor& submodel(std::size_t label_index) const;

  std::vector<std::size_t> route(const ODPairDataset& data) const;
  std::vector<double> predict(const ODPairDataset& data) const;

  void save(const std::filesystem::path& path) const;
  static CemModel load(const std::filesystem::path& path);

 private:
  FeatureSchema schema_;
  ClusterModel router_;
  std::vector<std::unique_ptr<Regressor>> submodels_;
};

// Clustering execution on the training data (or the full dataset when
// configured), then per-cluster model selection. Clusters with fewer rows
// than the fold count fall back to a constant-mean predictor with a warning.
CemModel fit_cem(const ODPairDataset& train, const CemExperimentConfig& config,
                 CemProvenance* provenance = nullptr,
                 const ODPairDataset* full = nullptr);

struct BenchmarkScore {
  Family family = Family::linear;
  HyperParams hp;
  double cv_mse = 0.0;
  double test_mae = 0.0;
  double test_rmse = 0.0;
  bool failed = false;
};

struct ClusterComparison {
  std::string label;
  std::size_t test_rows = 0;
  double cem_mae = 0.0, cem_rmse = 0.0;
  double bench_mae = 0.0, bench_rmse = 0.0;
  double mae_improvement = 0.0, rmse_improvement = 0.0;  // percent
};

struct PredictionRow {
  std::string origin, destination;
  std::size_t label = 0;
  double y_true = 0.0, y_cem = 0.0, y_bench = 0.0;
};

struct ComparisonReport {
  std::vector<BenchmarkScore> benchmarks;  // family order
  std::size_t best_benchmark = 0;          // lowest tuned CV MSE
  double cem_mae = 0.0, cem_rmse = 0.0;
  double overall_mae_improvement = 0.0, overall_rmse_improvement = 0.0;
  std::vector<ClusterComparison> clusters;  // label order
  std::vector<std::string> labels;
  std::vector<PredictionRow> rows;  // test rows, input order
  // Per-cluster test metrics use routed labels, not fitted ones.
  std::string label_basis = "routed";
};

// Fits every family globally on train, fits the CEM, scores everything on
// test, and reports per-cluster and overall accuracy-improvement rates
// against the CV-selected best global model.
ComparisonReport benchmark_compare(const ODPairDataset& train,
                                   const ODPairDataset& test,
                                   const CemExperimentConfig& config,
                                   const ODPairDataset* full = nullptr,
                                   CemModel* model_out = nullptr,
                                   CemProvenance* provenance_out = nullptr);

}  // namespace cem
