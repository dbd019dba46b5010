#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "cem/dataset.hpp"
#include "cem/gmm.hpp"
#include "cem/kmeans.hpp"
#include "cem/normalize.hpp"

namespace cem {

// Ordered rule list; an OD pair matches a rule when its origin OR destination
// tract is in the rule's set, and the first matching rule wins.
struct KnowledgeRule {
  std::string label;
  std::unordered_set<std::string> tracts;
};

class KnowledgeRules {
 public:
  KnowledgeRules() = default;
  explicit KnowledgeRules(std::vector<KnowledgeRule> rules);

  std::size_t size() const { return rules_.size(); }
  bool empty() const { return rules_.empty(); }
  const std::vector<KnowledgeRule>& rules() const { return rules_; }

  std::optional<std::size_t> match(const std::string& origin,
                                   const std::string& destination) const;

 private:
  std::vector<KnowledgeRule> rules_;
};

struct KnowledgePartition {
  std::vector<std::vector<std::size_t>> rule_rows;  // one bucket per rule
  std::vector<std::size_t> remainder;
};

// Disjoint partition covering every row: first matching rule, else remainder.
KnowledgePartition apply_knowledge_rules(const ODPairDataset& data,
                                         const KnowledgeRules& rules);

enum class ClusterMethod { kmeans, gmm };

std::string method_to_string(ClusterMethod m);
ClusterMethod method_from_string(const std::string& s);

using DataModel = std::variant<KMeansModel, GmmModel>;

struct ClusteringCandidate {
  ClusterMethod method;
  std::size_t k = 0;
  double mean_dbi = 0.0;
  double best_dbi = 0.0;
  std::uint64_t best_seed = 0;
  std::size_t invalid_runs = 0;
};

struct DataClusteringSelection {
  DataModel model;
  ClusterMethod method = ClusterMethod::kmeans;
  std::size_t k = 0;
  double mean_dbi = 0.0;
  double best_dbi = 0.0;
  std::uint64_t best_seed = 0;
  std::vector<ClusteringCandidate> table;  // all (method, k) candidates
};

struct ClusteringOptions {
  std::vector<ClusterMethod> methods{ClusterMethod::kmeans, ClusterMethod::gmm};
  std::vector<std::size_t> k_range{2, 3, 4, 5, 6, 7};
  std::size_t n_seeds = 100;
  std::size_t max_iter = 100;
  double tol = 1e-6;
  std::size_t threads = 0;
};

// Evaluates every (method, k) over n_seeds seeded runs; the candidate with
// the lowest mean DBI wins and its single best-DBI run is carried forward.
// Runs whose DBI is undefined (k = 1, empty hard cluster, coincident
// centroids) score +infinity. A lone candidate is selected without scoring.
DataClusteringSelection select_data_clustering(const Matrix& X,
                                               const ClusteringOptions& opts);

// Knowledge rules ahead of a fitted data-driven model, plus the normalizer
// that maps raw feature rows into the clustering space. Immutable after
// construction; route is safe to call concurrently.
class ClusterModel {
 public:
  ClusterModel() = default;
  ClusterModel(KnowledgeRules rules, DataModel data_model,
               NormalizationParams normalizer, std::vector<std::size_t> clustering_cols,
               std::vector<std::string> data_labels);

  const KnowledgeRules& rules() const { return rules_; }
  const DataModel& data_model() const { return data_model_; }
  const NormalizationParams& normalizer() const { return normalizer_; }
  const std::vector<std::size_t>& clustering_columns() const { return clustering_cols_; }

  // Rule labels first, then data-cluster labels.
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t data_cluster_count() const;

  std::size_t route(const ODRow& row) const;
  std::vector<std::size_t> route_all(const ODPairDataset& data) const;

 private:
  KnowledgeRules rules_;
  DataModel data_model_;
  NormalizationParams normalizer_;
  std::vector<std::size_t> clustering_cols_;
  std::vector<std::string> labels_;
};

}  // namespace cem
