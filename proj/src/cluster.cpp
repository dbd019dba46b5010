#include "cem/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "cem/dbi.hpp"
#include "cem/error.hpp"
#include "cem/parallel.hpp"
#include "cem/rng.hpp"

namespace cem {

KnowledgeRules::KnowledgeRules(std::vector<KnowledgeRule> rules)
    : rules_(std::move(rules)) {
  std::set<std::string> labels;
  for (const auto& r : rules_) {
    if (r.tracts.empty())
      throw InvalidArgumentError("knowledge rule \"" + r.label + "\" has an empty tract set");
    if (!labels.insert(r.label).second)
      throw InvalidArgumentError("duplicate knowledge rule label \"" + r.label + "\"");
  }
}

std::optional<std::size_t> KnowledgeRules::match(const std::string& origin,
                                                 const std::string& destination) const {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& t = rules_[i].tracts;
    if (t.count(origin) || t.count(destination)) return i;
  }
  return std::nullopt;
}

KnowledgePartition apply_knowledge_rules(const ODPairDataset& data,
                                         const KnowledgeRules& rules) {
  KnowledgePartition part;
  part.rule_rows.resize(rules.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& row = data.row(i);
    if (auto m = rules.match(row.origin, row.destination))
      part.rule_rows[*m].push_back(i);
    else
      part.remainder.push_back(i);
  }
  return part;
}

std::string method_to_string(ClusterMethod m) {
  return m == ClusterMethod::kmeans ? "kmeans" : "gmm";
}

ClusterMethod method_from_string(const std::string& s) {
  if (s == "kmeans") return ClusterMethod::kmeans;
  if (s == "gmm") return ClusterMethod::gmm;
  throw ConfigError("unknown clustering method \"" + s + "\"");
}

namespace {

struct RunOutcome {
  double dbi = std::numeric_limits<double>::infinity();
  bool valid = false;
};

// DBI of one fitted run; invalid runs (k = 1, empty hard cluster, coincident
// centroids) come back as +infinity.
RunOutcome score_run(const Matrix& X, const std::vector<int>& assignments,
                     std::size_t k) {
  RunOutcome out;
  if (k < 2) return out;
  std::vector<std::size_t> counts(k, 0);
  for (int a : assignments) ++counts[static_cast<std::size_t>(a)];
  for (std::size_t c = 0; c < k; ++c)
    if (counts[c] == 0) return out;
  const double dbi = davies_bouldin(X, assignments, k);
  if (std::isfinite(dbi)) {
    out.dbi = dbi;
    out.valid = true;
  }
  return out;
}

}  // namespace

DataClusteringSelection select_data_clustering(const Matrix& X,
                                               const ClusteringOptions& opts) {
  if (X.rows() == 0) throw EmptyInputError("select_data_clustering on empty data");
  if (opts.methods.empty() || opts.k_range.empty() || opts.n_seeds == 0)
    throw InvalidArgumentError("clustering options need methods, k values and seeds");

  struct Run {
    ClusterMethod method;
    std::size_t k;
    std::uint64_t seed_index;
  };
  std::vector<Run> runs;
  for (ClusterMethod m : opts.methods)
    for (std::size_t k : opts.k_range)
      for (std::uint64_t s = 0; s < opts.n_seeds; ++s) runs.push_back({m, k, s});

  const bool single_candidate = opts.methods.size() == 1 && opts.k_range.size() == 1;

  std::vector<RunOutcome> outcomes(runs.size());
  if (!single_candidate) {
    parallel_for(runs.size(), opts.threads, [&](std::size_t i) {
      const Run& r = runs[i];
      const std::uint64_t seed =
          hash_seed(static_cast<std::uint64_t>(r.method), r.k, r.seed_index);
      if (r.k > X.rows()) return;  // undersized data: leave the run invalid
      if (r.method == ClusterMethod::kmeans) {
        const KMeansModel m = fit_kmeans(X, r.k, seed, opts.max_iter, opts.tol);
        outcomes[i] = score_run(X, m.assignments, r.k);
      } else {
        const GmmModel m = fit_gmm(X, r.k, seed, opts.max_iter, opts.tol);
        outcomes[i] = score_run(X, m.assignments, r.k);
      }
    });
  }

  // Reduce per (method, k) in declaration order.
  DataClusteringSelection sel;
  std::size_t best_candidate = 0;
  double best_mean = std::numeric_limits<double>::infinity();
  std::size_t run_index = 0;
  for (ClusterMethod m : opts.methods) {
    for (std::size_t k : opts.k_range) {
      ClusteringCandidate cand;
      cand.method = m;
      cand.k = k;
      double sum = 0.0;
      double best = std::numeric_limits<double>::infinity();
      std::uint64_t best_seed_index = 0;
      for (std::uint64_t s = 0; s < opts.n_seeds; ++s, ++run_index) {
        const RunOutcome& o = outcomes[run_index];
        if (!o.valid) ++cand.invalid_runs;
        sum += o.dbi;
        if (o.dbi < best) {
          best = o.dbi;
          best_seed_index = s;
        }
      }
      cand.mean_dbi = single_candidate ? std::numeric_limits<double>::quiet_NaN()
                                       : sum / static_cast<double>(opts.n_seeds);
      cand.best_dbi = best;
      cand.best_seed = best_seed_index;
      sel.table.push_back(cand);
      if (!single_candidate && cand.mean_dbi < best_mean) {
        best_mean = cand.mean_dbi;
        best_candidate = sel.table.size() - 1;
      }
    }
  }

  const ClusteringCandidate& winner = sel.table[best_candidate];
  sel.method = winner.method;
  sel.k = winner.k;
  sel.mean_dbi = winner.mean_dbi;
  sel.best_seed = winner.best_seed;

  // Refit the winning run (cheaper than keeping every fitted model around).
  const std::uint64_t seed =
      hash_seed(static_cast<std::uint64_t>(sel.method), sel.k, sel.best_seed);
  if (sel.k > X.rows())
    throw InvalidArgumentError("k = " + std::to_string(sel.k) + " exceeds " +
                               std::to_string(X.rows()) + " remainder rows");
  if (sel.method == ClusterMethod::kmeans) {
    KMeansModel m = fit_kmeans(X, sel.k, seed, opts.max_iter, opts.tol);
    sel.best_dbi = score_run(X, m.assignments, sel.k).dbi;
    sel.model = std::move(m);
  } else {
    GmmModel m = fit_gmm(X, sel.k, seed, opts.max_iter, opts.tol);
    sel.best_dbi = score_run(X, m.assignments, sel.k).dbi;
    sel.model = std::move(m);
  }
  return sel;
}

ClusterModel::ClusterModel(KnowledgeRules rules, DataModel data_model,
                           NormalizationParams normalizer,
                           std::vector<std::size_t> clustering_cols,
                           std::vector<std::string> data_labels)
    : rules_(std::move(rules)),
      data_model_(std::move(data_model)),
      normalizer_(std::move(normalizer)),
      clustering_cols_(std::move(clustering_cols)) {
  for (const auto& r : rules_.rules()) labels_.push_back(r.label);
  for (auto& l : data_labels) labels_.push_back(std::move(l));
  const std::size_t k = std::visit([](const auto& m) { return m.k; }, data_model_);
  if (labels_.size() != rules_.size() + k)
    throw InvalidArgumentError("cluster model needs one label per data cluster");
}

std::size_t ClusterModel::data_cluster_count() const {
  return std::visit([](const auto& m) { return m.k; }, data_model_);
}

std::size_t ClusterModel::route(const ODRow& row) const {
  if (auto m = rules_.match(row.origin, row.destination)) return *m;
  std::vector<double> point(clustering_cols_.size());
  for (std::size_t j = 0; j < clustering_cols_.size(); ++j) {
    const std::size_t col = clustering_cols_[j];
    point[j] = normalizer_.normalize_value(col, row.values[col]);
  }
  const std::size_t cluster =
      std::visit([&](const auto& m) { return m.assign(point); }, data_model_);
  return rules_.size() + cluster;
}

std::vector<std::size_t> ClusterModel::route_all(const ODPairDataset& data) const {
  std::vector<std::size_t> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = route(data.row(i));
  return out;
}

}  // namespace cem
