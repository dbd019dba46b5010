#include "cem/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "cem/error.hpp"
#include "cem/metrics.hpp"
#include "cem/model_io.hpp"
#include "cem/rng.hpp"

namespace cem {

namespace {

constexpr std::uint32_t kBundleMagic = 0x43454d42;  // "CEMB"
constexpr std::uint32_t kBundleVersion = 1;

std::uint64_t cv_base_seed(std::uint64_t master) { return hash_seed(master, 0xCEAC5); }

std::vector<std::string> data_labels_for(std::size_t k) {
  std::vector<std::string> labels;
  labels.reserve(k);
  for (std::size_t i = 0; i < k; ++i) labels.push_back("data_" + std::to_string(i + 1));
  return labels;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

CemModel::CemModel(FeatureSchema schema, ClusterModel router,
                   std::vector<std::unique_ptr<Regressor>> submodels)
    : schema_(std::move(schema)),
      router_(std::move(router)),
      submodels_(std::move(submodels)) {
  if (submodels_.size() != router_.labels().size())
    throw InvalidArgumentError("one submodel per router label required");
}

const Regressor& CemModel::submodel(std::size_t label_index) const {
  return *submodels_.at(label_index);
}

std::vector<std::size_t> CemModel::route(const ODPairDataset& data) const {
  return router_.route_all(data);
}

std::vector<double> CemModel::predict(const ODPairDataset& data) const {
  if (!(data.schema() == schema_))
    throw SchemaError("dataset schema does not match the fitted model");
  const std::vector<std::size_t> labels = router_.route_all(data);
  const Matrix features = router_.normalizer().apply(data.feature_matrix());

  // Batch rows per cluster, predict, then scatter back into input order.
  std::vector<std::vector<std::size_t>> per_label(submodels_.size());
  for (std::size_t i = 0; i < labels.size(); ++i) per_label[labels[i]].push_back(i);

  std::vector<double> out(data.size(), 0.0);
  for (std::size_t l = 0; l < per_label.size(); ++l) {
    if (per_label[l].empty()) continue;
    const Matrix x = features.take_rows(per_label[l]);
    const std::vector<double> pred = submodels_[l]->predict(x);
    for (std::size_t r = 0; r < per_label[l].size(); ++r) out[per_label[l][r]] = pred[r];
  }
  return out;
}

CemModel fit_cem(const ODPairDataset& train, const CemExperimentConfig& config,
                 CemProvenance* provenance, const ODPairDataset* full) {
  if (train.empty()) throw EmptyInputError("fit_cem on empty training data");
  const FeatureSchema& schema = train.schema();
  const std::vector<std::size_t> clustering_cols = schema.clustering_feature_indices();
  if (clustering_cols.empty())
    throw SchemaError("no clustering-eligible feature columns (everything is "
                      "travel impedance)");

  CemProvenance local_prov;
  CemProvenance& prov = provenance ? *provenance : local_prov;

  const ODPairDataset& norm_source =
      (config.normalize_on_full && full) ? *full : train;
  const NormalizationParams normalizer = NormalizationParams::fit(norm_source);

  const ODPairDataset& cluster_source =
      (config.cluster_on_full && full) ? *full : train;

  const KnowledgePartition part = apply_knowledge_rules(cluster_source, config.rules);
  if (part.remainder.empty())
    throw SelectionError("knowledge rules matched every row; no remainder left for "
                          "data-driven clustering");

  Matrix remainder(part.remainder.size(), clustering_cols.size());
  for (std::size_t r = 0; r < part.remainder.size(); ++r) {
    const ODRow& row = cluster_source.row(part.remainder[r]);
    for (std::size_t j = 0; j < clustering_cols.size(); ++j)
      remainder(r, j) =
          normalizer.normalize_value(clustering_cols[j], row.values[clustering_cols[j]]);
  }

  ClusteringOptions cl_opts = config.clustering;
  if (cl_opts.threads == 0) cl_opts.threads = config.threads;
  DataClusteringSelection sel = select_data_clustering(remainder, cl_opts);

  prov.method = sel.method;
  prov.k = sel.k;
  prov.mean_dbi = sel.mean_dbi;
  prov.best_dbi = sel.best_dbi;
  prov.clustering_table = sel.table;

  ClusterModel router(config.rules, std::move(sel.model), normalizer, clustering_cols,
                      data_labels_for(sel.k));

  const std::vector<std::size_t> train_labels = router.route_all(train);
  const Matrix train_features = normalizer.apply(train.feature_matrix());
  const std::vector<double> train_targets = train.targets();
  const double global_mean = mean_of(train_targets);

  const std::size_t n_labels = router.labels().size();
  std::vector<std::vector<std::size_t>> rows_per_label(n_labels);
  for (std::size_t i = 0; i < train.size(); ++i)
    rows_per_label[train_labels[i]].push_back(i);

  const std::uint64_t cv_seed = cv_base_seed(config.seed);

  std::vector<std::unique_ptr<Regressor>> submodels(n_labels);
  for (std::size_t l = 0; l < n_labels; ++l) {
    const auto& rows = rows_per_label[l];
    ClusterFitInfo info;
    info.label = router.labels()[l];
    info.train_rows = rows.size();
    info.share = 100.0 * static_cast<double>(rows.size()) /
                 static_cast<double>(train.size());

    std::vector<double> y;
    y.reserve(rows.size());
    for (std::size_t i : rows) y.push_back(train_targets[i]);
    info.mean_target = rows.empty() ? global_mean : mean_of(y);

    if (rows.size() < std::max<std::size_t>(config.folds, 2)) {
      const double value = rows.empty() ? global_mean : mean_of(y);
      submodels[l] =
          std::make_unique<ConstantModel>(value, schema.feature_count());
      info.fallback = true;
      info.selected_family = Family::constant_mean;
      prov.warnings.push_back("cluster \"" + info.label + "\" has " +
                              std::to_string(rows.size()) +
                              " training rows (< folds); using a constant-mean "
                              "predictor");
    } else {
      const Matrix x = train_features.take_rows(rows);
      SubmodelSelection s = select_submodel(x, y, config.families, config.grids,
                                            config.folds, cv_seed, config.threads);
      info.selected_family = s.family;
      info.selected_hp = s.table[s.winner_index].hp;
      info.cv_mse = s.table[s.winner_index].mean_mse;
      info.cv_table = std::move(s.table);
      submodels[l] = std::move(s.model);
    }
    prov.clusters.push_back(std::move(info));
  }

  return CemModel(schema, std::move(router), std::move(submodels));
}

ComparisonReport benchmark_compare(const ODPairDataset& train,
                                   const ODPairDataset& test,
                                   const CemExperimentConfig& config,
                                   const ODPairDataset* full, CemModel* model_out,
                                   CemProvenance* provenance_out) {
  if (train.empty() || test.empty())
    throw EmptyInputError("benchmark_compare needs non-empty train and test");

  CemProvenance prov;
  CemModel cem = fit_cem(train, config, &prov, full);

  const NormalizationParams& normalizer = cem.router().normalizer();
  const Matrix train_x = normalizer.apply(train.feature_matrix());
  const Matrix test_x = normalizer.apply(test.feature_matrix());
  const std::vector<double> train_y = train.targets();
  const std::vector<double> test_y = test.targets();

  const std::uint64_t cv_seed = cv_base_seed(config.seed);

  ComparisonReport report;
  report.labels = cem.labels();

  // Global benchmarks: tune each family on the full training set, refit the
  // tuned combination, and score the test split.
  std::vector<std::vector<double>> bench_preds(config.families.size());
  for (std::size_t fi = 0; fi < config.families.size(); ++fi) {
    const Family family = config.families[fi];
    BenchmarkScore score;
    score.family = family;
    auto git = config.grids.find(family);
    const GridSpec grid = git == config.grids.end() ? GridSpec{} : git->second;
    try {
      GridSearchResult res =
          grid_search(train_x, train_y, family, grid, config.folds, cv_seed,
                      config.threads);
      std::size_t combo = 0;
      for (std::size_t c = 0; c < res.evaluated.size(); ++c)
        if (res.evaluated[c].mean_mse == res.best.mean_mse) {
          combo = c;
          break;
        }
      score.hp = res.best.hp;
      score.cv_mse = res.best.mean_mse;
      if (!std::isfinite(score.cv_mse)) throw SelectionError("all folds failed");
      const auto model = fit_regressor(family, train_x, train_y, res.best.hp,
                                       refit_seed(cv_seed, family, combo));
      bench_preds[fi] = model->predict(test_x);
      const Metrics m = compute_metrics(test_y, bench_preds[fi]);
      score.test_mae = m.mae;
      score.test_rmse = m.rmse;
    } catch (const std::exception& e) {
      score.failed = true;
      score.cv_mse = std::numeric_limits<double>::infinity();
      score.test_mae = score.test_rmse = std::numeric_limits<double>::quiet_NaN();
      prov.warnings.push_back("benchmark " + family_to_string(family) +
                              " failed: " + e.what());
    }
    report.benchmarks.push_back(std::move(score));
  }

  std::size_t best = 0;
  bool any = false;
  for (std::size_t fi = 0; fi < report.benchmarks.size(); ++fi) {
    if (report.benchmarks[fi].failed) continue;
    if (!any || report.benchmarks[fi].cv_mse < report.benchmarks[best].cv_mse) {
      best = fi;
      any = true;
    }
  }
  if (!any) throw SelectionError("every global benchmark failed");
  report.best_benchmark = best;

  // CEM on the test split.
  const std::vector<double> cem_pred = cem.predict(test);
  const std::vector<std::size_t> test_labels = cem.route(test);
  const Metrics cem_m = compute_metrics(test_y, cem_pred);
  report.cem_mae = cem_m.mae;
  report.cem_rmse = cem_m.rmse;

  const std::vector<double>& best_pred = bench_preds[best];
  const Metrics best_m = compute_metrics(test_y, best_pred);
  if (best_m.mae > 0.0)
    report.overall_mae_improvement = 100.0 * (best_m.mae - cem_m.mae) / best_m.mae;
  if (best_m.rmse > 0.0)
    report.overall_rmse_improvement = 100.0 * (best_m.rmse - cem_m.rmse) / best_m.rmse;

  // Per-cluster comparison under routed labels.
  for (std::size_t l = 0; l < report.labels.size(); ++l) {
    ClusterComparison cc;
    cc.label = report.labels[l];
    std::vector<double> yt, yc, yb;
    for (std::size_t i = 0; i < test.size(); ++i) {
      if (test_labels[i] != l) continue;
      yt.push_back(test_y[i]);
      yc.push_back(cem_pred[i]);
      yb.push_back(best_pred[i]);
    }
    cc.test_rows = yt.size();
    if (!yt.empty()) {
      const Metrics mc = compute_metrics(yt, yc);
      const Metrics mb = compute_metrics(yt, yb);
      cc.cem_mae = mc.mae;
      cc.cem_rmse = mc.rmse;
      cc.bench_mae = mb.mae;
      cc.bench_rmse = mb.rmse;
      if (mb.mae > 0.0) cc.mae_improvement = 100.0 * (mb.mae - mc.mae) / mb.mae;
      if (mb.rmse > 0.0) cc.rmse_improvement = 100.0 * (mb.rmse - mc.rmse) / mb.rmse;
    }
    report.clusters.push_back(std::move(cc));
  }

  report.rows.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    PredictionRow pr;
    pr.origin = test.row(i).origin;
    pr.destination = test.row(i).destination;
    pr.label = test_labels[i];
    pr.y_true = test_y[i];
    pr.y_cem = cem_pred[i];
    pr.y_bench = best_pred[i];
    report.rows.push_back(std::move(pr));
  }

  if (model_out) *model_out = std::move(cem);
  if (provenance_out) *provenance_out = std::move(prov);
  return report;
}

void CemModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path.string());
  BinaryWriter w{out};
  w.u32(kBundleMagic);
  w.u32(kBundleVersion);
  w.str(schema_.to_json_text());

  // Normalizer.
  const auto& scales = router_.normalizer().raw();
  w.u64(scales.size());
  for (const auto& s : scales) {
    w.u8(s.has_value() ? 1 : 0);
    if (s) {
      w.f64(s->min);
      w.f64(s->max);
      w.u8(s->constant ? 1 : 0);
    }
  }

  // Knowledge rules (tracts sorted for stable bytes).
  w.u64(router_.rules().size());
  for (const auto& rule : router_.rules().rules()) {
    w.str(rule.label);
    std::vector<std::string> tracts(rule.tracts.begin(), rule.tracts.end());
    std::sort(tracts.begin(), tracts.end());
    w.u64(tracts.size());
    for (const auto& t : tracts) w.str(t);
  }

  w.u64(router_.clustering_columns().size());
  for (std::size_t c : router_.clustering_columns()) w.u64(c);

  // Data-driven model.
  if (std::holds_alternative<KMeansModel>(router_.data_model())) {
    const auto& m = std::get<KMeansModel>(router_.data_model());
    w.u8(0);
    w.u64(m.k);
    w.matrix(m.centroids);
    w.f64(m.inertia);
  } else {
    const auto& m = std::get<GmmModel>(router_.data_model());
    w.u8(1);
    w.u64(m.k);
    w.vec(m.weights);
    w.matrix(m.means);
    w.matrix(m.variances);
    w.f64(m.log_likelihood);
  }

  w.u64(submodels_.size());
  for (std::size_t l = 0; l < submodels_.size(); ++l) {
    w.str(router_.labels()[l]);
    save_regressor(*submodels_[l], out);
  }
}

CemModel CemModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path.string());
  BinaryReader r{in};
  if (r.u32() != kBundleMagic) throw ParseError("not a CEM model bundle");
  const std::uint32_t version = r.u32();
  if (version != kBundleVersion)
    throw ParseError("unsupported bundle version " + std::to_string(version));

  FeatureSchema schema = FeatureSchema::from_json_text(r.str());

  NormalizationParams normalizer;
  normalizer.raw().resize(r.u64());
  for (auto& s : normalizer.raw()) {
    if (r.u8()) {
      ColumnScale cs;
      cs.min = r.f64();
      cs.max = r.f64();
      cs.constant = r.u8() != 0;
      s = cs;
    }
  }

  std::vector<KnowledgeRule> rules(r.u64());
  for (auto& rule : rules) {
    rule.label = r.str();
    const std::uint64_t nt = r.u64();
    for (std::uint64_t i = 0; i < nt; ++i) rule.tracts.insert(r.str());
  }

  std::vector<std::size_t> clustering_cols(r.u64());
  for (auto& c : clustering_cols) c = r.u64();

  DataModel data_model;
  if (r.u8() == 0) {
    KMeansModel m;
    m.k = r.u64();
    m.centroids = r.matrix();
    m.inertia = r.f64();
    data_model = std::move(m);
  } else {
    GmmModel m;
    m.k = r.u64();
    m.weights = r.vec();
    m.means = r.matrix();
    m.variances = r.matrix();
    m.log_likelihood = r.f64();
    data_model = std::move(m);
  }
  const std::size_t k =
      std::visit([](const auto& m) { return m.k; }, data_model);

  const std::uint64_t n_models = r.u64();
  std::vector<std::string> data_labels;
  std::vector<std::unique_ptr<Regressor>> submodels;
  for (std::uint64_t l = 0; l < n_models; ++l) {
    std::string label = r.str();
    if (l >= rules.size()) data_labels.push_back(std::move(label));
    submodels.push_back(load_regressor(in));
  }
  if (data_labels.size() != k) throw ParseError("bundle label count mismatch");

  ClusterModel router(KnowledgeRules(std::move(rules)), std::move(data_model),
                      std::move(normalizer), std::move(clustering_cols),
                      std::move(data_labels));
  return CemModel(std::move(schema), std::move(router), std::move(submodels));
}

}  // namespace cem
