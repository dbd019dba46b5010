#include "cem/commands.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "cem/csv.hpp"
#include "cem/error.hpp"
#include "cem/report.hpp"
#include "cem/rng.hpp"

namespace cem {

namespace {

std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv("CEM_OUTPUT_DIR")) return env;
  return cfg.output_dir;
}

std::size_t resolve_threads(const RunConfig& cfg) {
  if (const char* env = std::getenv("CEM_THREADS")) {
    const long v = std::atol(env);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return cfg.threads;
}

std::filesystem::path make_run_dir(const RunConfig& cfg, const std::string& command) {
  const auto base = resolve_output_dir(cfg);
  std::filesystem::create_directories(base);
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream stamp;
  stamp << command << '-' << std::put_time(&tm, "%Y%m%d-%H%M%S");
  std::filesystem::path dir = base / stamp.str();
  for (int i = 2; std::filesystem::exists(dir); ++i)
    dir = base / (stamp.str() + "-" + std::to_string(i));
  std::filesystem::create_directories(dir);
  return dir;
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

// Manifest: merged config echo, derived seeds, and the emitted files. Every
// random stream in a run is reproducible from these seeds.
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const RunConfig& cfg, const std::vector<std::string>& outputs,
                    nlohmann::json derived_seeds) {
  nlohmann::json m;
  m["command"] = command;
  m["timestamp_utc"] = timestamp_utc();
  m["config"] = cfg.raw;
  m["derived_seeds"] = std::move(derived_seeds);
  m["outputs"] = outputs;
  std::ofstream out(dir / "manifest.json");
  out << m.dump(2) << '\n';
}

nlohmann::json clustering_seed_table(const RunConfig& cfg) {
  nlohmann::json seeds = nlohmann::json::object();
  for (ClusterMethod method : cfg.clustering.methods) {
    for (std::size_t k : cfg.clustering.k_range) {
      nlohmann::json list = nlohmann::json::array();
      for (std::uint64_t s = 0; s < cfg.clustering.n_seeds; ++s)
        list.push_back(hash_seed(static_cast<std::uint64_t>(method), k, s));
      seeds[method_to_string(method) + "_k" + std::to_string(k)] = std::move(list);
    }
  }
  return seeds;
}

std::vector<std::size_t> holdout_split(std::size_t n, double fraction,
                                       std::uint64_t seed, std::vector<std::size_t>& test) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(hash_seed(seed, 0x5D117ULL));
  rng.shuffle(perm);
  const std::size_t n_train = static_cast<std::size_t>(
      std::min<double>(static_cast<double>(n) - 1.0,
                       std::max(1.0, std::floor(fraction * static_cast<double>(n)))));
  std::vector<std::size_t> train(perm.begin(), perm.begin() + n_train);
  test.assign(perm.begin() + n_train, perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return train;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const ConvergenceError*>(&e)) return 4;
  if (dynamic_cast<const Error*>(&e)) return 3;
  return 1;
}

std::filesystem::path cmd_prep(const RunConfig& cfg, std::ostream& log) {
  validate_for_prep(cfg);
  const auto dir = make_run_dir(cfg, "prep");

  std::vector<TripRecord> trips = load_trips(cfg.trips_csv, cfg.trip_columns);
  const std::size_t loaded = trips.size();
  log << "loaded " << loaded << " trips\n";

  bool assigned = false;
  for (const auto& t : trips)
    if (!t.pickup_is_tract() || !t.dropoff_is_tract()) {
      assigned = true;
      break;
    }
  if (assigned) {
    const TractDistribution dist = TractDistribution::build(trips);
    trips = stratified_assign(std::move(trips), dist, cfg.assign_seed);
    log << "stratified assignment resolved community-level endpoints\n";
  }

  FilterCounts fc;
  std::set<std::string> holidays;
  if (!cfg.holidays.empty()) holidays = load_holiday_list(cfg.holidays);
  trips = filter_trips(trips, cfg.holidays.empty() ? nullptr : &holidays, &fc);

  OdGroups groups = group_by_od(trips);
  const std::size_t outliers = remove_od_outliers(groups);

  const CentroidMap centroids = load_centroids(cfg.centroids_csv);
  ODPairDataset od = aggregate_od(groups, centroids, cfg.min_trips);
  if (od.empty()) log << "warning: no OD pair reached " << cfg.min_trips << " trips\n";

  if (!cfg.features_csv.empty())
    od = join_tract_features(od, cfg.features_csv, cfg.feature_roles);

  od.save_csv(dir / "od.csv");
  {
    std::ofstream s(dir / "od_schema.json");
    s << od.schema().to_json_text() << '\n';
  }

  {
    std::ofstream plog(dir / "prep_log.txt");
    plog << "trips loaded: " << loaded << '\n'
         << "dropped zero fare: " << fc.zero_fare << '\n'
         << "dropped duration < 60 s: " << fc.short_duration << '\n'
         << "dropped distance < 0.25 mi: " << fc.short_distance << '\n'
         << "dropped holiday dates: " << fc.holiday << '\n'
         << "dropped 3-IQR outliers: " << outliers << '\n'
         << "OD pairs emitted (>= " << cfg.min_trips << " trips): " << od.size() << '\n';
  }

  write_manifest(dir, "prep", cfg, {"od.csv", "od_schema.json", "prep_log.txt"},
                 {{"assign_seed", cfg.assign_seed}});
  log << "OD pairs written: " << od.size() << " -> " << (dir / "od.csv").string() << '\n';
  return dir;
}

std::filesystem::path cmd_generate(const RunConfig& cfg, std::ostream& log) {
  validate_for_generate(cfg);
  const auto dir = make_run_dir(cfg, "generate");

  const SyntheticData data = generate_synthetic(cfg.synthetic);
  data.data.save_csv(dir / "od.csv");
  {
    std::ofstream s(dir / "od_schema.json");
    s << data.data.schema().to_json_text() << '\n';
  }

  // Regime assignments and planted coefficients, for auditing.
  {
    std::ofstream t(dir / "truth.csv");
    t << "row,regime\n";
    for (std::size_t i = 0; i < data.regime.size(); ++i)
      t << i << ',' << data.regime[i] << '\n';
  }

  write_manifest(dir, "generate", cfg, {"od.csv", "od_schema.json", "truth.csv"},
                 {{"generator_seed", cfg.synthetic.seed}});
  log << "synthetic OD pairs written: " << data.data.size() << " -> "
      << (dir / "od.csv").string() << '\n';
  return dir;
}

std::filesystem::path cmd_experiment(const RunConfig& cfg, std::ostream& log) {
  validate_for_experiment(cfg);
  const auto dir = make_run_dir(cfg, "experiment");

  const ODPairDataset full = ODPairDataset::load_csv(cfg.od_csv, *cfg.schema);
  if (full.size() < 10) throw DataError("dataset too small for a 90/10 experiment");

  std::vector<std::size_t> test_idx;
  const std::vector<std::size_t> train_idx =
      holdout_split(full.size(), cfg.split_fraction, cfg.split_seed, test_idx);
  const ODPairDataset train = full.subset(train_idx);
  const ODPairDataset test = full.subset(test_idx);
  log << "split: " << train.size() << " train / " << test.size() << " test\n";

  CemExperimentConfig ec = to_experiment_config(cfg);
  ec.threads = resolve_threads(cfg);

  CemModel model;
  CemProvenance prov;
  const ComparisonReport report =
      benchmark_compare(train, test, ec, &full, &model, &prov);

  // Full-dataset routing for the cluster profile tables.
  const std::vector<std::size_t> full_labels = model.route(full);
  const auto& labels = model.labels();
  std::vector<std::size_t> counts(labels.size(), 0);
  std::vector<double> demand_sum(labels.size(), 0.0);
  for (std::size_t i = 0; i < full.size(); ++i) {
    ++counts[full_labels[i]];
    demand_sum[full_labels[i]] += full.row(i).target;
  }
  std::vector<double> demand_mean(labels.size(), 0.0);
  for (std::size_t l = 0; l < labels.size(); ++l)
    if (counts[l]) demand_mean[l] = demand_sum[l] / static_cast<double>(counts[l]);
  double total_mean = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) total_mean += full.row(i).target;
  total_mean /= static_cast<double>(full.size());

  write_cluster_shares(dir / "cluster_shares.csv", labels, counts, demand_mean,
                       full.size(), total_mean);
  write_descriptive_stats(dir / "descriptive_stats.csv", full, full_labels, labels);
  write_cv_table(dir / "cv_table.csv", cfg.families, prov, report);
  write_benchmark_comparison(dir / "benchmark_comparison.csv", report);
  write_cem_vs_benchmark(dir / "cem_vs_benchmark.csv", report);

  std::vector<std::string> hist_cols = cfg.histogram_columns;
  if (hist_cols.empty()) {
    // Median fare/distance/duration when present, else the leading features.
    for (const char* name : {"Fare_median", "Miles_median", "Seconds_median"})
      if (std::find(full.schema().feature_names().begin(),
                    full.schema().feature_names().end(),
                    name) != full.schema().feature_names().end())
        hist_cols.push_back(name);
    if (hist_cols.empty())
      for (std::size_t f = 0; f < std::min<std::size_t>(3, full.schema().feature_count());
           ++f)
        hist_cols.push_back(full.schema().feature_names()[f]);
  }
  for (const auto& name : hist_cols) {
    const auto& fn = full.schema().feature_names();
    if (std::find(fn.begin(), fn.end(), name) == fn.end())
      log << "warning: histogram column \"" << name << "\" not in schema; skipped\n";
  }
  write_histogram_bins(dir / "histogram_bins.csv", full, full_labels, labels, hist_cols,
                       cfg.histogram_bins);

  write_assignments(dir / "assignments.csv", full, full_labels, labels);
  if (cfg.dump_predictions) write_predictions(dir / "predictions.csv", report);
  write_text_report(dir / "report.txt", report, prov);
  model.save(dir / "cem_model.bin");

  std::vector<std::string> outputs{
      "cluster_shares.csv", "descriptive_stats.csv", "cv_table.csv",
      "benchmark_comparison.csv", "cem_vs_benchmark.csv", "histogram_bins.csv",
      "assignments.csv", "report.txt", "cem_model.bin"};
  if (cfg.dump_predictions) outputs.push_back("predictions.csv");
  write_manifest(dir, "experiment", cfg, outputs,
                 {{"split_seed", cfg.split_seed},
                  {"experiment_seed", cfg.seed},
                  {"clustering_run_seeds", clustering_seed_table(cfg)}});

  log << "clustering: " << method_to_string(prov.method) << " k=" << prov.k << '\n';
  for (const auto& w : prov.warnings) log << "warning: " << w << '\n';
  log << "CEM test MAE " << report.cem_mae << " RMSE " << report.cem_rmse
      << " | best benchmark "
      << family_to_string(report.benchmarks[report.best_benchmark].family) << " MAE "
      << report.benchmarks[report.best_benchmark].test_mae << '\n';
  log << "reports -> " << dir.string() << '\n';
  return dir;
}

std::filesystem::path cmd_predict(const RunConfig& cfg,
                                  const std::filesystem::path& model_path,
                                  const std::filesystem::path& input_csv,
                                  std::ostream& log) {
  if (!std::filesystem::exists(model_path))
    throw ConfigError("model file not found: " + model_path.string());
  if (!std::filesystem::exists(input_csv))
    throw ConfigError("input CSV not found: " + input_csv.string());
  const auto dir = make_run_dir(cfg, "predict");

  const CemModel model = CemModel::load(model_path);
  const ODPairDataset data = ODPairDataset::load_csv(input_csv, model.schema());
  const std::vector<double> pred = model.predict(data);
  const std::vector<std::size_t> labels = model.route(data);

  std::ofstream out(dir / "predictions.csv");
  out << "origin,destination,cluster,y_true,y_pred\n";
  for (std::size_t i = 0; i < data.size(); ++i)
    out << csv_escape(data.row(i).origin) << ',' << csv_escape(data.row(i).destination)
        << ',' << csv_escape(model.labels()[labels[i]]) << ','
        << format_double(data.row(i).target) << ',' << format_double(pred[i]) << '\n';

  write_manifest(dir, "predict", cfg, {"predictions.csv"}, nlohmann::json::object());
  log << data.size() << " predictions -> " << (dir / "predictions.csv").string() << '\n';
  return dir;
}

}  // namespace cem
