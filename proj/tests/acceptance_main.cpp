// Acceptance suite: one criterion per check, one [PASS]/[FAIL]/[SKIP] line
// each, nonzero exit if anything fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cem/boosting.hpp"
#include "cem/cluster.hpp"
#include "cem/commands.hpp"
#include "cem/config.hpp"
#include "cem/csv.hpp"
#include "cem/dbi.hpp"
#include "cem/ensemble.hpp"
#include "cem/glm.hpp"
#include "cem/gmm.hpp"
#include "cem/kmeans.hpp"
#include "cem/metrics.hpp"
#include "cem/nn.hpp"
#include "cem/prep.hpp"
#include "cem/report.hpp"
#include "cem/rng.hpp"
#include "cem/svr.hpp"
#include "cem/synthetic.hpp"
#include "oracles.hpp"

using namespace cem;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Skip : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

// ---------------------------------------------------------------- criteria

void metrics_exactness() {
  const std::vector<double> y{1, 2, 3}, yhat{2, 2, 5};
  const Metrics m = compute_metrics(y, yhat);
  require(std::abs(m.mae - 1.0) < 1e-9, "MAE should be 1.0, got " + fmt(m.mae));
  require(std::abs(m.mse - 5.0 / 3.0) < 1e-9, "MSE should be 5/3, got " + fmt(m.mse));
  require(std::abs(m.rmse - 1.2909944487358056) < 1e-9,
          "RMSE should be 1.29099, got " + fmt(m.rmse));

  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(64);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform(-1000, 1000);
      b[i] = rng.uniform(-1000, 1000);
    }
    const Metrics r = compute_metrics(a, b);
    require(r.mae <= r.rmse + 1e-12, "mae > rmse on random vector");
  }
}

void dbi_oracle() {
  Matrix X(4, 2);
  X(0, 0) = 0; X(0, 1) = 0;
  X(1, 0) = 0; X(1, 1) = 2;
  X(2, 0) = 10; X(2, 1) = 0;
  X(3, 0) = 10; X(3, 1) = 2;
  const std::vector<int> assign{0, 0, 1, 1};
  const double hand = davies_bouldin(X, assign, 2);
  require(std::abs(hand - 0.2) < 1e-9, "hand-computed DBI should be 0.2, got " + fmt(hand));

  Rng rng(515);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 40 + rng.below(80), d = 2 + rng.below(4);
    const std::size_t k = 2 + rng.below(4);
    Matrix Y(n, d);
    std::vector<int> a(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = int(i % k);
      for (std::size_t j = 0; j < d; ++j)
        Y(i, j) = rng.uniform(-4, 4) + 2.5 * double(a[i]);
    }
    const double got = davies_bouldin(Y, a, k);
    const double want = oracle::davies_bouldin(Y, a, k);
    require(std::abs(got - want) < 1e-9,
            "DBI disagrees with the naive oracle: " + fmt(got) + " vs " + fmt(want));
  }
}

void clustering_monotonicity() {
  Rng rng(616);
  Matrix X(400, 5);
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t j = 0; j < X.cols(); ++j)
      X(i, j) = rng.normal() + double((i * 7) % 3) * 2.5;

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const KMeansModel km = fit_kmeans(X, 4, seed);
    for (std::size_t t = 1; t < km.inertia_trace.size(); ++t)
      require(km.inertia_trace[t] <= km.inertia_trace[t - 1] + 1e-10,
              "Lloyd inertia increased at iteration " + std::to_string(t) +
                  " (seed " + std::to_string(seed) + ")");
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const GmmModel gm = fit_gmm(X, 3, seed);
    for (std::size_t t = 1; t < gm.ll_trace.size(); ++t)
      require(gm.ll_trace[t] >= gm.ll_trace[t - 1] - 1e-8,
              "EM log-likelihood decreased at iteration " + std::to_string(t) +
                  " (seed " + std::to_string(seed) + ")");
  }
}

void kmeans_micro_optimality() {
  Rng rng(4242);
  for (int dataset = 0; dataset < 100; ++dataset) {
    Matrix X(8, 2);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 2; ++j) X(i, j) = rng.uniform(0, 1);
    const double target = oracle::best_two_partition_inertia(X);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 0; seed < 100; ++seed)
      best = std::min(best, fit_kmeans(X, 2, seed, 200, 1e-13).inertia);
    require(std::abs(best - target) <= 1e-9,
            "dataset " + std::to_string(dataset) + ": best-of-seeds inertia " +
                fmt(best) + " vs brute force " + fmt(target));
  }
}

void learner_checks() {
  // NN analytic gradient vs central differences.
  {
    Rng rng(717);
    const std::size_t n = 15, d = 4, h = 5;
    Matrix X(n, d);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) X(i, j) = rng.uniform();
      y[i] = rng.uniform(-1, 1);
    }
    const std::size_t P = nn_param_count(d, h);
    std::vector<double> grad(P), scratch(P);
    for (int point = 0; point < 10; ++point) {
      std::vector<double> params(P);
      for (auto& v : params) v = rng.uniform(-0.7, 0.7);
      nn_loss_and_grad(X, y, params, h, 0.02, grad);
      for (std::size_t p = 0; p < P; ++p) {
        const double eps = 1e-5;
        std::vector<double> plus = params, minus = params;
        plus[p] += eps;
        minus[p] -= eps;
        const double fd = (nn_loss_and_grad(X, y, plus, h, 0.02, scratch) -
                           nn_loss_and_grad(X, y, minus, h, 0.02, scratch)) /
                          (2 * eps);
        const double rel = std::abs(fd - grad[p]) /
                           std::max(1e-8, std::abs(fd) + std::abs(grad[p]));
        require(rel < 1e-4, "NN gradient check failed: relative error " + fmt(rel));
      }
    }
  }

  // Boosting traces over 400 rounds.
  {
    Rng rng(718);
    Matrix X(400, 5);
    std::vector<double> y(400);
    for (std::size_t i = 0; i < 400; ++i) {
      for (std::size_t j = 0; j < 5; ++j) X(i, j) = rng.uniform();
      y[i] = std::sin(5 * X(i, 0)) + X(i, 1) * X(i, 2) + 0.1 * rng.normal();
    }
    BoostParams p;
    p.trees = 400;
    p.learning_rate = 0.1;
    p.max_depth = 3;
    const GbdtModel g = fit_gbdt(X, y, p);
    for (std::size_t t = 1; t < g.train_mse_trace().size(); ++t)
      require(g.train_mse_trace()[t] <= g.train_mse_trace()[t - 1] + 1e-9,
              "GBDT training MSE increased at round " + std::to_string(t));
    p.lambda = 1.0;
    const XgbModel x = fit_xgb(X, y, p);
    for (std::size_t t = 1; t < x.train_mse_trace().size(); ++t)
      require(x.train_mse_trace()[t] <= x.train_mse_trace()[t - 1] + 1e-9,
              "XGB training MSE increased at round " + std::to_string(t));

    // Single-tree equivalence at lambda = gamma = 0.
    BoostParams q;
    q.trees = 1;
    q.learning_rate = 0.4;
    q.max_depth = 4;
    q.lambda = 0.0;
    q.gamma = 0.0;
    const auto gp = fit_gbdt(X, y, q).predict(X);
    const auto xp = fit_xgb(X, y, q).predict(X);
    for (std::size_t i = 0; i < gp.size(); ++i)
      require(std::abs(gp[i] - xp[i]) < 1e-9,
              "XGB(lambda=0) differs from the GBDT tree step by " +
                  fmt(std::abs(gp[i] - xp[i])));
  }

  // Poisson intercept-only equals the log sample mean.
  {
    Rng rng(719);
    const std::size_t n = 5000;
    Matrix X(n, 0);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = double(rng.poisson(5.0));
    double mean = 0;
    for (double v : y) mean += v;
    mean /= double(n);
    const GlmModel m = fit_glm(X, y, Family::poisson);
    require(std::abs(m.coefficients()[0] - std::log(mean)) < 1e-12,
            "Poisson intercept " + fmt(m.coefficients()[0]) + " vs log mean " +
                fmt(std::log(mean)));
  }

  // SVR terminates at KKT residual <= 1e-3.
  {
    Rng rng(720);
    Matrix X(80, 2);
    std::vector<double> y(80);
    for (std::size_t i = 0; i < 80; ++i) {
      X(i, 0) = rng.uniform();
      X(i, 1) = rng.uniform();
      y[i] = 2 * X(i, 0) - X(i, 1) + 0.05 * rng.normal();
    }
    SvrParams lin;
    lin.kernel = SvrKernel::linear;
    lin.C = 100;
    lin.epsilon = 0.05;
    require(fit_svr(X, y, lin).max_kkt_residual() <= 1e-3, "linear SVR KKT residual");
    SvrParams rbf;
    rbf.kernel = SvrKernel::rbf;
    rbf.C = 50;
    rbf.epsilon = 0.05;
    require(fit_svr(X, y, rbf).max_kkt_residual() <= 1e-3, "rbf SVR KKT residual");
  }
}

SyntheticSpec planted_spec(std::uint64_t seed, std::size_t rows) {
  SyntheticSpec spec;
  spec.n_rows = rows;
  spec.n_features = 8;
  spec.n_clusters = 3;
  spec.separation = 4.0;
  spec.opposed_signs = true;
  spec.noise = 1.0;
  spec.seed = seed;
  return spec;
}

void split_dataset(const ODPairDataset& full, std::uint64_t seed, ODPairDataset& train,
                   ODPairDataset& test) {
  std::vector<std::size_t> idx(full.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(hash_seed(seed, 0xACCE));
  rng.shuffle(idx);
  const std::size_t cut = static_cast<std::size_t>(0.9 * double(idx.size()));
  std::vector<std::size_t> tr(idx.begin(), idx.begin() + cut);
  std::vector<std::size_t> te(idx.begin() + cut, idx.end());
  std::sort(tr.begin(), tr.end());
  std::sort(te.begin(), te.end());
  train = full.subset(tr);
  test = full.subset(te);
}

void degenerate_cem_equivalence() {
  const SyntheticData data = generate_synthetic(planted_spec(9090, 1000));
  ODPairDataset train, test;
  split_dataset(data.data, 31, train, test);

  CemExperimentConfig ec;
  ec.clustering.methods = {ClusterMethod::kmeans};
  ec.clustering.k_range = {1};
  ec.clustering.n_seeds = 1;
  ec.families = {Family::gbdt, Family::linear};
  ec.grids[Family::gbdt].num = {{"trees", {60}}, {"learning_rate", {0.15}}, {"depth", {3}}};
  ec.folds = 5;
  ec.seed = 555;
  ec.threads = 2;

  CemModel model;
  const ComparisonReport report = benchmark_compare(train, test, ec, nullptr, &model);
  require(model.labels().size() == 1, "degenerate CEM should have one cluster");
  for (const auto& row : report.rows)
    require(row.y_cem == row.y_bench,
            "CEM and global predictions differ on a row: " + fmt(row.y_cem) + " vs " +
                fmt(row.y_bench));
}

void heterogeneity_headline() {
  std::vector<double> improvements;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const SyntheticData data = generate_synthetic(planted_spec(seed, 20000));
    ODPairDataset train, test;
    split_dataset(data.data, seed, train, test);

    CemExperimentConfig ec;
    ec.clustering.methods = {ClusterMethod::kmeans, ClusterMethod::gmm};
    ec.clustering.k_range = {2, 3, 4};
    ec.clustering.n_seeds = 4;
    ec.clustering.max_iter = 60;
    ec.families = {Family::gbdt, Family::linear};
    ec.grids[Family::gbdt].num = {
        {"trees", {120}}, {"learning_rate", {0.1}}, {"depth", {4}}};
    ec.folds = 5;
    ec.seed = seed * 101;
    ec.threads = 0;  // all cores

    const ComparisonReport report = benchmark_compare(train, test, ec);
    const double global_mae = report.benchmarks[report.best_benchmark].test_mae;
    const double gain = 100.0 * (global_mae - report.cem_mae) / global_mae;
    std::cout << "    seed " << seed << ": global MAE " << global_mae << ", CEM MAE "
              << report.cem_mae << ", improvement " << gain << "%\n";
    improvements.push_back(gain);
  }
  std::sort(improvements.begin(), improvements.end());
  const double median = improvements[improvements.size() / 2];
  require(median >= 10.0,
          "median MAE improvement " + fmt(median) + "% is below the 10% bar");
}

void dbi_model_selection() {
  std::size_t hits = 0;
  const std::size_t reps = 20;
  for (std::uint64_t rep = 0; rep < reps; ++rep) {
    const SyntheticData data = generate_synthetic(planted_spec(1000 + rep, 1500));
    const NormalizationParams norm = NormalizationParams::fit(data.data);
    const auto ccols = data.data.schema().clustering_feature_indices();
    Matrix X(data.data.size(), ccols.size());
    for (std::size_t i = 0; i < data.data.size(); ++i)
      for (std::size_t j = 0; j < ccols.size(); ++j)
        X(i, j) = norm.normalize_value(ccols[j], data.data.row(i).values[ccols[j]]);

    ClusteringOptions opts;
    opts.k_range = {2, 3, 4, 5, 6, 7};
    opts.n_seeds = 10;
    opts.max_iter = 60;
    opts.threads = 0;
    const DataClusteringSelection sel = select_data_clustering(X, opts);
    if (sel.k == 3) ++hits;
  }
  std::cout << "    k = 3 selected in " << hits << "/" << reps << " replications\n";
  require(hits * 100 >= reps * 95,
          "k = 3 chosen only " + std::to_string(hits) + "/" + std::to_string(reps));
}

void real_data_structural() {
  const char* od_path = std::getenv("CEM_CHICAGO_OD_CSV");
  const char* schema_path = std::getenv("CEM_CHICAGO_SCHEMA");
  const char* airport = std::getenv("CEM_AIRPORT_TRACTS");
  if (!od_path || !schema_path || !airport)
    throw Skip("set CEM_CHICAGO_OD_CSV, CEM_CHICAGO_SCHEMA and CEM_AIRPORT_TRACTS to run");

  const FeatureSchema schema = FeatureSchema::from_json_file(schema_path);
  const ODPairDataset data = ODPairDataset::load_csv(od_path, schema);

  auto parse_list = [](const char* csv) {
    std::unordered_set<std::string> out;
    std::stringstream ss(csv);
    std::string t;
    while (std::getline(ss, t, ',')) out.insert(t);
    return out;
  };
  const std::unordered_set<std::string> tracts = parse_list(airport);

  std::vector<KnowledgeRule> rule_list{{"airport", tracts}};
  if (const char* downtown = std::getenv("CEM_DOWNTOWN_TRACTS"))
    rule_list.push_back({"downtown", parse_list(downtown)});
  const KnowledgeRules rules(rule_list);
  const KnowledgePartition part = apply_knowledge_rules(data, rules);

  // The airport partition must be exactly the set of pairs touching the
  // airport tracts.
  for (std::size_t i : part.rule_rows[0]) {
    const auto& r = data.row(i);
    require(tracts.count(r.origin) || tracts.count(r.destination),
            "airport partition contains a non-airport pair");
  }
  for (std::size_t i : part.remainder) {
    const auto& r = data.row(i);
    require(!tracts.count(r.origin) && !tracts.count(r.destination),
            "remainder contains an airport-touching pair");
  }

  // Emit the share table in the published layout.
  std::vector<std::string> labels;
  std::vector<std::size_t> counts;
  std::vector<double> means;
  double total_demand = 0.0;
  for (std::size_t r = 0; r < rule_list.size(); ++r) {
    labels.push_back(rule_list[r].label);
    counts.push_back(part.rule_rows[r].size());
    double m = 0.0;
    for (std::size_t i : part.rule_rows[r]) m += data.row(i).target;
    means.push_back(part.rule_rows[r].empty() ? 0.0 : m / double(part.rule_rows[r].size()));
  }
  labels.push_back("remainder");
  counts.push_back(part.remainder.size());
  double rem_mean = 0.0;
  for (std::size_t i : part.remainder) rem_mean += data.row(i).target;
  means.push_back(part.remainder.empty() ? 0.0 : rem_mean / double(part.remainder.size()));
  for (std::size_t i = 0; i < data.size(); ++i) total_demand += data.row(i).target;

  const fs::path table = fs::temp_directory_path() /
                         ("cem_shares_" + std::to_string(::getpid()) + ".csv");
  write_cluster_shares(table, labels, counts, means, data.size(),
                       total_demand / double(data.size()));
  require(fs::exists(table), "share table was not written");

  std::cout << "    airport pairs: " << part.rule_rows[0].size()
            << " of " << data.size()
            << " (reference: 1981 of 67498, share 2.93%)\n";
  std::cout << "    reference shares: 2.93 / 27.95 / 18.55 / 17.36 / 33.20 %\n";
  std::cout << "    share table: " << table.string() << "\n";
  std::ifstream in(table);
  std::string line;
  while (std::getline(in, line)) std::cout << "      " << line << "\n";
}

// Independent brute-force audit of the prep pipeline on the 200-trip fixture.
void prep_fixture_audit() {
  const fs::path fixtures = CEM_FIXTURE_DIR;
  const fs::path out =
      fs::temp_directory_path() / ("cem_accept_prep_" + std::to_string(::getpid()));
  fs::create_directories(out);

  nlohmann::json doc;
  doc["paths"]["trips_csv"] = (fixtures / "trips_200.csv").string();
  doc["paths"]["centroids_csv"] = (fixtures / "centroids.csv").string();
  doc["paths"]["output_dir"] = out.string();
  std::ostringstream log;
  const fs::path dir = cmd_prep(parse_run_config(doc), log);

  // --- audit: re-derive everything from the raw file with separate code ---
  struct Trip {
    std::string from, to;
    double fare, secs, miles;
  };
  std::vector<Trip> trips;
  {
    std::ifstream in(fixtures / "trips_200.csv");
    std::string line;
    std::getline(in, line);  // header (fixed layout, no quoting in the fixture)
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) f.push_back(cell);
      trips.push_back({f[4], f[5], std::stod(f[1]), std::stod(f[3]), std::stod(f[2])});
    }
  }
  require(trips.size() == 200, "fixture should hold 200 trips");

  std::map<std::string, std::pair<double, double>> centroids;
  {
    std::ifstream in(fixtures / "centroids.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string t, x, y;
      std::getline(ss, t, ',');
      std::getline(ss, x, ',');
      std::getline(ss, y, ',');
      centroids[t] = {std::stod(x), std::stod(y)};
    }
  }

  std::map<std::pair<std::string, std::string>, std::vector<Trip>> groups;
  for (const auto& t : trips) {
    if (t.fare == 0.0 || t.secs < 60.0 || t.miles < 0.25) continue;
    groups[{t.from, t.to}].push_back(t);
  }

  // Fixed-point 3-IQR pruning on distance and duration.
  for (auto& [key, g] : groups) {
    while (g.size() > 2) {
      std::vector<double> miles, secs;
      for (const auto& t : g) {
        miles.push_back(t.miles);
        secs.push_back(t.secs);
      }
      auto fences = [](const std::vector<double>& v) {
        const double q1 = oracle::quartile_type7(v, 0.25);
        const double q3 = oracle::quartile_type7(v, 0.75);
        const double iqr = q3 - q1;
        return std::pair<double, double>{q1 - 3 * iqr, q3 + 3 * iqr};
      };
      const auto [mlo, mhi] = fences(miles);
      const auto [slo, shi] = fences(secs);
      std::vector<Trip> kept;
      for (const auto& t : g)
        if (t.miles >= mlo && t.miles <= mhi && t.secs >= slo && t.secs <= shi)
          kept.push_back(t);
      if (kept.size() == g.size()) break;
      g = std::move(kept);
    }
  }

  struct Expect {
    double count, fare_med, fare_sd, miles_med, miles_sd, secs_med, secs_sd, dist;
  };
  std::map<std::pair<std::string, std::string>, Expect> expected;
  for (const auto& [key, g] : groups) {
    if (g.size() < 50) continue;
    std::vector<double> fare, miles, secs;
    for (const auto& t : g) {
      fare.push_back(t.fare);
      miles.push_back(t.miles);
      secs.push_back(t.secs);
    }
    const auto [ox, oy] = centroids.at(key.first);
    const auto [dx, dy] = centroids.at(key.second);
    expected[key] = {double(g.size()),
                     oracle::median_of(fare),
                     oracle::sd_nminus1(fare),
                     oracle::median_of(miles),
                     oracle::sd_nminus1(miles),
                     oracle::median_of(secs),
                     oracle::sd_nminus1(secs),
                     std::hypot(ox - dx, oy - dy)};
  }

  // --- compare against the pipeline's od.csv ---
  const CsvTable od = read_csv(dir / "od.csv");
  require(od.rows.size() == expected.size(),
          "pipeline emitted " + std::to_string(od.rows.size()) + " OD pairs, audit " +
              std::to_string(expected.size()));
  auto col = [&](const char* name) { return od.column(name); };
  for (const auto& row : od.rows) {
    const auto key = std::make_pair(row[col("origin")], row[col("destination")]);
    require(expected.count(key), "unexpected OD pair in output");
    const Expect& e = expected.at(key);
    auto close = [&](const char* name, double want) {
      const double got = std::stod(row[col(name)]);
      require(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)),
              std::string(name) + ": got " + fmt(got) + ", audit " + fmt(want));
    };
    close("Total_number_trips", e.count);
    close("Fare_median", e.fare_med);
    close("Fare_sd", e.fare_sd);
    close("Miles_median", e.miles_med);
    close("Miles_sd", e.miles_sd);
    close("Seconds_median", e.secs_med);
    close("Seconds_sd", e.secs_sd);
    close("Euclidean_Distance", e.dist);
  }
  fs::remove_all(out);
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void()> run;
  };
  const std::vector<Criterion> criteria{
      {"metrics exactness (hand triple, mae <= rmse on 1000 vectors)", metrics_exactness},
      {"DBI oracle (hand 0.2, naive agreement on 100 datasets)", dbi_oracle},
      {"clustering monotonicity (Lloyd down, EM up, 50 seeds each)",
       clustering_monotonicity},
      {"k-means micro-optimality (100 8-point sets vs brute force)",
       kmeans_micro_optimality},
      {"learner checks (NN gradient, boosting traces, XGB=GBDT, Poisson, SVR KKT)",
       learner_checks},
      {"degenerate CEM equals the global model bit for bit", degenerate_cem_equivalence},
      {"heterogeneity headline (3 planted clusters, median gain >= 10%)",
       heterogeneity_headline},
      {"DBI model selection picks k = 3 (>= 95% of 20 replications)",
       dbi_model_selection},
      {"real-data structural check (conditional)", real_data_structural},
      {"prep fixture audit (200 trips vs independent recomputation)",
       prep_fixture_audit},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run();
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();
      std::cout << "[PASS] " << c.name << " (" << secs << " s)\n";
    } catch (const Skip& s) {
      std::cout << "[SKIP] " << c.name << ": " << s.what() << "\n";
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "[FAIL] " << c.name << ": " << e.what() << "\n";
    }
  }
  if (failures) std::cout << failures << " criterion(s) failed\n";
  return failures ? 1 : 0;
}
