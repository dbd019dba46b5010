#include <doctest.h>

#include <cmath>
#include <limits>

#include "cem/cluster.hpp"
#include "cem/dbi.hpp"
#include "cem/error.hpp"
#include "cem/gmm.hpp"
#include "cem/kmeans.hpp"
#include "cem/rng.hpp"
#include "oracles.hpp"

using namespace cem;

namespace {

Matrix blob_data(std::uint64_t seed, const std::vector<std::vector<double>>& centers,
                 std::size_t per_cluster, double sd = 1.0) {
  Rng rng(seed);
  const std::size_t d = centers[0].size();
  Matrix X(per_cluster * centers.size(), d);
  std::size_t r = 0;
  for (const auto& c : centers)
    for (std::size_t i = 0; i < per_cluster; ++i, ++r)
      for (std::size_t j = 0; j < d; ++j) X(r, j) = c[j] + sd * rng.normal();
  return X;
}

ODPairDataset routed_dataset() {
  // Two clustering features; Fare_median is impedance and must be excluded.
  std::vector<Column> cols{{"o", ColumnRole::key},
                           {"d", ColumnRole::key},
                           {"y", ColumnRole::dependent},
                           {"Fare_median", ColumnRole::travel_impedance},
                           {"a", ColumnRole::socio_economic},
                           {"b", ColumnRole::built_environment}};
  std::vector<ODRow> rows;
  auto add = [&](const std::string& o, const std::string& dst, double fare, double a,
                 double b) {
    ODRow r;
    r.origin = o;
    r.destination = dst;
    r.target = 1;
    r.values = {fare, a, b};
    rows.push_back(r);
  };
  add("t1", "OHARE", 30, 0.0, 0.0);
  add("LOOP1", "MDW", 20, 1.0, 1.0);   // airport wins by rule order
  add("LOOP1", "t2", 10, 2.0, 2.0);    // downtown
  add("t3", "t4", 5, 0.1, 0.1);        // remainder
  add("t5", "t6", 5, 9.9, 9.9);        // remainder
  return ODPairDataset(FeatureSchema::from_columns(std::move(cols)), std::move(rows));
}

KnowledgeRules airport_downtown_rules() {
  return KnowledgeRules(
      {{"airport", {"OHARE", "MDW"}}, {"downtown", {"LOOP1", "LOOP2"}}});
}

}  // namespace

TEST_CASE("apply_knowledge_rules partitions with rule precedence") {
  const ODPairDataset data = routed_dataset();
  const KnowledgePartition part = apply_knowledge_rules(data, airport_downtown_rules());
  REQUIRE(part.rule_rows.size() == 2);
  CHECK(part.rule_rows[0] == std::vector<std::size_t>{0, 1});  // airport, incl. row 1
  CHECK(part.rule_rows[1] == std::vector<std::size_t>{2});
  CHECK(part.remainder == std::vector<std::size_t>{3, 4});

  // Disjoint cover.
  std::size_t total = part.remainder.size();
  for (const auto& rows : part.rule_rows) total += rows.size();
  CHECK(total == data.size());

  SUBCASE("empty tract set rejected") {
    std::vector<KnowledgeRule> bad{{"airport", {}}};
    CHECK_THROWS_AS(KnowledgeRules(std::move(bad)), InvalidArgumentError);
  }
  SUBCASE("duplicate labels rejected") {
    CHECK_THROWS_AS(KnowledgeRules({{"x", {"a"}}, {"x", {"b"}}}), InvalidArgumentError);
  }
}

TEST_CASE("fit_kmeans basics") {
  SUBCASE("two obvious pairs, k = 2, inertia 1.0") {
    Matrix X(4, 2);
    X(0, 0) = 0; X(0, 1) = 0;
    X(1, 0) = 0; X(1, 1) = 1;
    X(2, 0) = 10; X(2, 1) = 0;
    X(3, 0) = 10; X(3, 1) = 1;
    const KMeansModel m = fit_kmeans(X, 2, 3, 100, 1e-12);
    CHECK(m.inertia == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m.assignments[0] == m.assignments[1]);
    CHECK(m.assignments[2] == m.assignments[3]);
    CHECK(m.assignments[0] != m.assignments[2]);
  }
  SUBCASE("k = 1 centroid is the mean") {
    Matrix X(3, 1);
    X(0, 0) = 1; X(1, 0) = 2; X(2, 0) = 6;
    const KMeansModel m = fit_kmeans(X, 1, 0);
    CHECK(m.centroids(0, 0) == doctest::Approx(3.0));
  }
  SUBCASE("k = n gives zero inertia") {
    Matrix X(5, 2);
    Rng rng(8);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 2; ++j) X(i, j) = rng.uniform();
    const KMeansModel m = fit_kmeans(X, 5, 1);
    CHECK(m.inertia == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("k > n rejected") {
    Matrix X(2, 1);
    CHECK_THROWS_AS(fit_kmeans(X, 3, 0), InvalidArgumentError);
  }
  SUBCASE("inertia trace never increases") {
    const Matrix X = blob_data(21, {{0, 0}, {4, 4}, {-4, 4}}, 60);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const KMeansModel m = fit_kmeans(X, 3, seed);
      for (std::size_t t = 1; t < m.inertia_trace.size(); ++t)
        CHECK(m.inertia_trace[t] <= m.inertia_trace[t - 1] + 1e-10);
    }
  }
}

TEST_CASE("fit_gmm basics") {
  SUBCASE("two separated blobs recovered within 0.2") {
    const Matrix X = blob_data(5, {{0, 0, 0}, {6, 6, 6}}, 500);
    const GmmModel m = fit_gmm(X, 2, 4);
    const std::size_t low = m.means(0, 0) < m.means(1, 0) ? 0 : 1;
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(m.means(low, j) - 0.0) < 0.2);
      CHECK(std::abs(m.means(1 - low, j) - 6.0) < 0.2);
    }
  }
  SUBCASE("k = 1 is the analytic optimum (MLE variances)") {
    Matrix X(4, 2);
    Rng rng(9);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 2; ++j) X(i, j) = rng.uniform(0.0, 10.0);
    const GmmModel m = fit_gmm(X, 1, 0);
    for (std::size_t j = 0; j < 2; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < 4; ++i) mean += X(i, j);
      mean /= 4.0;
      double var = 0.0;
      for (std::size_t i = 0; i < 4; ++i) var += (X(i, j) - mean) * (X(i, j) - mean);
      var /= 4.0;  // n denominator
      CHECK(m.means(0, j) == doctest::Approx(mean).epsilon(1e-9));
      CHECK(m.variances(0, j) == doctest::Approx(var).epsilon(1e-6));
    }
  }
  SUBCASE("log-likelihood trace never decreases") {
    const Matrix X = blob_data(31, {{0, 0}, {5, 0}}, 100);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const GmmModel m = fit_gmm(X, 2, seed);
      for (std::size_t t = 1; t < m.ll_trace.size(); ++t)
        CHECK(m.ll_trace[t] >= m.ll_trace[t - 1] - 1e-8);
    }
  }
  SUBCASE("variances stay above the floor") {
    Matrix X(6, 1);
    for (std::size_t i = 0; i < 6; ++i) X(i, 0) = 1.0;  // degenerate data
    const GmmModel m = fit_gmm(X, 2, 0);
    for (std::size_t c = 0; c < 2; ++c)
      CHECK(m.variances(c, 0) >= GmmModel::kVarianceFloor);
  }
}

TEST_CASE("davies_bouldin") {
  SUBCASE("hand-computed 0.2") {
    Matrix X(4, 2);
    X(0, 0) = 0; X(0, 1) = 0;
    X(1, 0) = 0; X(1, 1) = 2;
    X(2, 0) = 10; X(2, 1) = 0;
    X(3, 0) = 10; X(3, 1) = 2;
    const std::vector<int> assign{0, 0, 1, 1};
    CHECK(davies_bouldin(X, assign, 2) == doctest::Approx(0.2).epsilon(1e-9));
  }
  SUBCASE("shrinks toward zero as separation grows") {
    double prev = std::numeric_limits<double>::infinity();
    for (double sep : {10.0, 100.0, 1000.0}) {
      Matrix X(4, 1);
      X(0, 0) = 0; X(1, 0) = 1; X(2, 0) = sep; X(3, 0) = sep + 1;
      const std::vector<int> assign{0, 0, 1, 1};
      const double dbi = davies_bouldin(X, assign, 2);
      CHECK(dbi < prev);
      prev = dbi;
    }
    CHECK(prev < 0.01);
  }
  SUBCASE("identical centroids return the +infinity sentinel") {
    Matrix X(4, 1);
    X(0, 0) = 0; X(1, 0) = 2; X(2, 0) = 0; X(3, 0) = 2;
    const std::vector<int> assign{0, 0, 1, 1};
    CHECK(std::isinf(davies_bouldin(X, assign, 2)));
  }
  SUBCASE("empty cluster rejected") {
    Matrix X(2, 1);
    const std::vector<int> assign{0, 0};
    CHECK_THROWS_AS(davies_bouldin(X, assign, 2), InvalidArgumentError);
  }
  SUBCASE("matches the naive oracle on random data") {
    Rng rng(1234);
    for (int trial = 0; trial < 25; ++trial) {
      const std::size_t n = 30 + rng.below(50), d = 2 + rng.below(3);
      const std::size_t k = 2 + rng.below(3);
      Matrix X(n, d);
      std::vector<int> assign(n);
      for (std::size_t i = 0; i < n; ++i) {
        assign[i] = int(i % k);  // guarantees non-empty clusters
        for (std::size_t j = 0; j < d; ++j)
          X(i, j) = rng.uniform(-5, 5) + 3.0 * double(assign[i]);
      }
      const double got = davies_bouldin(X, assign, k);
      const double want = oracle::davies_bouldin(X, assign, k);
      CHECK(got == doctest::Approx(want).epsilon(1e-9));
    }
  }
}

TEST_CASE("select_data_clustering") {
  SUBCASE("planted three blobs select k = 3") {
    const Matrix X = blob_data(42, {{0, 0, 0, 0}, {5, 5, 0, 0}, {0, 5, 5, 0}}, 120);
    ClusteringOptions opts;
    opts.k_range = {2, 3, 4, 5};
    opts.n_seeds = 10;
    opts.threads = 2;
    const DataClusteringSelection sel = select_data_clustering(X, opts);
    CHECK(sel.k == 3);
    CHECK(sel.table.size() == 8);  // 2 methods x 4 ks
    CHECK(std::isfinite(sel.mean_dbi));
    CHECK(sel.best_dbi <= sel.mean_dbi + 1e-12);
  }
  SUBCASE("single candidate selected trivially") {
    const Matrix X = blob_data(7, {{0, 0}, {6, 6}}, 40);
    ClusteringOptions opts;
    opts.methods = {ClusterMethod::kmeans};
    opts.k_range = {2};
    opts.n_seeds = 1;
    const DataClusteringSelection sel = select_data_clustering(X, opts);
    CHECK(sel.method == ClusterMethod::kmeans);
    CHECK(sel.k == 2);
    CHECK(std::holds_alternative<KMeansModel>(sel.model));
  }
  SUBCASE("k = 1 allowed as a lone candidate") {
    const Matrix X = blob_data(7, {{0, 0}}, 30);
    ClusteringOptions opts;
    opts.methods = {ClusterMethod::kmeans};
    opts.k_range = {1};
    opts.n_seeds = 1;
    const DataClusteringSelection sel = select_data_clustering(X, opts);
    CHECK(sel.k == 1);
  }
}

TEST_CASE("route") {
  const ODPairDataset data = routed_dataset();
  const NormalizationParams norm = NormalizationParams::fit(data);
  const std::vector<std::size_t> ccols = data.schema().clustering_feature_indices();

  // Hand-built 2-centroid model in the normalized clustering space.
  KMeansModel km;
  km.k = 2;
  km.centroids = Matrix(2, 2);
  km.centroids(0, 0) = 0.0;
  km.centroids(0, 1) = 0.0;
  km.centroids(1, 0) = 1.0;
  km.centroids(1, 1) = 1.0;
  const ClusterModel model(airport_downtown_rules(), km, norm, ccols,
                           {"data_1", "data_2"});

  REQUIRE(model.labels() ==
          std::vector<std::string>{"airport", "downtown", "data_1", "data_2"});

  SUBCASE("rules take precedence regardless of features") {
    CHECK(model.route(data.row(0)) == 0);
    CHECK(model.route(data.row(1)) == 0);  // airport before downtown
    CHECK(model.route(data.row(2)) == 1);
  }
  SUBCASE("rows route to the nearest centroid") {
    CHECK(model.route(data.row(3)) == 2);
    CHECK(model.route(data.row(4)) == 3);
  }
  SUBCASE("row equal to a centroid routes there") {
    ODRow r = data.row(3);
    r.values[ccols[0]] = norm.denormalize_value(ccols[0], 1.0);
    r.values[ccols[1]] = norm.denormalize_value(ccols[1], 1.0);
    CHECK(model.route(r) == 3);
  }
  SUBCASE("equidistant rows break ties to the lower index") {
    ODRow r = data.row(3);
    r.values[ccols[0]] = norm.denormalize_value(ccols[0], 0.5);
    r.values[ccols[1]] = norm.denormalize_value(ccols[1], 0.5);
    CHECK(model.route(r) == 2);
  }
  SUBCASE("routing is deterministic") {
    const auto a = model.route_all(data);
    const auto b = model.route_all(data);
    CHECK(a == b);
  }
  SUBCASE("partition property: rules plus data clusters cover the input") {
    const auto labels = model.route_all(data);
    const KnowledgePartition part = apply_knowledge_rules(data, model.rules());
    for (std::size_t r = 0; r < part.rule_rows.size(); ++r)
      for (std::size_t i : part.rule_rows[r]) CHECK(labels[i] == r);
    for (std::size_t i : part.remainder) CHECK(labels[i] >= part.rule_rows.size());
  }
}

TEST_CASE("kmeans micro-optimality against brute force") {
  SUBCASE("best-of-100-seeds always optimal on arbitrary point sets") {
    Rng rng(777);
    std::size_t hits = 0;
    const int datasets = 20;
    for (int t = 0; t < datasets; ++t) {
      Matrix X(8, 2);
      for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 2; ++j) X(i, j) = rng.uniform(0.0, 1.0);
      const double target = oracle::best_two_partition_inertia(X);
      double best = std::numeric_limits<double>::infinity();
      for (std::uint64_t seed = 0; seed < 100; ++seed)
        best = std::min(best, fit_kmeans(X, 2, seed, 200, 1e-13).inertia);
      if (std::abs(best - target) <= 1e-9) ++hits;
    }
    CHECK(hits == datasets);
  }
  SUBCASE("at least 95 of 100 seeds optimal when the two clusters are clear") {
    // Per-seed optimality needs unambiguous structure; overlapping micro
    // sets have several near-tied Lloyd-stable partitions and no seeding
    // scheme lands in the best basin 95% of the time there.
    Rng rng(778);
    for (int t = 0; t < 20; ++t) {
      Matrix X(8, 2);
      for (std::size_t i = 0; i < 8; ++i) {
        X(i, 0) = (i < 4 ? 0.0 : 10.0) + rng.normal();
        X(i, 1) = rng.normal();
      }
      const double target = oracle::best_two_partition_inertia(X);
      int hit = 0;
      for (std::uint64_t seed = 0; seed < 100; ++seed)
        if (std::abs(fit_kmeans(X, 2, seed, 200, 1e-13).inertia - target) <= 1e-9)
          ++hit;
      CHECK(hit >= 95);
    }
  }
}
