#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cem/crossval.hpp"
#include "cem/error.hpp"
#include "cem/metrics.hpp"
#include "cem/rng.hpp"

using namespace cem;

TEST_CASE("compute_metrics") {
  SUBCASE("perfect prediction is all zeros") {
    const std::vector<double> y{1, 2, 3};
    const Metrics m = compute_metrics(y, y);
    CHECK(m.mae == 0.0);
    CHECK(m.mse == 0.0);
    CHECK(m.rmse == 0.0);
  }
  SUBCASE("hand-worked triple") {
    const std::vector<double> y{1, 2, 3};
    const std::vector<double> yhat{2, 2, 5};
    const Metrics m = compute_metrics(y, yhat);
    CHECK(m.mae == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.mse == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(m.rmse == doctest::Approx(1.29099444873580562).epsilon(1e-9));
  }
  SUBCASE("single pair") {
    const Metrics m =
        compute_metrics(std::vector<double>{10.0}, std::vector<double>{7.0});
    CHECK(m.mae == 3.0);
    CHECK(m.mse == 9.0);
    CHECK(m.rmse == 3.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{1.0}, std::vector<double>{}),
                    SchemaError);
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{}, std::vector<double>{}),
                    EmptyInputError);
  }
  SUBCASE("mae <= rmse and rmse = sqrt(mse) on random vectors") {
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 1 + rng.below(50);
      std::vector<double> a(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng.uniform(-100, 100);
        b[i] = rng.uniform(-100, 100);
      }
      const Metrics m = compute_metrics(a, b);
      CHECK(m.mae <= m.rmse + 1e-12);
      CHECK(m.rmse == doctest::Approx(std::sqrt(m.mse)).epsilon(1e-12));
    }
  }
}

TEST_CASE("kfold_split") {
  SUBCASE("even split") {
    const auto folds = kfold_split(10, 5, 1);
    REQUIRE(folds.size() == 5);
    for (const auto& f : folds) CHECK(f.size() == 2);
  }
  SUBCASE("remainder spreads one extra across leading folds") {
    const auto folds = kfold_split(11, 5, 1);
    std::multiset<std::size_t> sizes;
    for (const auto& f : folds) sizes.insert(f.size());
    CHECK(sizes == std::multiset<std::size_t>{2, 2, 2, 2, 3});
  }
  SUBCASE("partition law: disjoint union covers the range") {
    const auto folds = kfold_split(23, 4, 9);
    std::set<std::size_t> seen;
    for (const auto& f : folds)
      for (std::size_t i : f) CHECK(seen.insert(i).second);
    CHECK(seen.size() == 23);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 22);
  }
  SUBCASE("same seed reproduces the same folds") {
    CHECK(kfold_split(57, 5, 7) == kfold_split(57, 5, 7));
    CHECK(kfold_split(57, 5, 7) != kfold_split(57, 5, 8));
  }
  SUBCASE("frozen permutation guards cross-platform reproducibility") {
    const auto folds = kfold_split(7, 3, 42);
    CHECK(folds ==
          std::vector<std::vector<std::size_t>>{{1, 4, 5}, {0, 6}, {2, 3}});
  }
  SUBCASE("k > n rejected") {
    CHECK_THROWS_AS(kfold_split(3, 5, 0), InvalidArgumentError);
  }
}

namespace {

struct LinearData {
  Matrix X;
  std::vector<double> y;
};

LinearData linear_data(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  LinearData d;
  d.X = Matrix(n, 2);
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.X(i, 0) = rng.uniform();
    d.X(i, 1) = rng.uniform();
    d.y[i] = 3.0 + 2.0 * d.X(i, 0) - d.X(i, 1) + 0.01 * rng.normal();
  }
  return d;
}

}  // namespace

TEST_CASE("grid_search") {
  const LinearData data = linear_data(5, 120);

  SUBCASE("2x2 grid evaluates exactly four combinations in order") {
    GridSpec grid;
    grid.num["depth"] = {2, 3};
    grid.num["trees"] = {5, 10};
    const GridSearchResult res =
        grid_search(data.X, data.y, Family::gbdt, grid, 4, 3, 1);
    REQUIRE(res.evaluated.size() == 4);
    // Lexicographic: depth first (earlier name), trees fastest.
    CHECK(res.evaluated[0].hp.get_num("depth", 0) == 2);
    CHECK(res.evaluated[0].hp.get_num("trees", 0) == 5);
    CHECK(res.evaluated[1].hp.get_num("depth", 0) == 2);
    CHECK(res.evaluated[1].hp.get_num("trees", 0) == 10);
    CHECK(res.evaluated[2].hp.get_num("depth", 0) == 3);
    CHECK(res.evaluated[3].hp.get_num("trees", 0) == 10);
    for (const auto& cv : res.evaluated) {
      CHECK(cv.fold_mse.size() == 4);
      double mean = 0;
      for (double v : cv.fold_mse) mean += v;
      CHECK(cv.mean_mse == doctest::Approx(mean / 4.0));
    }
  }
  SUBCASE("singleton grid returns that combination") {
    GridSpec grid;
    grid.num["trees"] = {7};
    const GridSearchResult res =
        grid_search(data.X, data.y, Family::gbdt, grid, 5, 3, 1);
    CHECK(res.evaluated.size() == 1);
    CHECK(res.best.hp.get_num("trees", 0) == 7);
  }
  SUBCASE("empty grid runs the family defaults once") {
    const GridSearchResult res =
        grid_search(data.X, data.y, Family::linear, {}, 5, 3, 1);
    CHECK(res.evaluated.size() == 1);
    CHECK(std::isfinite(res.best.mean_mse));
  }
  SUBCASE("invalid combinations score +infinity instead of aborting") {
    GridSpec grid;
    grid.num["C"] = {-5, 10};  // negative C must fail validation
    const GridSearchResult res =
        grid_search(data.X, data.y, Family::svr, grid, 4, 3, 1);
    REQUIRE(res.evaluated.size() == 2);
    CHECK(std::isinf(res.evaluated[0].mean_mse));
    CHECK(res.evaluated[0].fit_errors.size() == 4);
    CHECK(std::isfinite(res.evaluated[1].mean_mse));
    CHECK(res.best.hp.get_num("C", 0) == 10);
  }
  SUBCASE("grid containing the data-generating shape wins") {
    // A depth-1 stump cannot represent the two-feature plane; depth 3 can.
    GridSpec grid;
    grid.num["depth"] = {1, 3};
    grid.num["trees"] = {60};
    grid.num["learning_rate"] = {0.2};
    const GridSearchResult res =
        grid_search(data.X, data.y, Family::gbdt, grid, 5, 3, 1);
    CHECK(res.best.hp.get_num("depth", 0) == 3);
  }
  SUBCASE("combination count is always the product of the grid sizes") {
    Rng rng(303);
    for (int trial = 0; trial < 10; ++trial) {
      GridSpec grid;
      std::size_t expect = 1;
      const std::size_t params = 1 + rng.below(3);
      for (std::size_t p = 0; p < params; ++p) {
        const std::size_t values = 1 + rng.below(4);
        std::vector<double> vs;
        for (std::size_t v = 0; v < values; ++v) vs.push_back(double(v + 1));
        grid.num["p" + std::to_string(p)] = vs;
        expect *= values;
      }
      CHECK(grid.combination_count() == expect);
    }
  }
}

TEST_CASE("select_submodel") {
  const LinearData data = linear_data(9, 150);

  SUBCASE("linear family wins on linear data") {
    std::map<Family, GridSpec> grids;
    grids[Family::cart].num["min_sample_split"] = {40};
    const SubmodelSelection sel = select_submodel(
        data.X, data.y, {Family::cart, Family::linear}, grids, 5, 11, 1);
    CHECK(sel.family == Family::linear);
    REQUIRE(sel.table.size() == 2);
    CHECK(sel.table[1].mean_mse < sel.table[0].mean_mse);
    REQUIRE(sel.model != nullptr);
    CHECK(sel.model->family() == Family::linear);
  }
  SUBCASE("winner's mean CV MSE is the table minimum") {
    std::map<Family, GridSpec> grids;
    grids[Family::gbdt].num["trees"] = {20};
    grids[Family::gbdt].num["depth"] = {3};
    const SubmodelSelection sel =
        select_submodel(data.X, data.y,
                        {Family::gbdt, Family::linear, Family::poisson}, grids, 5, 11, 1);
    double min_mse = sel.table[0].mean_mse;
    for (const auto& cv : sel.table) min_mse = std::min(min_mse, cv.mean_mse);
    CHECK(sel.table[sel.winner_index].mean_mse == min_mse);
  }
  SUBCASE("all-failing families raise a selection error") {
    std::map<Family, GridSpec> grids;
    grids[Family::svr].num["C"] = {-1};  // invalid everywhere
    CHECK_THROWS_AS(select_submodel(data.X, data.y, {Family::svr}, grids, 5, 11, 1),
                    SelectionError);
  }
}
