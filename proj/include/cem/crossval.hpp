#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cem/learners.hpp"
#include "cem/matrix.hpp"

namespace cem {

// Disjoint index sets partitioning 0..n-1 into k folds whose sizes differ by
// at most one: a seeded permutation cut into contiguous blocks. Reproducible
// across runs and platforms.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                  std::uint64_t seed);

struct CvResult {
  Family family = Family::linear;
  HyperParams hp;
  std::vector<double> fold_mse;         // +infinity where the fit failed
  double mean_mse = 0.0;
  std::vector<std::string> fit_errors;  // one message per failed fold
};

// Ordered hyperparameter grid. Combinations are enumerated with parameter
// names sorted lexicographically, earlier names most significant; ties in
// mean MSE keep the earliest combination.
struct GridSpec {
  std::map<std::string, std::vector<double>> num;
  std::map<std::string, std::vector<std::string>> str;

  std::size_t combination_count() const;
  HyperParams combination(std::size_t index) const;
};

struct GridSearchResult {
  CvResult best;
  std::vector<CvResult> evaluated;  // grid order
};

GridSearchResult grid_search(const Matrix& X, const std::vector<double>& y,
                             Family family, const GridSpec& grid, std::size_t folds,
                             std::uint64_t seed, std::size_t threads = 0);

struct SubmodelSelection {
  Family family = Family::linear;
  std::unique_ptr<Regressor> model;     // winner refitted on all rows
  std::vector<CvResult> table;          // best CvResult per family, input order
  std::size_t winner_index = 0;
  std::uint64_t refit_seed = 0;
};

// Grid-searches every family, picks the lowest tuned mean CV MSE and refits
// that winner on the full input. Families whose every combination failed
// score +infinity; if all families fail, throws SelectionError.
SubmodelSelection select_submodel(const Matrix& X, const std::vector<double>& y,
                                  const std::vector<Family>& families,
                                  const std::map<Family, GridSpec>& grids,
                                  std::size_t folds, std::uint64_t seed,
                                  std::size_t threads = 0);

// Seed derivation shared by CV fits and the final refit, so a cluster
// containing exactly the global training rows reproduces the global model
// bit for bit.
std::uint64_t cv_fit_seed(std::uint64_t base, Family family, std::size_t combo,
                          std::size_t fold);
std::uint64_t refit_seed(std::uint64_t base, Family family, std::size_t combo);

}  // namespace cem
