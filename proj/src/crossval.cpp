#include "cem/crossval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cem/error.hpp"
#include "cem/metrics.hpp"
#include "cem/parallel.hpp"
#include "cem/rng.hpp"

namespace cem {

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                  std::uint64_t seed) {
  if (k < 2) throw InvalidArgumentError("kfold needs k >= 2");
  if (k > n)
    throw InvalidArgumentError("k = " + std::to_string(k) + " exceeds n = " +
                               std::to_string(n));
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(hash_seed(seed, 0xF01dULL));
  rng.shuffle(perm);

  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(perm.begin() + pos, perm.begin() + pos + size);
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

std::size_t GridSpec::combination_count() const {
  std::size_t count = 1;
  for (const auto& [k, v] : num) {
    if (v.empty()) throw InvalidArgumentError("empty value list for \"" + k + "\"");
    count *= v.size();
  }
  for (const auto& [k, v] : str) {
    if (v.empty()) throw InvalidArgumentError("empty value list for \"" + k + "\"");
    count *= v.size();
  }
  return count;
}

HyperParams GridSpec::combination(std::size_t index) const {
  // Parameters in lexicographic name order, earliest most significant; the
  // std::map iteration order already provides the sort. Numeric and string
  // parameters are merged into a single ordered list.
  struct Param {
    const std::string* name;
    std::size_t size;
    bool numeric;
  };
  std::vector<Param> params;
  auto nit = num.begin();
  auto sit = str.begin();
  while (nit != num.end() || sit != str.end()) {
    const bool take_num =
        sit == str.end() || (nit != num.end() && nit->first < sit->first);
    if (take_num) {
      params.push_back({&nit->first, nit->second.size(), true});
      ++nit;
    } else {
      params.push_back({&sit->first, sit->second.size(), false});
      ++sit;
    }
  }

  HyperParams hp;
  std::size_t radix = combination_count();
  for (const auto& p : params) {
    radix /= p.size;
    const std::size_t pick = (index / radix) % p.size;
    if (p.numeric)
      hp.set(*p.name, num.at(*p.name)[pick]);
    else
      hp.set(*p.name, str.at(*p.name)[pick]);
  }
  return hp;
}

std::uint64_t cv_fit_seed(std::uint64_t base, Family family, std::size_t combo,
                          std::size_t fold) {
  return hash_seed(hash_seed(base, 0xCF17, static_cast<std::uint64_t>(family)), combo,
                   fold);
}

std::uint64_t refit_seed(std::uint64_t base, Family family, std::size_t combo) {
  return hash_seed(hash_seed(base, 0x5EF1, static_cast<std::uint64_t>(family)), combo);
}

GridSearchResult grid_search(const Matrix& X, const std::vector<double>& y,
                             Family family, const GridSpec& grid, std::size_t folds,
                             std::uint64_t seed, std::size_t threads) {
  const std::size_t n = X.rows();
  if (n == 0) throw EmptyInputError("grid_search on empty data");
  if (folds < 2 || folds > n)
    throw InvalidArgumentError("grid_search needs 2 <= folds <= n");

  const auto fold_idx = kfold_split(n, folds, seed);
  const std::size_t combos = grid.combination_count();

  // Train/validation matrices per fold, shared across combinations.
  struct FoldData {
    Matrix x_train, x_val;
    std::vector<double> y_train, y_val;
  };
  std::vector<FoldData> fold_data(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows;
    train_rows.reserve(n - fold_idx[f].size());
    std::vector<bool> in_val(n, false);
    for (std::size_t i : fold_idx[f]) in_val[i] = true;
    for (std::size_t i = 0; i < n; ++i)
      if (!in_val[i]) train_rows.push_back(i);
    fold_data[f].x_train = X.take_rows(train_rows);
    fold_data[f].x_val = X.take_rows(fold_idx[f]);
    fold_data[f].y_train.reserve(train_rows.size());
    for (std::size_t i : train_rows) fold_data[f].y_train.push_back(y[i]);
    for (std::size_t i : fold_idx[f]) fold_data[f].y_val.push_back(y[i]);
  }

  GridSearchResult result;
  result.evaluated.resize(combos);
  for (std::size_t c = 0; c < combos; ++c) {
    result.evaluated[c].family = family;
    result.evaluated[c].hp = grid.combination(c);
    result.evaluated[c].fold_mse.assign(folds, 0.0);
  }

  parallel_for(combos * folds, threads, [&](std::size_t item) {
    const std::size_t c = item / folds;
    const std::size_t f = item % folds;
    CvResult& cv = result.evaluated[c];
    const FoldData& fd = fold_data[f];
    try {
      const auto model = fit_regressor(family, fd.x_train, fd.y_train, cv.hp,
                                       cv_fit_seed(seed, family, c, f));
      const auto pred = model->predict(fd.x_val);
      cv.fold_mse[f] = compute_metrics(fd.y_val, pred).mse;
    } catch (const std::exception&) {
      // Scored +infinity; the message is synthesized afterwards so parallel
      // items never touch shared strings.
      cv.fold_mse[f] = std::numeric_limits<double>::infinity();
    }
  });

  for (std::size_t c = 0; c < combos; ++c) {
    CvResult& cv = result.evaluated[c];
    double sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      sum += cv.fold_mse[f];
      if (std::isinf(cv.fold_mse[f]))
        cv.fit_errors.push_back("fold " + std::to_string(f) + ": fit failed");
    }
    cv.mean_mse = sum / static_cast<double>(folds);
  }

  std::size_t best = 0;
  for (std::size_t c = 1; c < combos; ++c)
    if (result.evaluated[c].mean_mse < result.evaluated[best].mean_mse) best = c;
  result.best = result.evaluated[best];
  return result;
}

SubmodelSelection select_submodel(const Matrix& X, const std::vector<double>& y,
                                  const std::vector<Family>& families,
                                  const std::map<Family, GridSpec>& grids,
                                  std::size_t folds, std::uint64_t seed,
                                  std::size_t threads) {
  if (families.empty()) throw InvalidArgumentError("select_submodel needs families");

  SubmodelSelection sel;
  std::vector<std::size_t> best_combo(families.size(), 0);
  for (std::size_t fi = 0; fi < families.size(); ++fi) {
    const Family family = families[fi];
    auto git = grids.find(family);
    const GridSpec grid = git == grids.end() ? GridSpec{} : git->second;
    GridSearchResult res = grid_search(X, y, family, grid, folds, seed, threads);
    // Recover the winning combination index for seed derivation.
    for (std::size_t c = 0; c < res.evaluated.size(); ++c)
      if (res.evaluated[c].mean_mse == res.best.mean_mse) {
        best_combo[fi] = c;
        break;
      }
    sel.table.push_back(std::move(res.best));
  }

  std::size_t winner = 0;
  bool any_finite = false;
  for (std::size_t fi = 0; fi < families.size(); ++fi) {
    if (std::isfinite(sel.table[fi].mean_mse)) any_finite = true;
    if (sel.table[fi].mean_mse < sel.table[winner].mean_mse) winner = fi;
  }
  if (!any_finite)
    throw SelectionError("every learner family failed during cross-validation");

  sel.winner_index = winner;
  sel.family = families[winner];
  sel.refit_seed = refit_seed(seed, sel.family, best_combo[winner]);
  sel.model = fit_regressor(sel.family, X, y, sel.table[winner].hp, sel.refit_seed);
  return sel;
}

}  // namespace cem
