#include "cem/forest.hpp"

#include "cem/error.hpp"
#include "cem/parallel.hpp"
#include "cem/rng.hpp"

namespace cem {

ForestModel::ForestModel(std::vector<CartModel> trees, std::size_t features)
    : trees_(std::move(trees)), features_(features) {}

std::vector<double> ForestModel::predict(const Matrix& X) const {
  check_width(X);
  std::vector<double> out(X.rows(), 0.0);
  for (const auto& tree : trees_) {
    const std::vector<double> p = tree.predict(X);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += p[i];
  }
  const double inv = 1.0 / static_cast<double>(trees_.size());
  for (double& v : out) v *= inv;
  return out;
}

ForestModel fit_random_forest(const Matrix& X, const std::vector<double>& y,
                              const ForestParams& p, std::uint64_t seed) {
  const std::size_t n = X.rows();
  if (n == 0 || y.size() != n)
    throw EmptyInputError("fit_random_forest needs matching non-empty X and y");
  if (p.trees == 0) throw InvalidArgumentError("forest needs at least one tree");

  std::vector<CartModel> trees(p.trees);
  // Each tree owns its seed, so serial and parallel fits agree bit for bit.
  parallel_for(p.trees, p.threads, [&](std::size_t t) {
    const std::uint64_t tree_seed = hash_seed(seed, 0xF0 + t);
    CartParams cp;
    cp.max_depth = p.max_depth;
    cp.min_sample_split = p.min_sample_split;
    cp.features_per_split = p.features_per_split;
    cp.seed = hash_seed(tree_seed, 1);
    if (p.bootstrap) {
      Rng rng(hash_seed(tree_seed, 2));
      std::vector<double> weights(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        weights[static_cast<std::size_t>(rng.below(n))] += 1.0;
      trees[t] = fit_cart_weighted(X, y, weights, cp);
    } else {
      trees[t] = fit_cart(X, y, cp);
    }
  });
  return ForestModel(std::move(trees), X.cols());
}

ForestModel fit_random_forest(const Matrix& X, const std::vector<double>& y,
                              const HyperParams& hp, std::uint64_t seed) {
  ForestParams p;
  p.trees = hp.get_count("trees", 100);
  p.features_per_split = hp.get_size("features", 0);
  p.min_sample_split = hp.get_count("min_sample_split", 2);
  p.max_depth =
      hp.has("depth") ? hp.get_count("depth", 1) : static_cast<std::size_t>(-1);
  p.bootstrap = hp.get_num("bootstrap", 1.0) != 0.0;
  return fit_random_forest(X, y, p, seed);
}

}  // namespace cem
