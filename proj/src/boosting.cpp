#include "cem/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cem/error.hpp"
#include "cem/rng.hpp"

namespace cem {

namespace {

constexpr double kTieMargin = 1e-12;

double mse_of(const std::vector<double>& pred, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = pred[i] - y[i];
    s += d * d;
  }
  return s / static_cast<double>(y.size());
}

std::vector<std::vector<std::size_t>> presort(const Matrix& X) {
  std::vector<std::vector<std::size_t>> order(X.cols());
  for (std::size_t f = 0; f < X.cols(); ++f) {
    order[f].resize(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) order[f][i] = i;
    std::stable_sort(order[f].begin(), order[f].end(),
                     [&](std::size_t a, std::size_t b) { return X(a, f) < X(b, f); });
  }
  return order;
}

double gbdt_mean(const std::vector<double>& y) {
  double s = 0.0;
  for (double v : y) s += v;
  return s / static_cast<double>(y.size());
}

}  // namespace

GbdtModel::GbdtModel(double init, double learning_rate, std::vector<CartModel> trees,
                     std::size_t features, std::vector<double> train_mse)
    : init_(init),
      learning_rate_(learning_rate),
      trees_(std::move(trees)),
      features_(features),
      train_mse_(std::move(train_mse)) {}

std::vector<double> GbdtModel::predict(const Matrix& X) const {
  check_width(X);
  std::vector<double> out(X.rows(), init_);
  for (const auto& tree : trees_) {
    for (std::size_t i = 0; i < X.rows(); ++i)
      out[i] += learning_rate_ * tree.nodes()[tree.leaf_for(X.row(i))].value;
  }
  return out;
}

GbdtModel fit_gbdt(const Matrix& X, const std::vector<double>& y, const BoostParams& p) {
  const std::size_t n = X.rows();
  if (n == 0 || y.size() != n)
    throw EmptyInputError("fit_gbdt needs matching non-empty X and y");
  if (p.learning_rate <= 0.0)
    throw InvalidArgumentError("learning_rate must be positive");

  const auto order = presort(X);

  const double init = gbdt_mean(y);
  std::vector<double> pred(n, init);
  std::vector<double> residual(n);
  std::vector<double> trace;
  trace.reserve(p.trees + 1);
  trace.push_back(mse_of(pred, y));

  std::vector<CartModel> trees;
  trees.reserve(p.trees);
  for (std::size_t m = 0; m < p.trees; ++m) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - pred[i];
    CartParams cp;
    cp.max_depth = p.max_depth;
    cp.min_sample_split = p.min_sample_split;
    cp.features_per_split = p.features_per_split;
    cp.seed = hash_seed(p.seed, 0x9BD7, m);
    cp.presorted = &order;
    CartModel tree = fit_cart(X, residual, cp);
    for (std::size_t i = 0; i < n; ++i)
      pred[i] += p.learning_rate * tree.nodes()[tree.leaf_for(X.row(i))].value;
    trace.push_back(mse_of(pred, y));
    trees.push_back(std::move(tree));
  }
  return GbdtModel(init, p.learning_rate, std::move(trees), X.cols(), std::move(trace));
}

double XgbTree::output(std::span<const double> row) const {
  std::size_t node = 0;
  while (nodes[node].feature >= 0) {
    const XgbNode& nd = nodes[node];
    node = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold
               ? static_cast<std::size_t>(nd.left)
               : static_cast<std::size_t>(nd.right);
  }
  return nodes[node].weight;
}

XgbModel::XgbModel(double init, double learning_rate, std::vector<XgbTree> trees,
                   std::size_t features, std::vector<double> train_mse)
    : init_(init),
      learning_rate_(learning_rate),
      trees_(std::move(trees)),
      features_(features),
      train_mse_(std::move(train_mse)) {}

std::vector<double> XgbModel::predict(const Matrix& X) const {
  check_width(X);
  std::vector<double> out(X.rows(), init_);
  for (const auto& tree : trees_)
    for (std::size_t i = 0; i < X.rows(); ++i)
      out[i] += learning_rate_ * tree.output(X.row(i));
  return out;
}

namespace {

// One second-order tree on gradients g and unit hessians, built level-wise
// over shared sort orders.
XgbTree build_xgb_tree(const Matrix& X, const std::vector<double>& g,
                       const std::vector<std::vector<std::size_t>>& order,
                       const BoostParams& p, std::uint64_t tree_seed) {
  const std::size_t n = X.rows(), d = X.cols();
  const double lambda = p.lambda, gamma = p.gamma;

  struct LeafState {
    int node = -1;
    double G = 0.0, H = 0.0;
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::uint8_t> mask;
  };

  auto leaf_weight = [&](double G, double H) { return -G / (H + lambda); };
  auto score = [&](double G, double H) { return G * G / (H + lambda); };

  XgbTree tree;
  std::vector<int> leaf_of(n, 0);

  double G0 = 0.0;
  for (double v : g) G0 += v;
  const double H0 = static_cast<double>(n);

  XgbNode root;
  root.weight = leaf_weight(G0, H0);
  tree.nodes.push_back(root);

  std::vector<LeafState> level(1);
  level[0].node = 0;
  level[0].G = G0;
  level[0].H = H0;

  const bool subsample = p.features_per_split > 0 && p.features_per_split < d;

  for (std::size_t depth = 0; depth < p.max_depth && !level.empty(); ++depth) {
    std::vector<int> slot_of_node(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < level.size(); ++s) {
      LeafState& leaf = level[s];
      if (leaf.H < static_cast<double>(p.min_sample_split)) continue;
      slot_of_node[leaf.node] = static_cast<int>(s);
      if (subsample) {
        Rng rng(hash_seed(tree_seed, 0x9B, depth, static_cast<std::uint64_t>(leaf.node)));
        leaf.mask.assign(d, 0);
        for (std::size_t f : rng.sample_without_replacement(d, p.features_per_split))
          leaf.mask[f] = 1;
      }
    }

    struct Acc {
      double G = 0.0, H = 0.0, last = 0.0;
      bool seen = false;
    };
    std::vector<Acc> accs(level.size());

    for (std::size_t f = 0; f < d; ++f) {
      for (auto& a : accs) a = Acc{};
      for (std::size_t i : order[f]) {
        const int slot = slot_of_node[leaf_of[i]];
        if (slot < 0) continue;
        LeafState& leaf = level[static_cast<std::size_t>(slot)];
        if (subsample && !leaf.mask[f]) continue;
        Acc& acc = accs[static_cast<std::size_t>(slot)];
        const double v = X(i, f);
        if (acc.seen && v > acc.last) {
          const double thr = acc.last + (v - acc.last) / 2.0;
          if (thr < v && acc.H >= 1.0 && leaf.H - acc.H >= 1.0) {
            const double gain = 0.5 * (score(acc.G, acc.H) +
                                       score(leaf.G - acc.G, leaf.H - acc.H) -
                                       score(leaf.G, leaf.H)) -
                                gamma;
            if (gain > leaf.best_gain + kTieMargin && gain > 0.0) {
              leaf.best_gain = gain;
              leaf.best_feature = static_cast<int>(f);
              leaf.best_threshold = thr;
            }
          }
        }
        acc.G += g[i];
        acc.H += 1.0;
        acc.last = v;
        acc.seen = true;
      }
    }

    std::vector<LeafState> next;
    for (LeafState& leaf : level) {
      if (leaf.best_feature < 0) continue;  // gain <= 0 rejected
      XgbNode& nd = tree.nodes[static_cast<std::size_t>(leaf.node)];
      nd.feature = leaf.best_feature;
      nd.threshold = leaf.best_threshold;
      nd.left = static_cast<int>(tree.nodes.size());
      nd.right = static_cast<int>(tree.nodes.size() + 1);
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      LeafState l, r;
      l.node = nd.left;
      r.node = nd.right;
      next.push_back(std::move(l));
      next.push_back(std::move(r));
    }
    if (next.empty()) break;

    std::vector<int> next_slot(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < next.size(); ++s)
      next_slot[next[s].node] = static_cast<int>(s);

    for (std::size_t i = 0; i < n; ++i) {
      XgbNode& nd = tree.nodes[static_cast<std::size_t>(leaf_of[i])];
      if (nd.feature < 0) continue;
      const int child = X(i, static_cast<std::size_t>(nd.feature)) <= nd.threshold
                            ? nd.left
                            : nd.right;
      leaf_of[i] = child;
      LeafState& st = next[static_cast<std::size_t>(next_slot[child])];
      st.G += g[i];
      st.H += 1.0;
    }
    for (LeafState& leaf : next) {
      tree.nodes[static_cast<std::size_t>(leaf.node)].weight =
          leaf_weight(leaf.G, leaf.H);
    }
    level = std::move(next);
  }
  return tree;
}

}  // namespace

XgbModel fit_xgb(const Matrix& X, const std::vector<double>& y, const BoostParams& p) {
  const std::size_t n = X.rows();
  if (n == 0 || y.size() != n)
    throw EmptyInputError("fit_xgb needs matching non-empty X and y");
  if (p.learning_rate <= 0.0)
    throw InvalidArgumentError("learning_rate must be positive");
  if (p.lambda < 0.0 || p.gamma < 0.0)
    throw InvalidArgumentError("lambda and gamma must be nonnegative");

  const auto order = presort(X);

  const double init = gbdt_mean(y);
  std::vector<double> pred(n, init);
  std::vector<double> grad(n);
  std::vector<double> trace;
  trace.reserve(p.trees + 1);
  trace.push_back(mse_of(pred, y));

  std::vector<XgbTree> trees;
  trees.reserve(p.trees);
  for (std::size_t m = 0; m < p.trees; ++m) {
    for (std::size_t i = 0; i < n; ++i) grad[i] = pred[i] - y[i];
    XgbTree tree = build_xgb_tree(X, grad, order, p, hash_seed(p.seed, 0xE9B, m));
    for (std::size_t i = 0; i < n; ++i)
      pred[i] += p.learning_rate * tree.output(X.row(i));
    trace.push_back(mse_of(pred, y));
    trees.push_back(std::move(tree));
  }
  return XgbModel(init, p.learning_rate, std::move(trees), X.cols(), std::move(trace));
}

BoostParams boost_params_from(const HyperParams& hp, std::uint64_t seed) {
  BoostParams p;
  p.trees = hp.get_size("trees", 100);
  p.learning_rate = hp.get_rate("learning_rate", 0.1);
  p.max_depth = hp.get_count("depth", 3);
  p.features_per_split = hp.get_size("features", 0);
  p.min_sample_split = hp.get_count("min_sample_split", 2);
  p.lambda = hp.get_nonneg("lambda", 1.0);
  p.gamma = hp.get_nonneg("gamma", 0.0);
  p.seed = seed;
  return p;
}

GbdtModel fit_gbdt(const Matrix& X, const std::vector<double>& y, const HyperParams& hp,
                   std::uint64_t seed) {
  BoostParams p = boost_params_from(hp, seed);
  p.lambda = 0.0;
  p.gamma = 0.0;
  return fit_gbdt(X, y, p);
}

XgbModel fit_xgb(const Matrix& X, const std::vector<double>& y, const HyperParams& hp,
                 std::uint64_t seed) {
  return fit_xgb(X, y, boost_params_from(hp, seed));
}

}  // namespace cem
