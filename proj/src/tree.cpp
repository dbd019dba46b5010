#include "cem/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cem/error.hpp"
#include "cem/rng.hpp"

namespace cem {

namespace {

constexpr double kMinGain = 1e-12;

struct NodeStats {
  double weight = 0.0;
  double sum = 0.0;
  double sumsq = 0.0;

  double mean() const { return sum / weight; }
  double sse() const { return std::max(0.0, sumsq - sum * sum / weight); }
};

struct BestSplit {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

struct LevelLeaf {
  int node = -1;
  NodeStats stats;
  bool splittable = false;
  std::vector<std::uint8_t> feature_mask;  // empty = all features
  BestSplit best;
};

}  // namespace

CartModel::CartModel(std::vector<TreeNode> nodes, std::size_t features)
    : nodes_(std::move(nodes)), features_(features) {}

std::size_t CartModel::leaf_for(std::span<const double> row) const {
  std::size_t node = 0;
  while (nodes_[node].feature >= 0) {
    const TreeNode& nd = nodes_[node];
    node = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold
               ? static_cast<std::size_t>(nd.left)
               : static_cast<std::size_t>(nd.right);
  }
  return node;
}

std::vector<double> CartModel::predict(const Matrix& X) const {
  check_width(X);
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = nodes_[leaf_for(X.row(i))].value;
  return out;
}

std::size_t CartModel::leaf_count() const {
  std::size_t n = 0;
  for (const auto& nd : nodes_)
    if (nd.feature < 0) ++n;
  return n;
}

namespace {

// Weakest-link cost-complexity pruning: collapse the internal node with the
// smallest g(t) = (R(t) - R(T_t)) / (leaves(T_t) - 1) while g(t) <= alpha,
// with R normalized by the root weight.
void ccp_prune(std::vector<TreeNode>& nodes, double alpha) {
  if (alpha <= 0.0 || nodes.empty()) return;
  const double total_weight = nodes[0].weight;

  while (true) {
    // Subtree leaf SSE and leaf counts, computed children-first (children
    // always have larger indices than their parents).
    const std::size_t n = nodes.size();
    std::vector<double> subtree_sse(n, 0.0);
    std::vector<std::size_t> subtree_leaves(n, 0);
    for (std::size_t idx = n; idx-- > 0;) {
      const TreeNode& nd = nodes[idx];
      if (nd.feature < 0) {
        subtree_sse[idx] = nd.sse;
        subtree_leaves[idx] = 1;
      } else {
        subtree_sse[idx] = subtree_sse[nd.left] + subtree_sse[nd.right];
        subtree_leaves[idx] = subtree_leaves[nd.left] + subtree_leaves[nd.right];
      }
    }

    double min_g = std::numeric_limits<double>::infinity();
    std::size_t weakest = n;
    for (std::size_t idx = 0; idx < n; ++idx) {
      const TreeNode& nd = nodes[idx];
      if (nd.feature < 0) continue;
      const double g = (nd.sse - subtree_sse[idx]) /
                       (total_weight * static_cast<double>(subtree_leaves[idx] - 1));
      if (g < min_g) {
        min_g = g;
        weakest = idx;
      }
    }
    if (weakest == n || min_g > alpha) break;

    // Collapse to a leaf; orphaned descendants stay in the vector unused.
    nodes[weakest].feature = -1;
    nodes[weakest].left = -1;
    nodes[weakest].right = -1;
  }
}

// Drops nodes orphaned by pruning; keeps children after their parents.
std::vector<TreeNode> compact_nodes(const std::vector<TreeNode>& nodes) {
  std::vector<int> remap(nodes.size(), -1);
  std::vector<TreeNode> out;
  std::vector<std::size_t> queue{0};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t idx = queue[head];
    remap[idx] = static_cast<int>(out.size());
    out.push_back(nodes[idx]);
    if (nodes[idx].feature >= 0) {
      queue.push_back(static_cast<std::size_t>(nodes[idx].left));
      queue.push_back(static_cast<std::size_t>(nodes[idx].right));
    }
  }
  for (auto& nd : out)
    if (nd.feature >= 0) {
      nd.left = remap[nd.left];
      nd.right = remap[nd.right];
    }
  return out;
}

CartModel build_cart(const Matrix& X, const std::vector<double>& y,
                     const std::vector<double>* weights, const CartParams& p) {
  const std::size_t n_all = X.rows(), d = X.cols();
  if (n_all == 0 || y.size() != n_all)
    throw EmptyInputError("fit_cart needs matching non-empty X and y");

  std::vector<std::size_t> active;
  active.reserve(n_all);
  for (std::size_t i = 0; i < n_all; ++i)
    if (!weights || (*weights)[i] > 0.0) active.push_back(i);
  if (active.empty()) throw EmptyInputError("fit_cart: all sample weights are zero");

  auto w_of = [&](std::size_t i) { return weights ? (*weights)[i] : 1.0; };

  // Global per-feature sort orders over active samples (stable -> repeatable).
  std::vector<std::vector<std::size_t>> owned_order;
  const std::vector<std::vector<std::size_t>>* order_ptr = nullptr;
  if (!weights && p.presorted && p.presorted->size() == d) {
    order_ptr = p.presorted;
  } else {
    owned_order.resize(d);
    for (std::size_t f = 0; f < d; ++f) {
      owned_order[f] = active;
      std::stable_sort(owned_order[f].begin(), owned_order[f].end(),
                       [&](std::size_t a, std::size_t b) { return X(a, f) < X(b, f); });
    }
    order_ptr = &owned_order;
  }
  const std::vector<std::vector<std::size_t>>& order = *order_ptr;

  std::vector<TreeNode> nodes;
  std::vector<int> leaf_of(n_all, 0);

  NodeStats root;
  for (std::size_t i : active) {
    const double w = w_of(i);
    root.weight += w;
    root.sum += w * y[i];
    root.sumsq += w * y[i] * y[i];
  }
  TreeNode root_node;
  root_node.value = root.mean();
  root_node.weight = root.weight;
  root_node.sse = root.sse();
  nodes.push_back(root_node);

  const bool subsample = p.features_per_split > 0 && p.features_per_split < d;
  const double min_split_weight = static_cast<double>(p.min_sample_split);

  std::vector<LevelLeaf> level;
  {
    LevelLeaf first;
    first.node = 0;
    first.stats = root;
    level.push_back(std::move(first));
  }

  struct Acc {
    double w = 0.0;
    double sum = 0.0;
    double last = 0.0;
    bool seen = false;
  };

  for (std::size_t depth = 0; depth < p.max_depth && !level.empty(); ++depth) {
    std::vector<int> slot_of_node(nodes.size(), -1);
    bool any_splittable = false;
    for (std::size_t s = 0; s < level.size(); ++s) {
      LevelLeaf& leaf = level[s];
      leaf.splittable =
          leaf.stats.weight >= min_split_weight && leaf.stats.sse() > kMinGain;
      if (!leaf.splittable) continue;
      any_splittable = true;
      slot_of_node[leaf.node] = static_cast<int>(s);
      if (subsample) {
        Rng rng(hash_seed(p.seed, 0xCA57, depth, static_cast<std::uint64_t>(leaf.node)));
        leaf.feature_mask.assign(d, 0);
        for (std::size_t f : rng.sample_without_replacement(d, p.features_per_split))
          leaf.feature_mask[f] = 1;
      }
    }
    if (!any_splittable) break;

    std::vector<Acc> accs(level.size());
    for (std::size_t f = 0; f < d; ++f) {
      for (auto& a : accs) a = Acc{};
      for (std::size_t i : order[f]) {
        const int slot = slot_of_node[leaf_of[i]];
        if (slot < 0) continue;
        LevelLeaf& leaf = level[static_cast<std::size_t>(slot)];
        if (subsample && !leaf.feature_mask[f]) continue;
        Acc& acc = accs[static_cast<std::size_t>(slot)];
        const double v = X(i, f);
        if (acc.seen && v > acc.last) {
          const double thr = acc.last + (v - acc.last) / 2.0;
          if (thr < v) {  // midpoint may round onto v; then it cannot separate
            const double wl = acc.w, sl = acc.sum;
            const double wr = leaf.stats.weight - wl, sr = leaf.stats.sum - sl;
            if (wl >= 1.0 && wr >= 1.0) {
              const double gain = sl * sl / wl + sr * sr / wr -
                                  leaf.stats.sum * leaf.stats.sum / leaf.stats.weight;
              if (gain > leaf.best.gain + kMinGain ||
                  (leaf.best.feature < 0 && gain > kMinGain)) {
                leaf.best.gain = gain;
                leaf.best.feature = static_cast<int>(f);
                leaf.best.threshold = thr;
              }
            }
          }
        }
        const double w = w_of(i);
        acc.w += w;
        acc.sum += w * y[i];
        acc.last = v;
        acc.seen = true;
      }
    }

    // Materialize the accepted splits and re-bucket the samples.
    std::vector<LevelLeaf> next;
    for (LevelLeaf& leaf : level) {
      if (!leaf.splittable || leaf.best.feature < 0) continue;
      TreeNode& nd = nodes[static_cast<std::size_t>(leaf.node)];
      nd.feature = leaf.best.feature;
      nd.threshold = leaf.best.threshold;
      nd.left = static_cast<int>(nodes.size());
      nd.right = static_cast<int>(nodes.size() + 1);
      nodes.emplace_back();
      nodes.emplace_back();
      LevelLeaf l, r;
      l.node = nd.left;
      r.node = nd.right;
      next.push_back(std::move(l));
      next.push_back(std::move(r));
    }
    if (next.empty()) break;

    std::vector<int> next_slot(nodes.size(), -1);
    for (std::size_t s = 0; s < next.size(); ++s) next_slot[next[s].node] = static_cast<int>(s);

    for (std::size_t i : active) {
      TreeNode& nd = nodes[static_cast<std::size_t>(leaf_of[i])];
      if (nd.feature < 0) continue;
      const int child = X(i, static_cast<std::size_t>(nd.feature)) <= nd.threshold
                            ? nd.left
                            : nd.right;
      leaf_of[i] = child;
      NodeStats& st = next[static_cast<std::size_t>(next_slot[child])].stats;
      const double w = w_of(i);
      st.weight += w;
      st.sum += w * y[i];
      st.sumsq += w * y[i] * y[i];
    }
    for (LevelLeaf& leaf : next) {
      TreeNode& nd = nodes[static_cast<std::size_t>(leaf.node)];
      nd.value = leaf.stats.mean();
      nd.weight = leaf.stats.weight;
      nd.sse = leaf.stats.sse();
    }
    level = std::move(next);
  }

  if (p.ccp_alpha > 0.0) {
    ccp_prune(nodes, p.ccp_alpha);
    nodes = compact_nodes(nodes);
  }
  return CartModel(std::move(nodes), d);
}

}  // namespace

CartModel fit_cart(const Matrix& X, const std::vector<double>& y, const CartParams& p) {
  return build_cart(X, y, nullptr, p);
}

CartModel fit_cart_weighted(const Matrix& X, const std::vector<double>& y,
                            const std::vector<double>& weights, const CartParams& p) {
  if (weights.size() != X.rows())
    throw InvalidArgumentError("weight vector length does not match row count");
  return build_cart(X, y, &weights, p);
}

CartParams cart_params_from(const HyperParams& hp, std::uint64_t seed) {
  CartParams p;
  p.max_depth = hp.has("depth") ? hp.get_count("depth", 1) : static_cast<std::size_t>(-1);
  p.min_sample_split = hp.get_count("min_sample_split", 2);
  p.features_per_split = hp.get_size("features", 0);
  p.ccp_alpha = hp.get_nonneg("ccp", 0.0);
  p.seed = seed;
  return p;
}

}  // namespace cem
