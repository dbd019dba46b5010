#include "cem/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cem/error.hpp"
#include "cem/rng.hpp"

namespace cem {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Log density of a diagonal Gaussian at x.
double log_gaussian(std::span<const double> x, std::span<const double> mean,
                    std::span<const double> var) {
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - mean[j];
    acc += std::log(var[j]) + d * d / var[j];
  }
  return -0.5 * (acc + static_cast<double>(x.size()) * kLog2Pi);
}

}  // namespace

void GmmModel::component_log_scores(std::span<const double> point,
                                    std::vector<double>& out) const {
  out.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double lw = weights[c] > 0.0 ? std::log(weights[c])
                                       : -std::numeric_limits<double>::infinity();
    out[c] = lw + log_gaussian(point, means.row(c), variances.row(c));
  }
}

std::size_t GmmModel::assign(std::span<const double> point) const {
  std::vector<double> scores;
  component_log_scores(point, scores);
  std::size_t best = 0;
  for (std::size_t c = 1; c < k; ++c)
    if (scores[c] > scores[best]) best = c;
  return best;
}

GmmModel fit_gmm(const Matrix& X, std::size_t k, std::uint64_t seed,
                 std::size_t max_iter, double tol) {
  const std::size_t n = X.rows(), d = X.cols();
  if (k < 1) throw InvalidArgumentError("k must be >= 1");
  if (k > n)
    throw InvalidArgumentError("k = " + std::to_string(k) + " exceeds " +
                               std::to_string(n) + " rows");

  Rng rng(hash_seed(seed, 0x474d4dULL));

  GmmModel model;
  model.k = k;
  model.weights.assign(k, 1.0 / static_cast<double>(k));
  model.means = Matrix(k, d);
  model.variances = Matrix(k, d);

  // k-means++-style mean draws; shared global variances to start.
  std::vector<double> col_mean(d, 0.0), col_var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) col_mean[j] += X(i, j);
  for (std::size_t j = 0; j < d; ++j) col_mean[j] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = X(i, j) - col_mean[j];
      col_var[j] += dev * dev;
    }
  for (std::size_t j = 0; j < d; ++j)
    col_var[j] = std::max(col_var[j] / static_cast<double>(n), GmmModel::kVarianceFloor);

  {
    std::size_t first = static_cast<std::size_t>(rng.below(n));
    for (std::size_t j = 0; j < d; ++j) model.means(0, j) = X(first, j);
    std::vector<double> dist2(n);
    for (std::size_t i = 0; i < n; ++i)
      dist2[i] = squared_distance(X.row(i), model.means.row(0));
    for (std::size_t c = 1; c < k; ++c) {
      double total = 0.0;
      for (double v : dist2) total += v;
      std::size_t pick;
      if (total <= 0.0) {
        pick = static_cast<std::size_t>(rng.below(n));
      } else {
        const double target = rng.uniform() * total;
        double cum = 0.0;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          cum += dist2[i];
          if (target < cum) {
            pick = i;
            break;
          }
        }
      }
      for (std::size_t j = 0; j < d; ++j) model.means(c, j) = X(pick, j);
      for (std::size_t i = 0; i < n; ++i)
        dist2[i] = std::min(dist2[i], squared_distance(X.row(i), model.means.row(c)));
    }
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t j = 0; j < d; ++j) model.variances(c, j) = col_var[j];
  }

  Matrix resp(n, k);
  std::vector<double> scores(k);
  double prev_ll = -std::numeric_limits<double>::infinity();

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // E step with log-sum-exp normalization.
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      model.component_log_scores(X.row(i), scores);
      double mx = scores[0];
      for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, scores[c]);
      double sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) sum += std::exp(scores[c] - mx);
      const double log_norm = mx + std::log(sum);
      ll += log_norm;
      for (std::size_t c = 0; c < k; ++c) resp(i, c) = std::exp(scores[c] - log_norm);
    }
    model.ll_trace.push_back(ll);
    model.log_likelihood = ll;
    model.iterations = iter + 1;

    const bool done = iter > 0 && ll - prev_ll < tol;
    prev_ll = ll;
    if (done) {
      model.converged = true;
      break;
    }

    // M step.
    for (std::size_t c = 0; c < k; ++c) {
      double nk = 0.0;
      for (std::size_t i = 0; i < n; ++i) nk += resp(i, c);
      if (nk <= 1e-12) {
        // Dead component: park it on the point worst explained by the others.
        std::size_t far = 0;
        double far_score = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
          model.component_log_scores(X.row(i), scores);
          double best = -std::numeric_limits<double>::infinity();
          for (std::size_t cc = 0; cc < k; ++cc)
            if (cc != c) best = std::max(best, scores[cc]);
          if (best < far_score) {
            far_score = best;
            far = i;
          }
        }
        for (std::size_t j = 0; j < d; ++j) {
          model.means(c, j) = X(far, j);
          model.variances(c, j) = col_var[j];
        }
        model.weights[c] = 1.0 / static_cast<double>(n);
        continue;
      }
      model.weights[c] = nk / static_cast<double>(n);
      for (std::size_t j = 0; j < d; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += resp(i, c) * X(i, j);
        m /= nk;
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double dev = X(i, j) - m;
          v += resp(i, c) * dev * dev;
        }
        model.means(c, j) = m;
        model.variances(c, j) = std::max(v / nk, GmmModel::kVarianceFloor);
      }
    }
    // Renormalize weights in case a dead component was re-seeded.
    double wsum = 0.0;
    for (double w : model.weights) wsum += w;
    for (double& w : model.weights) w /= wsum;
  }

  model.assignments.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    model.assignments[i] = static_cast<int>(model.assign(X.row(i)));
  return model;
}

}  // namespace cem
