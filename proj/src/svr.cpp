#include "cem/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "cem/error.hpp"

namespace cem {

namespace {

class KernelCache {
 public:
  KernelCache(const Matrix& X, SvrKernel kernel, double sigma2)
      : X_(X), kernel_(kernel), inv_two_sigma2_(0.5 / sigma2) {}

  double eval(std::span<const double> a, std::span<const double> b) const {
    if (kernel_ == SvrKernel::linear) {
      double dot = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j) dot += a[j] * b[j];
      return dot;
    }
    return std::exp(-squared_distance(a, b) * inv_two_sigma2_);
  }

  // Column of kernel values K(x_i, x_col) for all i. protect shields another
  // live column from eviction.
  const std::vector<double>& column(std::size_t col, std::size_t protect) {
    auto it = cache_.find(col);
    if (it != cache_.end()) return it->second;
    if (cache_.size() >= kMaxColumns) {
      auto victim = cache_.begin();
      if (victim->first == protect) ++victim;
      cache_.erase(victim);
    }
    std::vector<double> vals(X_.rows());
    for (std::size_t i = 0; i < X_.rows(); ++i) vals[i] = eval(X_.row(i), X_.row(col));
    return cache_.emplace(col, std::move(vals)).first->second;
  }

 private:
  static constexpr std::size_t kMaxColumns = 512;
  const Matrix& X_;
  SvrKernel kernel_;
  double inv_two_sigma2_;
  std::unordered_map<std::size_t, std::vector<double>> cache_;
};

}  // namespace

SvrModel::SvrModel(Matrix support_vectors, std::vector<double> beta, double bias,
                   SvrParams params, std::size_t features, double max_kkt_residual)
    : support_vectors_(std::move(support_vectors)),
      beta_(std::move(beta)),
      bias_(bias),
      params_(params),
      features_(features),
      max_kkt_residual_(max_kkt_residual) {}

std::vector<double> SvrModel::predict(const Matrix& X) const {
  check_width(X);
  const double inv_two_sigma2 = params_.sigma2 > 0.0 ? 0.5 / params_.sigma2 : 0.0;
  std::vector<double> out(X.rows(), bias_);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto row = X.row(i);
    double acc = 0.0;
    for (std::size_t s = 0; s < beta_.size(); ++s) {
      const auto sv = support_vectors_.row(s);
      double kv;
      if (params_.kernel == SvrKernel::linear) {
        kv = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) kv += row[j] * sv[j];
      } else {
        kv = std::exp(-squared_distance(row, sv) * inv_two_sigma2);
      }
      acc += beta_[s] * kv;
    }
    out[i] += acc;
  }
  return out;
}

SvrModel fit_svr(const Matrix& X, const std::vector<double>& y, const SvrParams& p_in) {
  const std::size_t n = X.rows();
  if (n == 0 || y.size() != n)
    throw EmptyInputError("fit_svr needs matching non-empty X and y");
  if (p_in.C <= 0.0) throw InvalidArgumentError("SVR C must be positive");
  if (p_in.epsilon < 0.0) throw InvalidArgumentError("SVR epsilon must be nonnegative");

  SvrParams p = p_in;
  if (p.sigma2 <= 0.0) p.sigma2 = static_cast<double>(X.cols());
  const std::size_t max_passes = p.max_passes > 0 ? p.max_passes
                                                  : std::max<std::size_t>(200000, 2000 * n);

  KernelCache cache(X, p.kernel, p.sigma2);

  // 2n dual variables: t < n holds alpha_t (sign +1), t >= n holds
  // alpha*_{t-n} (sign -1). F_t = -sign_t * gradient_t; optimality means
  // max F over the "up" set minus min F over the "low" set is below tol.
  std::vector<double> alpha(2 * n, 0.0);
  std::vector<double> F(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    F[i] = y[i] - p.epsilon;
    F[n + i] = y[i] + p.epsilon;
  }
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = cache.eval(X.row(i), X.row(i));

  auto in_up = [&](std::size_t t) {
    return t < n ? alpha[t] < p.C : alpha[t] > 0.0;
  };
  auto in_low = [&](std::size_t t) {
    return t < n ? alpha[t] > 0.0 : alpha[t] < p.C;
  };

  double bias = 0.0;
  double residual = 0.0;

  for (std::size_t pass = 0;; ++pass) {
    std::size_t i_up = 2 * n, i_low = 2 * n;
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < 2 * n; ++t) {
      if (in_up(t) && F[t] > m_up) {
        m_up = F[t];
        i_up = t;
      }
      if (in_low(t) && F[t] < m_low) {
        m_low = F[t];
        i_low = t;
      }
    }
    if (i_up >= 2 * n || i_low >= 2 * n) {  // one side empty; cannot move
      bias = i_low < 2 * n ? m_low : (i_up < 2 * n ? m_up : 0.0);
      residual = 0.0;
      break;
    }
    bias = 0.5 * (m_up + m_low);
    residual = std::max(0.0, 0.5 * (m_up - m_low));
    if (m_up - m_low < p.tol || pass >= max_passes) break;

    const std::size_t si = i_up < n ? i_up : i_up - n;
    const std::size_t sj = i_low < n ? i_low : i_low - n;
    const double sign_i = i_up < n ? 1.0 : -1.0;
    const double sign_j = i_low < n ? 1.0 : -1.0;

    const std::vector<double>& Ki = cache.column(si, sj);
    const std::vector<double>& Kj = cache.column(sj, si);

    double q = diag[si] + diag[sj] - 2.0 * Ki[sj];
    if (q < 1e-12) q = 1e-12;
    double step = (m_up - m_low) / q;

    // Box limits along the feasible direction.
    double hi = std::numeric_limits<double>::infinity();
    hi = std::min(hi, sign_i > 0 ? p.C - alpha[i_up] : alpha[i_up]);
    hi = std::min(hi, sign_j > 0 ? alpha[i_low] : p.C - alpha[i_low]);
    step = std::min(step, hi);

    alpha[i_up] += sign_i * step;
    alpha[i_low] -= sign_j * step;

    for (std::size_t t = 0; t < 2 * n; ++t) {
      const std::size_t st = t < n ? t : t - n;
      F[t] -= step * (Ki[st] - Kj[st]);
    }
  }

  // beta_i = alpha_i - alpha*_i; keep only support vectors.
  std::vector<std::size_t> sv_idx;
  std::vector<double> beta;
  for (std::size_t i = 0; i < n; ++i) {
    const double b = alpha[i] - alpha[n + i];
    if (b != 0.0) {
      sv_idx.push_back(i);
      beta.push_back(b);
    }
  }
  return SvrModel(X.take_rows(sv_idx), std::move(beta), bias, p, X.cols(), residual);
}

SvrModel fit_svr(const Matrix& X, const std::vector<double>& y, const HyperParams& hp) {
  SvrParams p;
  p.C = hp.get_num("C", 1.0);
  if (p.C <= 0.0) throw InvalidArgumentError("SVR C must be positive");
  p.epsilon = hp.get_nonneg("epsilon", 0.1);
  const std::string kernel = hp.get_str("kernel", "rbf");
  if (kernel == "rbf")
    p.kernel = SvrKernel::rbf;
  else if (kernel == "linear")
    p.kernel = SvrKernel::linear;
  else
    throw InvalidArgumentError("SVR kernel must be rbf or linear, got \"" + kernel + "\"");
  p.sigma2 = hp.get_num("sigma2", 0.0);
  p.tol = hp.get_rate("tol", 1e-3);
  return fit_svr(X, y, p);
}

}  // namespace cem
