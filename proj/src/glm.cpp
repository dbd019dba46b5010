#include "cem/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cem/error.hpp"

namespace cem {

namespace {

// In-place Cholesky; returns false when the matrix is not positive definite.
bool cholesky(std::vector<double>& A, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double diag = A[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= A[j * n + k] * A[j * n + k];
    if (diag <= 0.0 || !std::isfinite(diag)) return false;
    const double root = std::sqrt(diag);
    A[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = A[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= A[i * n + k] * A[j * n + k];
      A[i * n + j] = v / root;
    }
  }
  return true;
}

std::vector<double> cholesky_solve(const std::vector<double>& L,
                                   const std::vector<double>& b, std::size_t n) {
  std::vector<double> x(b);
  for (std::size_t i = 0; i < n; ++i) {
    double v = x[i];
    for (std::size_t k = 0; k < i; ++k) v -= L[i * n + k] * x[k];
    x[i] = v / L[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double v = x[i];
    for (std::size_t k = i + 1; k < n; ++k) v -= L[k * n + i] * x[k];
    x[i] = v / L[i * n + i];
  }
  return x;
}

constexpr double kEtaClamp = 30.0;  // exp(30) ~ 1e13, ample for count data

}  // namespace

std::vector<double> solve_spd(std::vector<double> A, std::vector<double> b,
                              std::size_t dim) {
  std::vector<double> work = A;
  double jitter = 1e-8;
  for (int attempt = 0; attempt < 4; ++attempt) {
    if (cholesky(work, dim)) return cholesky_solve(work, b, dim);
    work = A;
    for (std::size_t j = 0; j < dim; ++j) work[j * dim + j] += jitter;
    jitter *= 100.0;
  }
  throw ConvergenceError("normal equations are singular even with ridge jitter");
}

GlmModel::GlmModel(Family family, std::vector<double> coefficients, std::size_t features)
    : family_(family), coef_(std::move(coefficients)), features_(features) {}

double GlmModel::linear_predictor(std::span<const double> row) const {
  double eta = coef_[0];
  for (std::size_t j = 0; j < row.size(); ++j) eta += coef_[j + 1] * row[j];
  return eta;
}

std::vector<double> GlmModel::predict(const Matrix& X) const {
  check_width(X);
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const double eta = linear_predictor(X.row(i));
    switch (family_) {
      case Family::linear:
        out[i] = eta;
        break;
      case Family::log_linear:
        out[i] = std::exp(std::min(eta, kEtaClamp)) - 1.0;
        break;
      default:  // poisson
        out[i] = std::exp(std::min(eta, kEtaClamp));
        break;
    }
  }
  return out;
}

namespace {

std::vector<double> ols(const Matrix& X, const std::vector<double>& y) {
  const std::size_t n = X.rows(), d = X.cols() + 1;
  std::vector<double> xtx(d * d, 0.0), xty(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = X.row(i);
    // Implicit leading 1 for the intercept.
    xtx[0] += 1.0;
    xty[0] += y[i];
    for (std::size_t a = 0; a < row.size(); ++a) {
      xtx[(a + 1) * d] += row[a];
      xtx[a + 1] += row[a];
      xty[a + 1] += row[a] * y[i];
      for (std::size_t b = 0; b <= a; ++b) {
        xtx[(a + 1) * d + (b + 1)] += row[a] * row[b];
      }
    }
  }
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b) xtx[a * d + b] = xtx[b * d + a];
  return solve_spd(std::move(xtx), std::move(xty), d);
}

double poisson_deviance(const std::vector<double>& y, const std::vector<double>& mu) {
  double dev = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > 0.0) dev += y[i] * std::log(y[i] / mu[i]) - (y[i] - mu[i]);
    else dev += mu[i];
  }
  return 2.0 * dev;
}

std::vector<double> poisson_irls(const Matrix& X, const std::vector<double>& y) {
  const std::size_t n = X.rows(), d = X.cols() + 1;
  for (double v : y)
    if (v < 0.0) throw DataError("poisson targets must be nonnegative");

  // Start from the intercept-only estimate.
  double ymean = 0.0;
  for (double v : y) ymean += v;
  ymean /= static_cast<double>(n);
  std::vector<double> beta(d, 0.0);
  beta[0] = std::log(std::max(ymean, 1e-8));

  std::vector<double> eta(n), mu(n);
  double prev_dev = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double e = beta[0];
      const auto row = X.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) e += beta[j + 1] * row[j];
      eta[i] = std::clamp(e, -kEtaClamp, kEtaClamp);
      mu[i] = std::exp(eta[i]);
    }
    const double dev = poisson_deviance(y, mu);

    // Weighted least squares on the working response z = eta + (y - mu)/mu
    // with weights mu.
    std::vector<double> xtwx(d * d, 0.0), xtwz(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::max(mu[i], 1e-10);
      const double z = eta[i] + (y[i] - mu[i]) / w;
      const auto row = X.row(i);
      xtwx[0] += w;
      xtwz[0] += w * z;
      for (std::size_t a = 0; a < row.size(); ++a) {
        xtwx[(a + 1) * d] += w * row[a];
        xtwz[a + 1] += w * row[a] * z;
        for (std::size_t b = 0; b <= a; ++b)
          xtwx[(a + 1) * d + (b + 1)] += w * row[a] * row[b];
      }
    }
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a + 1; b < d; ++b) xtwx[a * d + b] = xtwx[b * d + a];
    std::vector<double> next = solve_spd(std::move(xtwx), std::move(xtwz), d);

    double max_step = 0.0;
    for (std::size_t j = 0; j < d; ++j)
      max_step = std::max(max_step, std::abs(next[j] - beta[j]));
    beta = std::move(next);

    // Deviance tolerance plus coefficient stability, so the fixed point is
    // resolved well past the deviance plateau.
    if (std::abs(prev_dev - dev) < 1e-8 && max_step < 1e-10) return beta;
    prev_dev = dev;
  }

  for (std::size_t i = 0; i < n; ++i) {
    double e = beta[0];
    const auto row = X.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) e += beta[j + 1] * row[j];
    mu[i] = std::exp(std::clamp(e, -kEtaClamp, kEtaClamp));
  }
  throw ConvergenceError("poisson IRLS did not converge; final deviance " +
                         std::to_string(poisson_deviance(y, mu)));
}

}  // namespace

GlmModel fit_glm(const Matrix& X, const std::vector<double>& y, Family family) {
  const std::size_t n = X.rows();
  if (n == 0 || y.size() != n)
    throw EmptyInputError("fit_glm needs matching non-empty X and y");

  switch (family) {
    case Family::linear:
      return GlmModel(family, ols(X, y), X.cols());
    case Family::log_linear: {
      std::vector<double> logy(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (y[i] < 0.0) throw DataError("log_linear targets must be nonnegative");
        logy[i] = std::log1p(y[i]);
      }
      return GlmModel(family, ols(X, logy), X.cols());
    }
    case Family::poisson:
      return GlmModel(family, poisson_irls(X, y), X.cols());
    default:
      throw InvalidArgumentError("fit_glm supports linear, log_linear, poisson");
  }
}

}  // namespace cem
