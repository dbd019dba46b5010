#include "cem/nn.hpp"

#include <algorithm>
#include <cmath>

#include "cem/error.hpp"
#include "cem/rng.hpp"
#include "cem/stats.hpp"

namespace cem {

std::size_t nn_param_count(std::size_t features, std::size_t neurons) {
  return neurons * features + neurons + neurons + 1;
}

namespace {

// Parameter layout: w1 (neurons x features, row-major), b1, w2, b2.
struct ParamView {
  const double* w1;
  const double* b1;
  const double* w2;
  double b2;
  std::size_t neurons, features;

  ParamView(std::span<const double> p, std::size_t neurons, std::size_t features)
      : w1(p.data()),
        b1(p.data() + neurons * features),
        w2(p.data() + neurons * features + neurons),
        b2(p[neurons * features + 2 * neurons]),
        neurons(neurons),
        features(features) {}

  double forward(std::span<const double> x, std::vector<double>& hidden) const {
    hidden.resize(neurons);
    double out = b2;
    for (std::size_t h = 0; h < neurons; ++h) {
      double z = b1[h];
      const double* w = w1 + h * features;
      for (std::size_t j = 0; j < features; ++j) z += w[j] * x[j];
      const double a = std::tanh(z);
      hidden[h] = a;
      out += w2[h] * a;
    }
    return out;
  }
};

}  // namespace

double nn_loss_and_grad(const Matrix& X, const std::vector<double>& y,
                        std::span<const double> params, std::size_t neurons,
                        double weight_decay, std::vector<double>& grad) {
  const std::size_t n = X.rows(), d = X.cols();
  const ParamView view(params, neurons, d);
  grad.assign(params.size(), 0.0);
  double* g_w1 = grad.data();
  double* g_b1 = grad.data() + neurons * d;
  double* g_w2 = grad.data() + neurons * d + neurons;
  double& g_b2 = grad[neurons * d + 2 * neurons];

  std::vector<double> hidden;
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = X.row(i);
    const double out = view.forward(x, hidden);
    const double err = out - y[i];
    loss += err * err * inv_n;
    const double dout = 2.0 * err * inv_n;
    g_b2 += dout;
    for (std::size_t h = 0; h < neurons; ++h) {
      const double a = hidden[h];
      g_w2[h] += dout * a;
      const double dz = dout * view.w2[h] * (1.0 - a * a);
      g_b1[h] += dz;
      double* gw = g_w1 + h * d;
      for (std::size_t j = 0; j < d; ++j) gw[j] += dz * x[j];
    }
  }

  // L2 penalty on weights only.
  for (std::size_t h = 0; h < neurons; ++h) {
    const double* w = view.w1 + h * d;
    double* gw = g_w1 + h * d;
    for (std::size_t j = 0; j < d; ++j) {
      loss += 0.5 * weight_decay * w[j] * w[j];
      gw[j] += weight_decay * w[j];
    }
    loss += 0.5 * weight_decay * view.w2[h] * view.w2[h];
    g_w2[h] += weight_decay * view.w2[h];
  }
  return loss;
}

NnModel::NnModel(Matrix w1, std::vector<double> b1, std::vector<double> w2, double b2,
                 double y_mean, double y_scale, NnParams params)
    : w1_(std::move(w1)),
      b1_(std::move(b1)),
      w2_(std::move(w2)),
      b2_(b2),
      y_mean_(y_mean),
      y_scale_(y_scale),
      params_(params) {}

double NnModel::raw_output(std::span<const double> row) const {
  double out = b2_;
  for (std::size_t h = 0; h < w2_.size(); ++h) {
    double z = b1_[h];
    const auto w = w1_.row(h);
    for (std::size_t j = 0; j < row.size(); ++j) z += w[j] * row[j];
    out += w2_[h] * std::tanh(z);
  }
  return out;
}

std::vector<double> NnModel::predict(const Matrix& X) const {
  check_width(X);
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i)
    out[i] = y_mean_ + y_scale_ * raw_output(X.row(i));
  return out;
}

NnModel fit_nn(const Matrix& X, const std::vector<double>& y, const NnParams& p,
               std::uint64_t seed) {
  const std::size_t n = X.rows(), d = X.cols();
  if (n == 0 || y.size() != n)
    throw EmptyInputError("fit_nn needs matching non-empty X and y");
  if (p.learning_rate <= 0.0)
    throw InvalidArgumentError("nn learning_rate must be positive");

  const double y_mean = mean(y);
  double y_scale = sample_sd(y);
  if (y_scale <= 0.0) y_scale = 1.0;
  std::vector<double> yz(n);
  for (std::size_t i = 0; i < n; ++i) yz[i] = (y[i] - y_mean) / y_scale;

  Rng rng(hash_seed(seed, 0x4e4eULL));
  const std::size_t P = nn_param_count(d, p.neurons);
  std::vector<double> params(P, 0.0);
  const double a1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(p.neurons));
  for (std::size_t i = 0; i < p.neurons * d; ++i) params[i] = rng.uniform(-a1, a1);
  for (std::size_t h = 0; h < p.neurons; ++h)
    params[p.neurons * d + p.neurons + h] = rng.uniform(-a2, a2);

  const std::size_t batch = std::min<std::size_t>(std::max<std::size_t>(p.batch, 1), n);
  std::vector<std::size_t> index(n);
  for (std::size_t i = 0; i < n; ++i) index[i] = i;

  std::vector<double> grad(P);

  for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
    rng.shuffle(index);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t m = std::min(batch, n - start);
      Matrix xm(m, d);
      std::vector<double> ym(m);
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t src = index[start + r];
        for (std::size_t j = 0; j < d; ++j) xm(r, j) = X(src, j);
        ym[r] = yz[src];
      }
      const double loss = nn_loss_and_grad(xm, ym, params, p.neurons, p.weight_decay, grad);
      epoch_loss += loss;
      if (!std::isfinite(loss))
        throw ConvergenceError("nn training diverged at epoch " + std::to_string(epoch));
      for (std::size_t i = 0; i < P; ++i) params[i] -= p.learning_rate * grad[i];
    }
    if (!std::isfinite(epoch_loss))
      throw ConvergenceError("nn training diverged at epoch " + std::to_string(epoch));
  }

  Matrix w1(p.neurons, d);
  std::vector<double> b1(p.neurons), w2(p.neurons);
  for (std::size_t h = 0; h < p.neurons; ++h) {
    for (std::size_t j = 0; j < d; ++j) w1(h, j) = params[h * d + j];
    b1[h] = params[p.neurons * d + h];
    w2[h] = params[p.neurons * d + p.neurons + h];
  }
  const double b2 = params[p.neurons * d + 2 * p.neurons];
  return NnModel(std::move(w1), std::move(b1), std::move(w2), b2, y_mean, y_scale, p);
}

NnModel fit_nn(const Matrix& X, const std::vector<double>& y, const HyperParams& hp,
               std::uint64_t seed) {
  NnParams p;
  p.neurons = hp.get_count("neurons", 20);
  p.learning_rate = hp.get_rate("nn_learning_rate",
                                hp.get_rate("learning_rate", 0.005));
  p.weight_decay = hp.get_nonneg("weight_decay", 0.001);
  p.epochs = hp.get_size("epochs", 500);
  p.batch = hp.get_count("batch", 256);
  return fit_nn(X, y, p, seed);
}

}  // namespace cem
