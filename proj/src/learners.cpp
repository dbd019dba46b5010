#include "cem/learners.hpp"

#include <cmath>
#include <sstream>

#include "cem/boosting.hpp"
#include "cem/error.hpp"
#include "cem/forest.hpp"
#include "cem/glm.hpp"
#include "cem/nn.hpp"
#include "cem/svr.hpp"
#include "cem/tree.hpp"

namespace cem {

std::string family_to_string(Family f) {
  switch (f) {
    case Family::cart: return "cart";
    case Family::random_forest: return "random_forest";
    case Family::gbdt: return "gbdt";
    case Family::xgb: return "xgb";
    case Family::svr: return "svr";
    case Family::nn: return "nn";
    case Family::linear: return "linear";
    case Family::log_linear: return "log_linear";
    case Family::poisson: return "poisson";
    case Family::constant_mean: return "constant_mean";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "cart" || s == "dt") return Family::cart;
  if (s == "random_forest" || s == "rf") return Family::random_forest;
  if (s == "gbdt") return Family::gbdt;
  if (s == "xgb" || s == "xgboost") return Family::xgb;
  if (s == "svr" || s == "svm") return Family::svr;
  if (s == "nn" || s == "ann") return Family::nn;
  if (s == "linear" || s == "lr") return Family::linear;
  if (s == "log_linear" || s == "log_lr") return Family::log_linear;
  if (s == "poisson") return Family::poisson;
  if (s == "constant_mean") return Family::constant_mean;
  throw ConfigError("unknown learner family \"" + s + "\"");
}

HyperParams& HyperParams::set(const std::string& key, double value) {
  num_[key] = value;
  return *this;
}

HyperParams& HyperParams::set(const std::string& key, const std::string& value) {
  str_[key] = value;
  return *this;
}

bool HyperParams::has(const std::string& key) const {
  return num_.count(key) > 0 || str_.count(key) > 0;
}

double HyperParams::get_num(const std::string& key, double fallback) const {
  auto it = num_.find(key);
  return it == num_.end() ? fallback : it->second;
}

std::string HyperParams::get_str(const std::string& key,
                                 const std::string& fallback) const {
  auto it = str_.find(key);
  return it == str_.end() ? fallback : it->second;
}

std::size_t HyperParams::get_count(const std::string& key, std::size_t fallback) const {
  const double v = get_num(key, static_cast<double>(fallback));
  if (v < 1.0 || v != std::floor(v))
    throw InvalidArgumentError("hyperparameter \"" + key +
                               "\" must be a count >= 1, got " + std::to_string(v));
  return static_cast<std::size_t>(v);
}

std::size_t HyperParams::get_size(const std::string& key, std::size_t fallback) const {
  const double v = get_num(key, static_cast<double>(fallback));
  if (v < 0.0 || v != std::floor(v))
    throw InvalidArgumentError("hyperparameter \"" + key +
                               "\" must be a nonnegative integer, got " +
                               std::to_string(v));
  return static_cast<std::size_t>(v);
}

double HyperParams::get_rate(const std::string& key, double fallback) const {
  const double v = get_num(key, fallback);
  if (v <= 0.0)
    throw InvalidArgumentError("hyperparameter \"" + key + "\" must be positive");
  return v;
}

double HyperParams::get_nonneg(const std::string& key, double fallback) const {
  const double v = get_num(key, fallback);
  if (v < 0.0)
    throw InvalidArgumentError("hyperparameter \"" + key + "\" must be nonnegative");
  return v;
}

std::string HyperParams::describe() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [k, v] : num_) {
    if (!first) out << " ";
    out << k << "=" << v;
    first = false;
  }
  for (const auto& [k, v] : str_) {
    if (!first) out << " ";
    out << k << "=" << v;
    first = false;
  }
  return out.str();
}

void Regressor::check_width(const Matrix& X) const {
  if (X.cols() != feature_count())
    throw SchemaError("model fitted on " + std::to_string(feature_count()) +
                      " features, input has " + std::to_string(X.cols()));
}

double Regressor::predict_one(std::span<const double> row) const {
  Matrix m(1, row.size());
  for (std::size_t j = 0; j < row.size(); ++j) m(0, j) = row[j];
  return predict(m)[0];
}

std::vector<double> ConstantModel::predict(const Matrix& X) const {
  check_width(X);
  return std::vector<double>(X.rows(), value_);
}

std::unique_ptr<Regressor> fit_regressor(Family family, const Matrix& X,
                                         const std::vector<double>& y,
                                         const HyperParams& hp, std::uint64_t seed) {
  switch (family) {
    case Family::cart:
      return std::make_unique<CartModel>(fit_cart(X, y, cart_params_from(hp, seed)));
    case Family::random_forest:
      return std::make_unique<ForestModel>(fit_random_forest(X, y, hp, seed));
    case Family::gbdt:
      return std::make_unique<GbdtModel>(fit_gbdt(X, y, hp, seed));
    case Family::xgb:
      return std::make_unique<XgbModel>(fit_xgb(X, y, hp, seed));
    case Family::svr:
      return std::make_unique<SvrModel>(fit_svr(X, y, hp));
    case Family::nn:
      return std::make_unique<NnModel>(fit_nn(X, y, hp, seed));
    case Family::linear:
    case Family::log_linear:
    case Family::poisson:
      return std::make_unique<GlmModel>(fit_glm(X, y, family));
    case Family::constant_mean: {
      if (y.empty()) throw EmptyInputError("constant model needs targets");
      double m = 0.0;
      for (double v : y) m += v;
      m /= static_cast<double>(y.size());
      return std::make_unique<ConstantModel>(m, X.cols());
    }
  }
  throw InvalidArgumentError("unknown learner family");
}

}  // namespace cem
