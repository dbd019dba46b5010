#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cem/matrix.hpp"

namespace cem {

enum class Family {
  cart,
  random_forest,
  gbdt,
  xgb,
  svr,
  nn,
  linear,
  log_linear,
  poisson,
  constant_mean,  // fallback for clusters too small to cross-validate
};

std::string family_to_string(Family f);
Family family_from_string(const std::string& s);

// Family-specific key-value hyperparameters. Numeric values cover counts and
// rates; strings cover names like the SVR kernel.
class HyperParams {
 public:
  HyperParams() = default;

  HyperParams& set(const std::string& key, double value);
  HyperParams& set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  double get_num(const std::string& key, double fallback) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;

  // Count >= 1 (counts of trees, neurons, features, ...).
  std::size_t get_count(const std::string& key, std::size_t fallback) const;
  // Count >= 0.
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  // Strictly positive rate.
  double get_rate(const std::string& key, double fallback) const;
  // Nonnegative real (regularization strengths).
  double get_nonneg(const std::string& key, double fallback) const;

  const std::map<std::string, double>& numeric() const { return num_; }
  const std::map<std::string, std::string>& strings() const { return str_; }

  std::string describe() const;

 private:
  std::map<std::string, double> num_;
  std::map<std::string, std::string> str_;
};

// Uniform contract over the learner families: fitted parameters are
// immutable, predict is deterministic and safe to call concurrently.
class Regressor {
 public:
  virtual ~Regressor() = default;

  virtual Family family() const = 0;
  virtual std::size_t feature_count() const = 0;
  virtual std::vector<double> predict(const Matrix& X) const = 0;

  double predict_one(std::span<const double> row) const;

 protected:
  void check_width(const Matrix& X) const;
};

// Dispatch by family. seed feeds the stochastic fits (forest, nn, feature
// subsampling); deterministic families ignore it.
std::unique_ptr<Regressor> fit_regressor(Family family, const Matrix& X,
                                         const std::vector<double>& y,
                                         const HyperParams& hp, std::uint64_t seed);

// Fallback used when a cluster is too small to cross-validate.
class ConstantModel : public Regressor {
 public:
  ConstantModel() = default;
  ConstantModel(double value, std::size_t features) : value_(value), features_(features) {}

  Family family() const override { return Family::constant_mean; }
  std::size_t feature_count() const override { return features_; }
  std::vector<double> predict(const Matrix& X) const override;

  double value() const { return value_; }

 private:
  double value_ = 0.0;
  std::size_t features_ = 0;
};

}  // namespace cem
