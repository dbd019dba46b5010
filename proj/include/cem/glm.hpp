#pragma once

#include <vector>

#include "cem/learners.hpp"
#include "cem/matrix.hpp"

namespace cem {

// Linear, log-transformed linear, and Poisson regression behind the shared
// predict contract. Coefficients include the intercept in slot 0.
class GlmModel : public Regressor {
 public:
  GlmModel() = default;
  GlmModel(Family family, std::vector<double> coefficients, std::size_t features);

  Family family() const override { return family_; }
  std::size_t feature_count() const override { return features_; }
  std::vector<double> predict(const Matrix& X) const override;

  const std::vector<double>& coefficients() const { return coef_; }
  double intercept() const { return coef_[0]; }
  // Linear predictor eta = intercept + x . slopes.
  double linear_predictor(std::span<const double> row) const;

 private:
  Family family_ = Family::linear;
  std::vector<double> coef_;
  std::size_t features_ = 0;
};

// linear: ordinary least squares via normal equations (1e-8 ridge jitter on
// singularity). log_linear: OLS on log(y + 1), predictions exponentiated
// minus 1. poisson: log link fitted by IRLS to deviance tolerance 1e-8
// within 100 iterations, else a convergence error reporting the deviance.
GlmModel fit_glm(const Matrix& X, const std::vector<double>& y, Family family);

// Symmetric positive-definite solve used by the GLM fits; exposed for reuse.
std::vector<double> solve_spd(std::vector<double> A, std::vector<double> b,
                              std::size_t dim);

}  // namespace cem
