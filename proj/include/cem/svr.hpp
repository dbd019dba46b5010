#pragma once

#include <cstdint>
#include <vector>

#include "cem/learners.hpp"
#include "cem/matrix.hpp"

namespace cem {

enum class SvrKernel { linear, rbf };

struct SvrParams {
  double C = 1.0;
  double epsilon = 0.1;
  SvrKernel kernel = SvrKernel::rbf;
  double sigma2 = 0.0;  // rbf bandwidth; 0 = feature count
  double tol = 1e-3;    // KKT gap at termination
  std::size_t max_passes = 0;  // 0 = generous default based on n
};

// Epsilon-insensitive support vector regression solved in the dual by
// maximal-violating-pair coordinate updates over the 2n alpha/alpha*
// variables. Only support vectors (nonzero beta = alpha - alpha*) are kept.
class SvrModel : public Regressor {
 public:
  SvrModel() = default;
  SvrModel(Matrix support_vectors, std::vector<double> beta, double bias,
           SvrParams params, std::size_t features, double max_kkt_residual);

  Family family() const override { return Family::svr; }
  std::size_t feature_count() const override { return features_; }
  std::vector<double> predict(const Matrix& X) const override;

  std::size_t support_vector_count() const { return beta_.size(); }
  double bias() const { return bias_; }
  // Largest per-variable KKT violation at termination.
  double max_kkt_residual() const { return max_kkt_residual_; }
  const SvrParams& params() const { return params_; }
  const Matrix& support_vectors() const { return support_vectors_; }
  const std::vector<double>& beta() const { return beta_; }

 private:
  Matrix support_vectors_;
  std::vector<double> beta_;
  double bias_ = 0.0;
  SvrParams params_;
  std::size_t features_ = 0;
  double max_kkt_residual_ = 0.0;
};

SvrModel fit_svr(const Matrix& X, const std::vector<double>& y, const SvrParams& p);
SvrModel fit_svr(const Matrix& X, const std::vector<double>& y, const HyperParams& hp);

}  // namespace cem
