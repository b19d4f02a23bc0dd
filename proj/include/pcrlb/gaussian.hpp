#pragma once

#include "pcrlb/linalg.hpp"
#include "pcrlb/random.hpp"

namespace pcrlb {

// Multivariate normal law with a validated covariance. Construction fails
// with ConfigError unless the covariance is symmetric positive definite.
class Gaussian {
 public:
  Gaussian() = default;
  Gaussian(Vector mean, Matrix covariance);

  static Gaussian zero_mean(Matrix covariance);

  Index dim() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }
  const Matrix& cholesky_lower() const { return chol_; }
  Matrix precision() const;
  double log_det() const { return log_det_; }

  Vector sample(Engine& engine) const;
  // Each column of `out` receives one draw.
  void sample_into(Engine& engine, Eigen::Ref<Matrix> out) const;

  double log_density(const Vector& x) const;
  // Log density of mean + r for every column r of `residuals`.
  Eigen::ArrayXd log_density_of_residuals(const Matrix& residuals) const;

 private:
  Vector mean_;
  Matrix covariance_;
  Matrix chol_;
  double log_det_ = 0.0;
};

}  // namespace pcrlb
