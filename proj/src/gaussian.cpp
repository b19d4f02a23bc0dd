#include "pcrlb/gaussian.hpp"

#include "pcrlb/errors.hpp"

#include <cmath>
#include <numbers>

namespace pcrlb {

Gaussian::Gaussian(Vector mean, Matrix covariance) : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  if (covariance_.rows() != covariance_.cols() || covariance_.rows() != mean_.size())
    throw ConfigError("Gaussian: covariance shape does not match mean");
  if (!covariance_.allFinite() || !mean_.allFinite()) throw ConfigError("Gaussian: non-finite mean or covariance");
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, covariance_.cwiseAbs().maxCoeff()))
    throw ConfigError("Gaussian: covariance is not symmetric");
  covariance_ = symmetrize(covariance_);
  Eigen::LLT<Matrix> llt(covariance_);
  if (llt.info() != Eigen::Success) throw ConfigError("Gaussian: covariance is not positive definite");
  chol_ = llt.matrixL();
  log_det_ = 2.0 * chol_.diagonal().array().log().sum();
}

Gaussian Gaussian::zero_mean(Matrix covariance) {
  const Index d = covariance.rows();
  return Gaussian(Vector::Zero(d), std::move(covariance));
}

Matrix Gaussian::precision() const {
  Eigen::LLT<Matrix> llt(covariance_);
  return symmetrize(llt.solve(Matrix::Identity(dim(), dim())));
}

Vector Gaussian::sample(Engine& engine) const {
  Matrix out(dim(), 1);
  sample_into(engine, out);
  return out.col(0);
}

void Gaussian::sample_into(Engine& engine, Eigen::Ref<Matrix> out) const {
  fill_standard_normal(engine, out);
  out = (chol_.triangularView<Eigen::Lower>() * out).eval();
  out.colwise() += mean_;
}

double Gaussian::log_density(const Vector& x) const {
  Matrix r = x - mean_;
  return log_density_of_residuals(r)(0);
}

Eigen::ArrayXd Gaussian::log_density_of_residuals(const Matrix& residuals) const {
  const Matrix white = chol_.triangularView<Eigen::Lower>().solve(residuals);
  const double norm = -0.5 * (static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi) + log_det_);
  return norm - 0.5 * white.colwise().squaredNorm().transpose().array();
}

}  // namespace pcrlb
