#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace pcrlb {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// (A + A^T) / 2.
Matrix symmetrize(const Matrix& a);

bool is_positive_definite(const Matrix& a);

// Ratio of largest to smallest eigenvalue of a symmetric matrix; +inf when the
// smallest is not positive. Empty matrices have condition number 1.
double condition_number(const Matrix& a);

double min_eigenvalue(const Matrix& a);

// Symmetric PSD square root S with S S^T = A. Negative eigenvalues from
// round-off are clipped to zero.
Matrix psd_sqrt(const Matrix& a);

// Counts diagonal-loading events applied before a Cholesky factorization.
struct RegularizationLog {
  int events = 0;
  std::vector<std::string> messages;
};

// Cholesky factor of a symmetric matrix. When the plain factorization fails,
// lambda*I is added with lambda = 1e-9 * (1 + trace/n) and escalated by x100
// up to three times; after that a NumericalError naming `what` is thrown.
class RegularizedCholesky {
 public:
  RegularizedCholesky(const Matrix& a, const std::string& what, RegularizationLog* log = nullptr);

  Matrix solve(const Matrix& rhs) const { return llt_.solve(rhs); }
  Matrix inverse() const;
  double loading() const { return loading_; }

 private:
  Eigen::LLT<Matrix> llt_;
  Index dim_ = 0;
  double loading_ = 0.0;
};

}  // namespace pcrlb
