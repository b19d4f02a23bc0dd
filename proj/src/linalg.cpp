#include "pcrlb/linalg.hpp"

#include "pcrlb/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace pcrlb {

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

bool is_positive_definite(const Matrix& a) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  if (!a.allFinite()) return false;
  Eigen::LLT<Matrix> llt(symmetrize(a));
  return llt.info() == Eigen::Success;
}

double condition_number(const Matrix& a) {
  if (a.size() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(a), Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

double min_eigenvalue(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(a), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

Matrix psd_sqrt(const Matrix& a) {
  if (a.size() == 0) return a;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(a));
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

RegularizedCholesky::RegularizedCholesky(const Matrix& a, const std::string& what, RegularizationLog* log)
    : dim_(a.rows()) {
  const Matrix sym = symmetrize(a);
  if (!sym.allFinite()) throw NumericalError(what + ": matrix has non-finite entries");
  llt_.compute(sym);
  if (llt_.info() == Eigen::Success) return;

  const double n = static_cast<double>(std::max<Index>(dim_, 1));
  double lambda = 1e-9 * (1.0 + std::abs(sym.trace()) / n);
  for (int attempt = 0; attempt < 4; ++attempt, lambda *= 100.0) {
    llt_.compute(sym + lambda * Matrix::Identity(dim_, dim_));
    if (llt_.info() == Eigen::Success) {
      loading_ = lambda;
      if (log != nullptr) {
        ++log->events;
        std::ostringstream msg;
        msg << what << ": diagonal loading " << lambda;
        log->messages.push_back(msg.str());
      }
      return;
    }
  }
  std::ostringstream msg;
  msg << what << ": not positive definite after regularization (condition number " << condition_number(sym)
      << ")";
  throw NumericalError(msg.str());
}

Matrix RegularizedCholesky::inverse() const { return llt_.solve(Matrix::Identity(dim_, dim_)); }

}  // namespace pcrlb
