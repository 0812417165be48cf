#ifndef STREAMFILTER_GAUSSIAN_HPP_
#define STREAMFILTER_GAUSSIAN_HPP_

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <numbers>

#include "streamfilter/errors.hpp"

namespace streamfilter {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

/// Scalar normal N(mean, variance).
template <typename Scalar>
struct Gaussian {
  Scalar mean;
  Scalar variance;

  Gaussian(Scalar m, Scalar v) : mean(m), variance(v) {
    if (!(variance > Scalar(0))) throw ContractViolation("Gaussian: variance must be > 0");
  }

  Scalar sd() const { return std::sqrt(variance); }
  Scalar precision() const { return Scalar(1) / variance; }

  Scalar log_pdf(Scalar x) const {
    const Scalar z = x - mean;
    return Scalar(-0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar> * variance) -
           z * z / (Scalar(2) * variance);
  }
  Scalar pdf(Scalar x) const { return std::exp(log_pdf(x)); }
  Scalar cdf(Scalar x) const {
    return Scalar(0.5) * std::erfc(-(x - mean) / (sd() * std::numbers::sqrt2_v<Scalar>));
  }
};

using GaussianDist = Gaussian<double>;

template <typename Scalar>
Scalar normal_log_pdf(Scalar x, Scalar mean, Scalar variance) {
  const Scalar z = x - mean;
  return Scalar(-0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar> * variance) -
         z * z / (Scalar(2) * variance);
}

/// Multivariate normal with a dense covariance. Construction checks symmetry
/// (to 1e-12, relative to the largest entry) and positive definiteness.
template <typename Scalar>
class GaussianMV {
 public:
  GaussianMV(VectorX<Scalar> mean, MatrixX<Scalar> covariance)
      : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    const auto d = mean_.size();
    if (covariance_.rows() != d || covariance_.cols() != d)
      throw ContractViolation("GaussianMV: covariance shape does not match mean");
    const Scalar scale = std::max(Scalar(1), covariance_.cwiseAbs().maxCoeff());
    if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
      throw ContractViolation("GaussianMV: covariance is not symmetric");
    llt_.compute(covariance_);
    if (llt_.info() != Eigen::Success)
      throw ContractViolation("GaussianMV: covariance is not positive definite");
  }

  const VectorX<Scalar>& mean() const { return mean_; }
  const MatrixX<Scalar>& covariance() const { return covariance_; }
  MatrixX<Scalar> cholesky() const { return llt_.matrixL(); }
  Eigen::Index dim() const { return mean_.size(); }

  Gaussian<Scalar> marginal(Eigen::Index j) const { return {mean_(j), covariance_(j, j)}; }

 private:
  VectorX<Scalar> mean_;
  MatrixX<Scalar> covariance_;
  Eigen::LLT<MatrixX<Scalar>> llt_;
};

using GaussianMVDist = GaussianMV<double>;

/// Symmetric tridiagonal matrix stored by its diagonal and first off-diagonal.
template <typename Scalar>
struct SymTridiagonal {
  VectorX<Scalar> diag;
  VectorX<Scalar> off;  // size diag.size() - 1

  Eigen::Index size() const { return diag.size(); }

  MatrixX<Scalar> dense() const {
    const auto n = size();
    MatrixX<Scalar> m = MatrixX<Scalar>::Zero(n, n);
    m.diagonal() = diag;
    if (n > 1) {
      m.diagonal(1) = off;
      m.diagonal(-1) = off;
    }
    return m;
  }
};

/// LDL^T factorization of a symmetric positive-definite tridiagonal matrix.
/// O(n) factor and solve.
template <typename Scalar>
class TridiagonalLDLT {
 public:
  explicit TridiagonalLDLT(const SymTridiagonal<Scalar>& a) {
    const auto n = a.size();
    if (n == 0) throw ContractViolation("TridiagonalLDLT: empty matrix");
    d_.resize(n);
    l_.resize(n > 1 ? n - 1 : 0);
    d_(0) = a.diag(0);
    for (Eigen::Index i = 1; i < n; ++i) {
      if (!(d_(i - 1) > Scalar(0))) throw ContractViolation("TridiagonalLDLT: matrix is not positive definite");
      l_(i - 1) = a.off(i - 1) / d_(i - 1);
      d_(i) = a.diag(i) - l_(i - 1) * a.off(i - 1);
    }
    if (!(d_(n - 1) > Scalar(0))) throw ContractViolation("TridiagonalLDLT: matrix is not positive definite");
  }

  template <typename Derived>
  MatrixX<Scalar> solve(const Eigen::MatrixBase<Derived>& b) const {
    const auto n = d_.size();
    if (b.rows() != n) throw ContractViolation("TridiagonalLDLT: right-hand side has wrong size");
    MatrixX<Scalar> x = b;
    for (Eigen::Index i = 1; i < n; ++i) x.row(i) -= l_(i - 1) * x.row(i - 1);
    for (Eigen::Index i = 0; i < n; ++i) x.row(i) /= d_(i);
    for (Eigen::Index i = n - 2; i >= 0; --i) x.row(i) -= l_(i) * x.row(i + 1);
    return x;
  }

  MatrixX<Scalar> inverse() const { return solve(MatrixX<Scalar>::Identity(d_.size(), d_.size())); }

 private:
  VectorX<Scalar> d_;
  VectorX<Scalar> l_;
};

}  // namespace streamfilter

#endif  // STREAMFILTER_GAUSSIAN_HPP_
