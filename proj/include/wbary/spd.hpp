#pragma once

#include <Eigen/Dense>

#include "wbary/errors.hpp"

namespace wbary {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense real symmetric matrix. The input is replaced by (S + S^T) / 2 on
/// construction, so entries are exactly symmetric.
class SymMatrix {
 public:
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(int d);
  static SymMatrix zero(int d);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/// Spectral decomposition with eigenvalues in descending order. Each
/// eigenvector is signed so that its largest-magnitude entry is positive.
struct SymEigen {
  Vector values;
  Matrix vectors;
};

SymEigen sym_eigen(const SymMatrix& s);

class SpdMatrix;

/// Closed Löwner interval [lower I, upper I] with upper / lower below 1e13.
class LownerInterval {
 public:
  LownerInterval(double lower, double upper);

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  bool contains(const SpdMatrix& x, double slack = 0.0) const;

 private:
  double lower_;
  double upper_;
};

/// Symmetric positive definite matrix carrying its eigendecomposition.
class SpdMatrix {
 public:
  /// Smallest accepted ratio lambda_min / lambda_max.
  static constexpr double kMinEigenRatio = 1e-13;

  static SpdMatrix from(const SymMatrix& s);
  static SpdMatrix from(const Matrix& m) { return from(SymMatrix(m)); }
  /// Builds V diag(values) V^T; values need not be sorted.
  static SpdMatrix from_eigen(const Vector& values, const Matrix& vectors);
  /// Like from(), but eigenvalues below kMinEigenRatio * lambda_max are raised
  /// to that floor instead of being rejected.
  static SpdMatrix clipped(const SymMatrix& s);
  static SpdMatrix identity(int d);

  int dim() const { return base_.dim(); }
  const SymMatrix& sym() const { return base_; }
  const Matrix& mat() const { return base_.mat(); }
  const Vector& eigenvalues() const { return values_; }
  const Matrix& eigenvectors() const { return vectors_; }
  double lambda_max() const { return values_(0); }
  double lambda_min() const { return values_(values_.size() - 1); }

  operator const SymMatrix&() const { return base_; }  // NOLINT

 private:
  friend SpdMatrix lowner_project(const SymMatrix& s, const LownerInterval& box);

  SpdMatrix(SymMatrix base, Vector values, Matrix vectors)
      : base_(std::move(base)), values_(std::move(values)), vectors_(std::move(vectors)) {}

  SymMatrix base_;
  Vector values_;
  Matrix vectors_;
};

/// A^p through the eigendecomposition.
SpdMatrix spd_power(const SpdMatrix& a, double p);

/// A # B = A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}.
SpdMatrix geometric_mean(const SpdMatrix& a, const SpdMatrix& b);

/// Frobenius-nearest point of the interval: eigenvalues clipped to [lower, upper].
SpdMatrix lowner_project(const SymMatrix& s, const LownerInterval& box);

struct FrobeniusProduct {
  double inner;
  double norm_x;
};

FrobeniusProduct frobenius(const SymMatrix& x, const SymMatrix& y);
double frobenius_norm(const SymMatrix& x);

/// Quadratic representation P(X) Y = X Y X.
SymMatrix congruence(const SpdMatrix& x, const SymMatrix& y);

double log_det(const SpdMatrix& a);

}  // namespace wbary
