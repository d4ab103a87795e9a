#include "wbary/spd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace wbary {

namespace {

// Eigenvalues of a projected matrix, recomputed, can drift from the box ends
// by a few ulps of the spectral radius.
constexpr double kProjectionSlack = 64.0 * 2.220446049250313e-16;

void check_square(const Matrix& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw InvalidInput("expected a non-empty square matrix");
  }
}

SymEigen sorted_descending(const Vector& values, const Matrix& vectors) {
  const auto d = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
  SymEigen out{Vector(d), Matrix(vectors.rows(), d)};
  for (Eigen::Index k = 0; k < d; ++k) {
    out.values(k) = values(order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

Matrix reconstruct(const Vector& values, const Matrix& vectors) {
  return vectors * values.asDiagonal() * vectors.transpose();
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& m) {
  check_square(m);
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(int d) { return SymMatrix(Matrix::Identity(d, d)); }

SymMatrix SymMatrix::zero(int d) { return SymMatrix(Matrix::Zero(d, d)); }

SymEigen sym_eigen(const SymMatrix& s) {
  if (!s.mat().allFinite()) {
    throw InvalidInput("sym_eigen: matrix has non-finite entries");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s.mat());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("sym_eigen: eigensolver did not converge");
  }
  SymEigen out = sorted_descending(solver.eigenvalues(), solver.eigenvectors());
  for (Eigen::Index k = 0; k < out.vectors.cols(); ++k) {
    Eigen::Index imax = 0;
    out.vectors.col(k).cwiseAbs().maxCoeff(&imax);
    if (out.vectors(imax, k) < 0.0) out.vectors.col(k) *= -1.0;
  }
  return out;
}

SpdMatrix SpdMatrix::from(const SymMatrix& s) {
  SymEigen e = sym_eigen(s);
  const double top = e.values(0);
  const double bottom = e.values(e.values.size() - 1);
  if (!(top > 0.0) || !(bottom > kMinEigenRatio * top)) {
    throw InvalidInput("matrix is not positive definite (lambda_min=" + std::to_string(bottom) +
                       ", lambda_max=" + std::to_string(top) + ")");
  }
  return SpdMatrix(s, std::move(e.values), std::move(e.vectors));
}

SpdMatrix SpdMatrix::from_eigen(const Vector& values, const Matrix& vectors) {
  if (values.size() == 0 || vectors.rows() != values.size() || vectors.cols() != values.size()) {
    throw InvalidInput("from_eigen: inconsistent eigen data");
  }
  SymEigen e = sorted_descending(values, vectors);
  const double top = e.values(0);
  const double bottom = e.values(e.values.size() - 1);
  if (!std::isfinite(top) || !(top > 0.0) || !(bottom > kMinEigenRatio * top)) {
    throw InvalidInput("from_eigen: eigenvalues are not positive");
  }
  SymMatrix base(reconstruct(e.values, e.vectors));
  return SpdMatrix(std::move(base), std::move(e.values), std::move(e.vectors));
}

SpdMatrix SpdMatrix::clipped(const SymMatrix& s) {
  SymEigen e = sym_eigen(s);
  const double top = e.values(0);
  if (!(top > 0.0)) {
    throw InvalidInput("clipped: matrix has no positive eigenvalue");
  }
  const double floor = 2.0 * kMinEigenRatio * top;
  if (e.values(e.values.size() - 1) > kMinEigenRatio * top) {
    return SpdMatrix(s, std::move(e.values), std::move(e.vectors));
  }
  e.values = e.values.cwiseMax(floor);
  SymMatrix base(reconstruct(e.values, e.vectors));
  return SpdMatrix(std::move(base), std::move(e.values), std::move(e.vectors));
}

SpdMatrix SpdMatrix::identity(int d) {
  return SpdMatrix(SymMatrix::identity(d), Vector::Ones(d), Matrix::Identity(d, d));
}

LownerInterval::LownerInterval(double lower, double upper) : lower_(lower), upper_(upper) {
  if (!(lower > 0.0) || !(upper > lower) || !std::isfinite(upper) ||
      !(lower > SpdMatrix::kMinEigenRatio * upper)) {
    throw InvalidInput("Löwner interval needs 0 < lower < upper with upper / lower < 1e13");
  }
}

bool LownerInterval::contains(const SpdMatrix& x, double slack) const {
  return x.lambda_min() >= lower_ * (1.0 - slack) && x.lambda_max() <= upper_ * (1.0 + slack);
}

SpdMatrix spd_power(const SpdMatrix& a, double p) {
  if (p == 1.0) return a;
  const Vector powered = a.eigenvalues().array().pow(p).matrix();
  return SpdMatrix::from_eigen(powered, a.eigenvectors());
}

SpdMatrix geometric_mean(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) {
    throw InvalidInput("geometric_mean: dimension mismatch");
  }
  const Matrix& v = a.eigenvectors();
  const Vector root = a.eigenvalues().cwiseSqrt();
  const Matrix a_half = v * root.asDiagonal() * v.transpose();
  const Matrix a_neg_half = v * root.cwiseInverse().asDiagonal() * v.transpose();
  const SpdMatrix inner = SpdMatrix::from(Matrix(a_neg_half * b.mat() * a_neg_half));
  const Matrix inner_root = spd_power(inner, 0.5).mat();
  return SpdMatrix::from(Matrix(a_half * inner_root * a_half));
}

SpdMatrix lowner_project(const SymMatrix& s, const LownerInterval& box) {
  SymEigen e = sym_eigen(s);
  const double scale = e.values.cwiseAbs().maxCoeff();
  const double slack = kProjectionSlack * scale;
  const double top = e.values(0);
  const double bottom = e.values(e.values.size() - 1);
  if (bottom >= box.lower() - slack && top <= box.upper() + slack && bottom > 0.0) {
    return SpdMatrix(s, std::move(e.values), std::move(e.vectors));
  }
  const Vector clipped = e.values.cwiseMax(box.lower()).cwiseMin(box.upper());
  return SpdMatrix::from_eigen(clipped, e.vectors);
}

FrobeniusProduct frobenius(const SymMatrix& x, const SymMatrix& y) {
  if (x.dim() != y.dim()) {
    throw InvalidInput("frobenius: dimension mismatch");
  }
  return {x.mat().cwiseProduct(y.mat()).sum(), x.mat().norm()};
}

double frobenius_norm(const SymMatrix& x) { return x.mat().norm(); }

SymMatrix congruence(const SpdMatrix& x, const SymMatrix& y) {
  if (x.dim() != y.dim()) {
    throw InvalidInput("congruence: dimension mismatch");
  }
  return SymMatrix(x.mat() * y.mat() * x.mat());
}

double log_det(const SpdMatrix& a) { return a.eigenvalues().array().log().sum(); }

}  // namespace wbary
