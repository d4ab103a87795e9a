#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "wbary/spd.hpp"

using namespace wbary;

namespace {

Matrix diag(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double e : v) x(k++) = e;
  return x.asDiagonal();
}

}  // namespace

TEST(SymMatrix, SymmetrizesOnConstruction) {
  Matrix m(2, 2);
  m << 1.0, 2.0, 2.5, 3.0;
  const SymMatrix s(m);
  EXPECT_EQ(s(0, 1), s(1, 0));
  EXPECT_DOUBLE_EQ(s(0, 1), 2.25);
}

TEST(SymMatrix, RejectsNonSquare) {
  EXPECT_THROW(SymMatrix(Matrix(2, 3)), InvalidInput);
  EXPECT_THROW(SymMatrix(Matrix(0, 0)), InvalidInput);
}

TEST(SymEigen, IdentityAndDiagonal) {
  const SymEigen e = sym_eigen(SymMatrix::identity(3));
  EXPECT_TRUE(e.values.isApprox(Vector::Ones(3)));
  const SymEigen f = sym_eigen(SymMatrix(diag({1.0, 3.0})));
  EXPECT_DOUBLE_EQ(f.values(0), 3.0);
  EXPECT_DOUBLE_EQ(f.values(1), 1.0);
}

TEST(SymEigen, TwoByTwoAnalytic) {
  Matrix m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  const SymEigen e = sym_eigen(SymMatrix(m));
  EXPECT_NEAR(e.values(0), 3.0, 1e-14);
  EXPECT_NEAR(e.values(1), 1.0, 1e-14);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), s, 1e-14);
  EXPECT_NEAR(e.vectors(0, 0) * e.vectors(1, 0), 0.5, 1e-14);
  EXPECT_NEAR(e.vectors(0, 1) * e.vectors(1, 1), -0.5, 1e-14);
}

TEST(SymEigen, RejectsNonFinite) {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 0) = std::nan("");
  EXPECT_THROW(sym_eigen(SymMatrix(m)), InvalidInput);
}

TEST(SymEigen, ReconstructsRandomMatrices) {
  CounterRng rng(7);
  for (int k = 0; k < 20; ++k) {
    const SymMatrix s = oracle::random_sym(rng, 6);
    const SymEigen e = sym_eigen(s);
    const Matrix back = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    EXPECT_LE((back - s.mat()).norm(), 1e-12 * s.mat().norm());
    EXPECT_LE((e.vectors.transpose() * e.vectors - Matrix::Identity(6, 6)).norm(), 1e-12);
    for (int i = 0; i + 1 < 6; ++i) EXPECT_GE(e.values(i), e.values(i + 1));
  }
}

TEST(SpdMatrix, RejectsIndefiniteAndIllConditioned) {
  EXPECT_THROW(SpdMatrix::from(diag({1.0, -1.0})), InvalidInput);
  EXPECT_THROW(SpdMatrix::from(diag({1.0, 1e-14})), InvalidInput);
  EXPECT_NO_THROW(SpdMatrix::from(diag({1.0, 1e-12})));
}

TEST(SpdPower, Examples) {
  EXPECT_TRUE(spd_power(SpdMatrix::from(diag({4.0, 9.0})), 0.5).mat().isApprox(diag({2.0, 3.0}), 1e-14));
  EXPECT_TRUE(spd_power(SpdMatrix::identity(3), -0.7).mat().isApprox(Matrix::Identity(3, 3)));
  EXPECT_NEAR(spd_power(SpdMatrix::from(diag({2.0})), -1.0).mat()(0, 0), 0.5, 1e-15);
}

TEST(SpdPower, RoundTrips) {
  CounterRng rng(11);
  for (int k = 0; k < 20; ++k) {
    // Condition number up to 1e6.
    const SpdMatrix a = oracle::random_spd(rng, 5, 1e-3, 1e3);
    for (double p : {0.5, -1.0, -0.5}) {
      const SpdMatrix back = spd_power(spd_power(a, p), 1.0 / p);
      EXPECT_LE((back.mat() - a.mat()).norm(), 1e-10 * a.mat().norm()) << "p=" << p;
    }
  }
}

TEST(GeometricMean, Examples) {
  CounterRng rng(3);
  const SpdMatrix a = oracle::random_spd(rng, 4, 0.5, 5.0);
  const SpdMatrix b = oracle::random_spd(rng, 4, 0.5, 5.0);
  EXPECT_LE((geometric_mean(a, a).mat() - a.mat()).norm(), 1e-12);
  EXPECT_LE((geometric_mean(SpdMatrix::identity(4), b).mat() - spd_power(b, 0.5).mat()).norm(), 1e-12);
  const SpdMatrix c = geometric_mean(SpdMatrix::from(diag({1.0, 4.0})), SpdMatrix::from(diag({9.0, 1.0})));
  EXPECT_TRUE(c.mat().isApprox(diag({3.0, 2.0}), 1e-14));
  EXPECT_THROW(geometric_mean(a, SpdMatrix::identity(3)), InvalidInput);
}

TEST(GeometricMean, SymmetricInArguments) {
  CounterRng rng(5);
  for (int k = 0; k < 30; ++k) {
    const SpdMatrix a = oracle::random_spd(rng, 6, 0.1, 10.0);
    const SpdMatrix b = oracle::random_spd(rng, 6, 0.1, 10.0);
    const Matrix ab = geometric_mean(a, b).mat();
    EXPECT_LE((ab - geometric_mean(b, a).mat()).norm(), 1e-10 * ab.norm());
    // Defining property: (A # B) A^{-1} (A # B) = B.
    const Matrix back = ab * spd_power(a, -1.0).mat() * ab;
    EXPECT_LE((back - b.mat()).norm(), 1e-10 * b.mat().norm());
  }
}

TEST(GeometricMean, CommutingCase) {
  CounterRng rng(9);
  const auto basis = sym_eigen(oracle::random_sym(rng, 5)).vectors;
  Vector a(5), b(5);
  for (int i = 0; i < 5; ++i) {
    a(i) = oracle::uniform(rng, 0.1, 10.0);
    b(i) = oracle::uniform(rng, 0.1, 10.0);
  }
  const SpdMatrix g = geometric_mean(SpdMatrix::from_eigen(a, basis), SpdMatrix::from_eigen(b, basis));
  Vector expect = (a.array() * b.array()).sqrt();
  std::sort(expect.data(), expect.data() + 5, std::greater<>());
  EXPECT_LE((g.eigenvalues() - expect).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LownerProject, Examples) {
  const LownerInterval box(0.5, 1.5);
  EXPECT_TRUE(lowner_project(SymMatrix(diag({2.0, -1.0})), box).mat().isApprox(diag({1.5, 0.5})));
  const SymMatrix inside(diag({0.7, 1.2}));
  EXPECT_EQ(lowner_project(inside, box).mat(), inside.mat());
  Matrix m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  Matrix basis(2, 2);
  basis << 1.0, 1.0, 1.0, -1.0;
  basis /= std::sqrt(2.0);
  const Matrix expect = basis * diag({1.5, 1.0}) * basis.transpose();
  EXPECT_LE((lowner_project(SymMatrix(m), box).mat() - expect).norm(), 1e-14);
}

TEST(LownerProject, IdempotentAndInsideBox) {
  CounterRng rng(13);
  const LownerInterval box(0.3, 2.0);
  for (int k = 0; k < 50; ++k) {
    const SymMatrix s(2.0 * oracle::random_sym(rng, 5).mat());
    const SpdMatrix p = lowner_project(s, box);
    EXPECT_TRUE(box.contains(p, 1e-14));
    EXPECT_EQ(lowner_project(p.sym(), box).mat(), p.mat());
  }
}

// A point P of a convex set is the Frobenius projection of S iff
// <S - P, Y - P> <= 0 for every Y in the set; test against random Y.
TEST(LownerProject, VariationalInequality) {
  CounterRng rng(17);
  const LownerInterval box(0.5, 1.5);
  for (int k = 0; k < 20; ++k) {
    const SymMatrix s(3.0 * oracle::random_sym(rng, 3).mat());
    const SpdMatrix p = lowner_project(s, box);
    const double dist = (s.mat() - p.mat()).norm();
    for (int j = 0; j < 200; ++j) {
      const SpdMatrix y = oracle::random_spd(rng, 3, 0.5, 1.5);
      EXPECT_LE((s.mat() - p.mat()).cwiseProduct(y.mat() - p.mat()).sum(), 1e-12);
      EXPECT_GE((s.mat() - y.mat()).norm(), dist - 1e-12);
    }
  }
}

TEST(LownerInterval, Validates) {
  EXPECT_THROW(LownerInterval(0.0, 1.0), InvalidInput);
  EXPECT_THROW(LownerInterval(2.0, 1.0), InvalidInput);
  EXPECT_NO_THROW(LownerInterval(1e-5, 1e5));
}

TEST(Frobenius, Examples) {
  const auto r = frobenius(SymMatrix::identity(4), SymMatrix::identity(4));
  EXPECT_DOUBLE_EQ(r.inner, 4.0);
  EXPECT_DOUBLE_EQ(r.norm_x, 2.0);
  EXPECT_DOUBLE_EQ(frobenius(SymMatrix(diag({1.0, 2.0})), SymMatrix(diag({3.0, 4.0}))).inner, 11.0);
  CounterRng rng(1);
  const SymMatrix x = oracle::random_sym(rng, 5);
  const auto xx = frobenius(x, x);
  EXPECT_NEAR(xx.inner, xx.norm_x * xx.norm_x, 1e-13);
}

TEST(Congruence, Examples) {
  CounterRng rng(19);
  const SymMatrix y = oracle::random_sym(rng, 3);
  EXPECT_EQ(congruence(SpdMatrix::identity(3), y).mat(), y.mat());
  EXPECT_TRUE(congruence(SpdMatrix::from(diag({2.0, 3.0})), SymMatrix::identity(2)).mat().isApprox(diag({4.0, 9.0})));
  const SpdMatrix x = oracle::random_spd(rng, 3, 0.5, 3.0);
  EXPECT_LE((congruence(x, spd_power(x, -1.0).sym()).mat() - x.mat()).norm(), 1e-12);
}

TEST(Congruence, IsDerivativeOfInverse) {
  CounterRng rng(23);
  const SpdMatrix x = oracle::random_spd(rng, 4, 0.5, 3.0);
  const SymMatrix h = oracle::random_sym(rng, 4);
  const SpdMatrix inv = spd_power(x, -1.0);
  const Matrix expect = -congruence(inv, h).mat();
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const Matrix fd = (spd_power(SpdMatrix::from(Matrix(x.mat() + eps * h.mat())), -1.0).mat() - inv.mat()) / eps;
    const double err = (fd - expect).norm();
    EXPECT_LT(err, prev);
    EXPECT_LT(err, 20.0 * eps * expect.norm());
    prev = err;
  }
}

TEST(LogDet, Examples) {
  EXPECT_EQ(log_det(SpdMatrix::identity(3)), 0.0);
  EXPECT_NEAR(log_det(SpdMatrix::from(diag({2.0, 3.0}))), std::log(6.0), 1e-15);
  const double e = std::exp(1.0);
  EXPECT_NEAR(log_det(SpdMatrix::from(diag({e, e, e}))), 3.0, 1e-15);
}
