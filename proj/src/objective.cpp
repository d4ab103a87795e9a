#include "wbary/objective.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace wbary {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix sqrt_of(const SpdMatrix& a) {
  const Matrix& v = a.eigenvectors();
  return v * a.eigenvalues().cwiseSqrt().asDiagonal() * v.transpose();
}

}  // namespace

ProblemInstance::ProblemInstance(MeasureFamily family, std::vector<SpdMatrix> mats,
                                 std::vector<double> weights, double gamma)
    : family_(std::move(family)),
      mats_(std::move(mats)),
      weights_(std::move(weights)),
      gamma_(gamma),
      dim_(0) {
  if (mats_.empty()) throw InvalidInput("problem needs at least one matrix");
  if (weights_.size() != mats_.size()) {
    throw InvalidInput("problem has " + std::to_string(mats_.size()) + " matrices but " +
                       std::to_string(weights_.size()) + " weights");
  }
  dim_ = mats_.front().dim();
  for (const auto& a : mats_) {
    if (a.dim() != dim_) throw InvalidInput("problem matrices differ in dimension");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidInput("weights must be finite and nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("weights must sum to one");
  if (!std::isfinite(gamma_) || gamma_ < 0.0) throw InvalidInput("gamma must be finite and >= 0");
  if (is_phi() && gamma_ != 0.0) {
    throw InvalidInput("phi-exponential barycenters are unpenalized (gamma must be 0)");
  }
  if (const auto* qf = std::get_if<QGaussianFamily>(&family_)) {
    if (!q_admissible(qf->q, dim_)) {
      throw DomainError("q = " + std::to_string(qf->q) + " is not admissible for d = " +
                        std::to_string(dim_));
    }
  }
  sqrt_mats_.reserve(mats_.size());
  for (const auto& a : mats_) sqrt_mats_.push_back(sqrt_of(a));
}

ProblemInstance ProblemInstance::uniform(MeasureFamily family, std::vector<SpdMatrix> mats,
                                         double gamma) {
  const std::size_t n = mats.size();
  std::vector<double> w(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n));
  return ProblemInstance(std::move(family), std::move(mats), std::move(w), gamma);
}

double ProblemInstance::q() const {
  if (is_gaussian()) return 1.0;
  if (const auto* qf = std::get_if<QGaussianFamily>(&family_)) return qf->q;
  throw InvalidInput("phi-exponential family has no q parameter");
}

ProblemInstance ProblemInstance::with_mats(std::vector<SpdMatrix> mats) const {
  return ProblemInstance(family_, std::move(mats), weights_, gamma_);
}

ProblemInstance ProblemInstance::with_gamma(double gamma) const {
  ProblemInstance out = *this;
  if (!std::isfinite(gamma) || gamma < 0.0) throw InvalidInput("gamma must be finite and >= 0");
  if (is_phi() && gamma != 0.0) throw InvalidInput("phi-exponential barycenters are unpenalized");
  out.gamma_ = gamma;
  return out;
}

ProblemInstance ProblemInstance::with_family(MeasureFamily family) const {
  return ProblemInstance(std::move(family), mats_, weights_, gamma_);
}

MeasureFamily family_for_q(double q) {
  if (q == 1.0) return GaussianFamily{};
  return QGaussianFamily{q};
}

SpectralBounds spectral_bounds(const ProblemInstance& inst) {
  double lo = kInf;
  double hi = 0.0;
  for (const auto& a : inst.mats()) {
    lo = std::min(lo, a.lambda_min());
    hi = std::max(hi, a.lambda_max());
  }
  return {lo, hi};
}

double penalty_shift(const ProblemInstance& inst, double log_det_x) {
  const double gamma = inst.gamma();
  if (inst.is_phi() || gamma == 0.0) return 0.0;
  if (inst.is_gaussian()) return gamma;
  const double q = inst.q();
  const FamilyConstants k = family_constants(q, inst.dim());
  return gamma * k.m * std::exp(0.5 * (q - 1.0) * log_det_x);
}

ObjectiveEvaluator::ObjectiveEvaluator(const ProblemInstance& inst) : inst_(inst) {}

double ObjectiveEvaluator::penalty(double log_det) const {
  const double gamma = inst_.gamma();
  if (gamma == 0.0 || inst_.is_phi()) return 0.0;
  const int d = inst_.dim();
  if (inst_.is_gaussian()) {
    return gamma * (-log_det - d * std::log(2.0 * std::numbers::pi * std::numbers::e));
  }
  return 2.0 * gamma * tsallis_entropy(inst_.q(), d, log_det);
}

ObjectiveEvaluator::Point ObjectiveEvaluator::at(SpdMatrix x) const {
  if (x.dim() != inst_.dim()) throw InvalidInput("objective: X has the wrong dimension");
  Point p{std::move(x), 0.0, {}, 0.0};
  p.log_det = log_det(p.x);
  const auto& roots = inst_.sqrt_mats();
  const auto& w = inst_.weights();
  p.n_eigen.reserve(roots.size());
  double value = p.x.mat().trace();
  for (std::size_t i = 0; i < roots.size(); ++i) {
    p.n_eigen.push_back(sym_eigen(SymMatrix(roots[i] * p.x.mat() * roots[i])));
    const double root_trace = p.n_eigen.back().values.cwiseMax(0.0).cwiseSqrt().sum();
    value += w[i] * (inst_.mats()[i].mat().trace() - 2.0 * root_trace);
  }
  p.value = value + penalty(p.log_det);
  return p;
}

SymMatrix ObjectiveEvaluator::gradient(const Point& p) const {
  const int d = inst_.dim();
  const auto& roots = inst_.sqrt_mats();
  const auto& w = inst_.weights();
  Matrix g = Matrix::Identity(d, d);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    // A_i # X^{-1} = A_i^{1/2} N_i^{-1/2} A_i^{1/2}.
    const SymEigen& e = p.n_eigen[i];
    const Matrix half = roots[i] * e.vectors * e.values.array().pow(-0.25).matrix().asDiagonal();
    g.noalias() -= w[i] * (half * half.transpose());
  }
  const double c = penalty_shift(inst_, p.log_det);
  if (c != 0.0) {
    const Matrix& v = p.x.eigenvectors();
    g -= c * (v * p.x.eigenvalues().cwiseInverse().asDiagonal() * v.transpose());
  }
  return SymMatrix(g);
}

double ObjectiveEvaluator::difference(const Point& from, const Point& to) const {
  const Matrix dx = to.x.mat() - from.x.mat();
  const auto& roots = inst_.sqrt_mats();
  const auto& w = inst_.weights();
  double delta = dx.trace();
  for (std::size_t i = 0; i < roots.size(); ++i) {
    // sqrt(N') - sqrt(N) = E solves sqrt(N') E + E sqrt(N) = N' - N.
    const SymEigen& a = to.n_eigen[i];
    const SymEigen& b = from.n_eigen[i];
    const Vector pa = a.values.cwiseMax(0.0).cwiseSqrt();
    const Vector pb = b.values.cwiseMax(0.0).cwiseSqrt();
    const Matrix dn = roots[i] * dx * roots[i];
    Matrix e = a.vectors.transpose() * dn * b.vectors;
    for (Eigen::Index c = 0; c < e.cols(); ++c) {
      for (Eigen::Index r = 0; r < e.rows(); ++r) e(r, c) /= pa(r) + pb(c);
    }
    const double trace_e = e.cwiseProduct(a.vectors.transpose() * b.vectors).sum();
    delta -= 2.0 * w[i] * trace_e;
  }

  const double gamma = inst_.gamma();
  if (gamma == 0.0 || inst_.is_phi()) return delta;

  // log det(to) - log det(from) = sum log1p(eig(X^{-1/2} dX X^{-1/2})).
  const Matrix& v = from.x.eigenvectors();
  const Vector s = from.x.eigenvalues().cwiseSqrt().cwiseInverse();
  const Matrix scaled = s.asDiagonal() * (v.transpose() * dx * v) * s.asDiagonal();
  const SymEigen rel = sym_eigen(SymMatrix(scaled));
  double dlogdet = 0.0;
  for (Eigen::Index k = 0; k < rel.values.size(); ++k) dlogdet += std::log1p(rel.values(k));

  if (inst_.is_gaussian()) return delta - gamma * dlogdet;
  const double q = inst_.q();
  const FamilyConstants k = family_constants(q, inst_.dim());
  const double half = 0.5 * (q - 1.0);
  return delta + 2.0 * gamma * k.m / (1.0 - q) * std::exp(half * from.log_det) *
                     std::expm1(half * dlogdet);
}

double objective_value(const SpdMatrix& x, const ProblemInstance& inst) {
  return ObjectiveEvaluator(inst).at(x).value;
}

SymMatrix gradient(const SpdMatrix& x, const ProblemInstance& inst) {
  const ObjectiveEvaluator eval(inst);
  return eval.gradient(eval.at(x));
}

SymMatrix tsallis_penalty_hessian_apply(const SpdMatrix& x, const SymMatrix& h, double q,
                                        double gamma, int d) {
  if (x.dim() != d || h.dim() != d) throw InvalidInput("hessian: dimension mismatch");
  const FamilyConstants k = family_constants(q, d);
  const Matrix& v = x.eigenvectors();
  const Matrix inv = v * x.eigenvalues().cwiseInverse().asDiagonal() * v.transpose();
  const double scale = -gamma * k.m * std::exp(0.5 * (q - 1.0) * log_det(x));
  const double tr = inv.cwiseProduct(h.mat()).sum();
  return SymMatrix(scale * (0.5 * (q - 1.0) * tr * inv - inv * h.mat() * inv));
}

double lipschitz_bound(const ProblemInstance& inst, const SpectralBounds& b) {
  if (!(b.alpha > 0.0) || !(b.beta >= b.alpha)) throw InvalidInput("invalid spectral bounds");
  const double a = b.alpha;
  const double be = b.beta;
  const double gamma = inst.gamma();
  double l = be * be / (2.0 * a * a * a) + gamma / (a * a);
  if (!inst.is_q_gaussian() || gamma == 0.0) return l;
  const double q = inst.q();
  const int d = inst.dim();
  const double m = family_constants(q, d).m;
  const double p = 0.5 * (q - 1.0) * d;
  if (q > 1.0) {
    l += gamma * m * std::pow(be, p) * (1.0 + p) / (a * a);
  } else {
    l += gamma * m * std::pow(a, -2.0 + p) * (1.0 - p);
  }
  return l;
}

ConvexityThreshold convexity_gamma_max(double q, int d, const SpectralBounds& b) {
  if (q == 1.0) return {kInf, false};
  const double m = family_constants(q, d).m;
  const double a = b.alpha;
  const double be = b.beta;
  if (q < 1.0 || q <= 1.0 + 2.0 * a * a / (d * be * be)) return {kInf, false};
  const double factor = 1.0 / (be * be) - (q - 1.0) * d / (2.0 * a * a);
  const double gamma0 = 0.5 * std::sqrt(a) / std::pow(be, 1.5) / std::abs(factor) / m *
                        std::pow(be, -0.5 * d * (q - 1.0));
  return {gamma0, factor < 0.0};
}

}  // namespace wbary
