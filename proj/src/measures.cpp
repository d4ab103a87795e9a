#include "wbary/measures.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

namespace wbary {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tail integrals whose error estimate exceeds this (relative) are treated as divergent.
constexpr double kTailTolerance = 1e-9;

double improper_or_infinite(const std::function<double()>& integrate) {
  try {
    return integrate();
  } catch (const std::exception&) {
    return kInf;
  }
}

}  // namespace

double q_log(double q, double t) {
  if (!(t > 0.0)) {
    throw DomainError("q_log: argument must be positive");
  }
  if (q == 1.0) return std::log(t);
  return std::expm1((1.0 - q) * std::log(t)) / (1.0 - q);
}

double q_exp(double q, double s) {
  if (q == 1.0) return std::exp(s);
  const double base = 1.0 + (1.0 - q) * s;
  const double expo = 1.0 / (1.0 - q);
  if (base <= 0.0) return expo > 0.0 ? 0.0 : kInf;
  return std::exp(std::log1p((1.0 - q) * s) * expo);
}

struct PhiSpec::State {
  std::function<double(double)> phi;
  std::string label;
  std::optional<double> power;
  std::once_flag once;
  double lower = 0.0;
  double upper = 0.0;

  void compute_limits() {
    auto inv = [this](double s) { return 1.0 / phi(s); };
    lower = -improper_or_infinite([&] {
      boost::math::quadrature::tanh_sinh<double> integrator;
      double err = 0.0;
      const double value = integrator.integrate(inv, 0.0, 1.0, 1e-12, &err);
      if (!std::isfinite(value) || err > kTailTolerance * std::max(1.0, std::abs(value))) {
        return kInf;
      }
      return value;
    });
    upper = improper_or_infinite([&] {
      boost::math::quadrature::exp_sinh<double> integrator;
      double err = 0.0;
      const double value = integrator.integrate(inv, 1.0, kInf, 1e-12, &err);
      if (!std::isfinite(value) || err > kTailTolerance * std::max(1.0, std::abs(value))) {
        return kInf;
      }
      return value;
    });
  }
};

PhiSpec::PhiSpec(std::function<double(double)> phi, std::string label)
    : state_(std::make_shared<State>()) {
  if (!phi) throw InvalidInput("PhiSpec: empty function");
  constexpr int kSamples = 1000;
  double prev = -kInf;
  for (int k = 0; k < kSamples; ++k) {
    const double s = std::pow(10.0, -6.0 + 12.0 * k / (kSamples - 1));
    const double v = phi(s);
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw InvalidInput("PhiSpec '" + label + "': phi must be positive and finite");
    }
    if (!(v > prev)) {
      throw InvalidInput("PhiSpec '" + label + "': phi must be strictly increasing");
    }
    prev = v;
  }
  state_->phi = std::move(phi);
  state_->label = std::move(label);
}

PhiSpec PhiSpec::power(double p) {
  if (!(p > 0.0)) throw InvalidInput("PhiSpec::power: exponent must be positive");
  std::ostringstream label;
  label << "s^" << p;
  PhiSpec spec = p == 1.0 ? PhiSpec([](double s) { return s; }, label.str())
                          : PhiSpec([p](double s) { return std::pow(s, p); }, label.str());
  spec.state_->power = p;
  return spec;
}

double PhiSpec::operator()(double s) const { return state_->phi(s); }

const std::string& PhiSpec::label() const { return state_->label; }

std::optional<double> PhiSpec::power_exponent() const { return state_->power; }

double PhiSpec::log_lower() const {
  std::call_once(state_->once, [this] { state_->compute_limits(); });
  return state_->lower;
}

double PhiSpec::log_upper() const {
  std::call_once(state_->once, [this] { state_->compute_limits(); });
  return state_->upper;
}

double phi_log(const PhiSpec& spec, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError("phi_log: argument must be positive and finite");
  }
  if (t == 1.0) return 0.0;
  // Substituting s = e^u keeps the integrand smooth over many decades.
  const double end = std::log(t);
  auto integrand = [&spec](double u) {
    const double s = std::exp(u);
    return s / spec(s);
  };
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, end, 20, 1e-13, &err);
  if (!std::isfinite(value) || err > 1e-10 * std::max(1.0, std::abs(value))) {
    throw NumericalError("phi_log: quadrature did not converge");
  }
  return value;
}

double phi_exp(const PhiSpec& spec, double s) {
  if (std::isnan(s)) throw DomainError("phi_exp: NaN argument");
  if (s == 0.0) return 1.0;
  if (s <= spec.log_lower()) return 0.0;
  if (s >= spec.log_upper()) return kInf;

  // Bracket the root in t by doubling (or halving) from 1.
  double lo = 1.0;
  double hi = 1.0;
  if (s > 0.0) {
    do {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) return kInf;
    } while (phi_log(spec, hi) < s);
  } else {
    do {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-300) return 0.0;
    } while (phi_log(spec, lo) > s);
  }
  auto f = [&](double t) { return phi_log(spec, t) - s; };
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(50), max_iter);
  if (max_iter >= 200) throw NumericalError("phi_exp: root finding did not converge");
  return 0.5 * (a + b);
}

bool q_admissible(double q, int d) {
  if (d < 1) return false;
  const double upper = (d + 4.0) / (d + 2.0);
  return (q > 0.0 && q < 1.0) || (q > 1.0 && q < upper);
}

FamilyConstants family_constants(double q, int d) {
  if (!q_admissible(q, d)) {
    std::ostringstream msg;
    msg << "q = " << q << " is outside (0,1) U (1," << (d + 4.0) / (d + 2.0) << ") for d = " << d;
    throw DomainError(msg.str());
  }
  const double half_d = 0.5 * d;
  const double c1 = 2.0 / (2.0 + (d + 2.0) * (1.0 - q));
  double log_c0 = 0.0;
  if (q < 1.0) {
    const double a = (2.0 - q) / (1.0 - q);
    log_c0 = std::lgamma(a + half_d) - std::lgamma(a) +
             half_d * std::log((1.0 - q) * c1 / (2.0 * std::numbers::pi));
  } else {
    const double a = 1.0 / (q - 1.0);
    log_c0 = std::lgamma(a) - std::lgamma(a - half_d) +
             half_d * std::log((q - 1.0) * c1 / (2.0 * std::numbers::pi));
  }
  const double c0 = std::exp(log_c0);
  const double m = (2.0 - q) * c1 * std::exp((1.0 - q) * log_c0);
  return {q, d, c0, c1, m};
}

std::string family_name(const MeasureFamily& family) {
  struct Visitor {
    std::string operator()(const GaussianFamily&) const { return "gaussian"; }
    std::string operator()(const QGaussianFamily&) const { return "q-gaussian"; }
    std::string operator()(const PhiExponentialFamily&) const { return "phi-exponential"; }
  };
  return std::visit(Visitor{}, family);
}

GaussianMeasure GaussianMeasure::centered(SpdMatrix cov) {
  const int d = cov.dim();
  return {Vector::Zero(d), std::move(cov)};
}

QGaussianMeasure QGaussianMeasure::make(double q, Vector mean, SpdMatrix cov) {
  if (mean.size() != cov.dim()) throw InvalidInput("QGaussianMeasure: mean/cov size mismatch");
  if (!mean.allFinite()) throw InvalidInput("QGaussianMeasure: non-finite mean");
  if (!q_admissible(q, cov.dim())) {
    throw DomainError("QGaussianMeasure: q is not admissible for this dimension");
  }
  return {q, std::move(mean), std::move(cov)};
}

QGaussianMeasure QGaussianMeasure::centered(double q, SpdMatrix cov) {
  const int d = cov.dim();
  return make(q, Vector::Zero(d), std::move(cov));
}

namespace {

double mahalanobis2(const SpdMatrix& cov, const Vector& x) {
  const Vector y = cov.eigenvectors().transpose() * x;
  return (y.array().square() / cov.eigenvalues().array()).sum();
}

}  // namespace

double gaussian_density(const GaussianMeasure& meas, const Vector& x) {
  const int d = meas.cov.dim();
  const double r2 = mahalanobis2(meas.cov, x - meas.mean);
  return std::exp(-0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * log_det(meas.cov) - 0.5 * r2);
}

double q_gaussian_density(const QGaussianMeasure& meas, const Vector& x) {
  const int d = meas.cov.dim();
  const FamilyConstants k = family_constants(meas.q, d);
  const double r2 = mahalanobis2(meas.cov, x - meas.mean);
  return k.c0 * std::exp(-0.5 * log_det(meas.cov)) * q_exp(meas.q, -0.5 * k.c1 * r2);
}

double q_gaussian_support_radius2(double q, int d) {
  const FamilyConstants k = family_constants(q, d);
  if (q > 1.0) return kInf;
  return 2.0 / ((1.0 - q) * k.c1);
}

double boltzmann_entropy(const GaussianMeasure& meas) {
  const int d = meas.cov.dim();
  return -0.5 * d * std::log(2.0 * std::numbers::pi * std::numbers::e) - 0.5 * log_det(meas.cov);
}

double tsallis_entropy(double q, int d, double log_det_cov) {
  const FamilyConstants k = family_constants(q, d);
  const double half_d_c1 = 0.5 * d * k.c1;
  // ln_q(C0 / sqrt(det U)) evaluated in the log domain.
  const double log_arg = std::log(k.c0) - 0.5 * log_det_cov;
  const double lnq = std::expm1((1.0 - q) * log_arg) / (1.0 - q);
  return -half_d_c1 + (1.0 - (1.0 - q) * half_d_c1) * lnq;
}

double tsallis_entropy(const QGaussianMeasure& meas) {
  return tsallis_entropy(meas.q, meas.cov.dim(), log_det(meas.cov));
}

SpdMatrix optimal_map(const SpdMatrix& u, const SpdMatrix& v) {
  if (u.dim() != v.dim()) throw InvalidInput("optimal_map: dimension mismatch");
  const Matrix& w = u.eigenvectors();
  const Vector root = u.eigenvalues().cwiseSqrt();
  const Matrix u_half = w * root.asDiagonal() * w.transpose();
  const Matrix u_neg_half = w * root.cwiseInverse().asDiagonal() * w.transpose();
  const SpdMatrix middle = SpdMatrix::from(Matrix(u_half * v.mat() * u_half));
  const Matrix middle_root = spd_power(middle, 0.5).mat();
  return SpdMatrix::from(Matrix(u_neg_half * middle_root * u_neg_half));
}

namespace {

struct Moments {
  const Vector* mean;
  const SpdMatrix* cov;
};

double w2_moments(const Moments& a, const Moments& b) {
  if (a.cov->dim() != b.cov->dim()) throw InvalidInput("w2_distance: dimension mismatch");
  // W2^2 = |dm|^2 + ||(I - T) U^{1/2}||_F^2 with T the optimal map; a sum of
  // squares, so identical arguments give exactly representable zero-ish output.
  const SpdMatrix t = optimal_map(*a.cov, *b.cov);
  const Matrix& w = a.cov->eigenvectors();
  const Matrix u_half = w * a.cov->eigenvalues().cwiseSqrt().asDiagonal() * w.transpose();
  const int d = a.cov->dim();
  const Matrix defect = (Matrix::Identity(d, d) - t.mat()) * u_half;
  const double shift = (*a.mean - *b.mean).squaredNorm();
  return std::sqrt(shift + defect.squaredNorm());
}

}  // namespace

double w2_distance(const Measure& a, const Measure& b, bool* outside_isometry_range) {
  if (outside_isometry_range != nullptr) *outside_isometry_range = false;
  if (a.index() != b.index()) throw InvalidInput("w2_distance: measures from different families");
  if (const auto* ga = std::get_if<GaussianMeasure>(&a)) {
    const auto& gb = std::get<GaussianMeasure>(b);
    return w2_moments({&ga->mean, &ga->cov}, {&gb.mean, &gb.cov});
  }
  if (const auto* qa = std::get_if<QGaussianMeasure>(&a)) {
    const auto& qb = std::get<QGaussianMeasure>(b);
    if (qa->q != qb.q) throw InvalidInput("w2_distance: q-Gaussians with different q");
    return w2_moments({&qa->mean, &qa->cov}, {&qb.mean, &qb.cov});
  }
  const auto& pa = std::get<PhiExponentialMeasure>(a);
  const auto& pb = std::get<PhiExponentialMeasure>(b);
  if (pa.phi.label() != pb.phi.label()) {
    throw InvalidInput("w2_distance: phi-exponential measures with different phi");
  }
  if (pa.cov.dim() < 2 && outside_isometry_range != nullptr) *outside_isometry_range = true;
  return w2_moments({&pa.mean, &pa.cov}, {&pb.mean, &pb.cov});
}

}  // namespace wbary
