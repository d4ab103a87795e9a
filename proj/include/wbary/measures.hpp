#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "wbary/spd.hpp"

namespace wbary {

/// ln_q t = (t^{1-q} - 1) / (1 - q); natural log at q = 1. Throws DomainError for t <= 0.
double q_log(double q, double t);

/// exp_q s = [1 + (1 - q) s]_+^{1/(1-q)}; exp at q = 1. Returns +inf where the
/// bracket vanishes and the exponent is negative (q > 1).
double q_exp(double q, double s);

/// Increasing, positive, continuous function on (0, inf) generating the
/// deformed logarithm ln_phi(t) = int_1^t ds / phi(s).
///
/// Construction samples phi on 1000 log-spaced points of [1e-6, 1e6] and
/// rejects non-positive or non-increasing functions. The range endpoints of
/// ln_phi are computed on first use; the handle is cheap to copy and safe to
/// share between threads provided phi itself is reentrant.
class PhiSpec {
 public:
  PhiSpec(std::function<double(double)> phi, std::string label);

  /// phi(s) = s^p (p > 0); p = 1 gives the classical logarithm.
  static PhiSpec power(double p);

  double operator()(double s) const;
  const std::string& label() const;
  /// p for handles made by power(p).
  std::optional<double> power_exponent() const;

  /// l_phi = lim_{t -> 0} ln_phi(t); -inf when the integral diverges.
  double log_lower() const;
  /// L_phi = lim_{t -> inf} ln_phi(t); +inf when the integral diverges.
  double log_upper() const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

/// Adaptive quadrature of int_1^t ds / phi(s). Throws DomainError for t <= 0
/// and NumericalError when the quadrature misses its tolerance.
double phi_log(const PhiSpec& spec, double t);

/// Inverse of phi_log on (l_phi, L_phi), extended by 0 below and +inf above.
double phi_exp(const PhiSpec& spec, double s);

struct FamilyConstants {
  double q;
  int d;
  double c0;
  double c1;
  double m;
};

/// True for q in (0, 1) or (1, (d + 4) / (d + 2)).
bool q_admissible(double q, int d);

/// Normalisation constants C0, C1 of the q-Gaussian and the coefficient
/// m = (2 - q) C1 C0^{1-q} of the Tsallis penalty gradient.
FamilyConstants family_constants(double q, int d);

struct GaussianFamily {};

struct QGaussianFamily {
  double q;
};

struct PhiExponentialFamily {
  PhiSpec phi;
};

using MeasureFamily = std::variant<GaussianFamily, QGaussianFamily, PhiExponentialFamily>;

std::string family_name(const MeasureFamily& family);

struct GaussianMeasure {
  Vector mean;
  SpdMatrix cov;

  static GaussianMeasure centered(SpdMatrix cov);
};

struct QGaussianMeasure {
  double q;
  Vector mean;
  SpdMatrix cov;

  /// Validates q against the dimension of cov.
  static QGaussianMeasure make(double q, Vector mean, SpdMatrix cov);
  static QGaussianMeasure centered(double q, SpdMatrix cov);
};

struct PhiExponentialMeasure {
  PhiSpec phi;
  Vector mean;
  SpdMatrix cov;
};

using Measure = std::variant<GaussianMeasure, QGaussianMeasure, PhiExponentialMeasure>;

double gaussian_density(const GaussianMeasure& meas, const Vector& x);

double q_gaussian_density(const QGaussianMeasure& meas, const Vector& x);

/// Squared Mahalanobis radius <x - v, V^{-1}(x - v)> bounding the support of a
/// q-Gaussian; +inf for q > 1.
double q_gaussian_support_radius2(double q, int d);

/// Negative Boltzmann entropy int mu ln mu of a Gaussian.
double boltzmann_entropy(const GaussianMeasure& meas);

/// Tsallis entropy int mu ln_q mu of a q-Gaussian, closed form.
double tsallis_entropy(const QGaussianMeasure& meas);
double tsallis_entropy(double q, int d, double log_det_cov);

/// W2 distance between two members of the same family. For the
/// phi-exponential family at d = 1 the value is returned and
/// `*outside_isometry_range` (if given) is set.
double w2_distance(const Measure& a, const Measure& b, bool* outside_isometry_range = nullptr);

/// Linear optimal transport map T between centred measures with covariances
/// U and V: T is SPD and T U T = V.
SpdMatrix optimal_map(const SpdMatrix& u, const SpdMatrix& v);

}  // namespace wbary
