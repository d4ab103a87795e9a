#pragma once

#include <vector>

#include "wbary/measures.hpp"

namespace wbary {

/// Barycenter problem: zero-mean measures with covariances A_i, weights
/// lambda_i summing to one, entropy penalty gamma, and the measure family.
class ProblemInstance {
 public:
  ProblemInstance(MeasureFamily family, std::vector<SpdMatrix> mats, std::vector<double> weights,
                  double gamma);

  static ProblemInstance uniform(MeasureFamily family, std::vector<SpdMatrix> mats, double gamma);

  const MeasureFamily& family() const { return family_; }
  const std::vector<SpdMatrix>& mats() const { return mats_; }
  const std::vector<double>& weights() const { return weights_; }
  double gamma() const { return gamma_; }
  int dim() const { return dim_; }
  std::size_t size() const { return mats_.size(); }

  /// A_i^{1/2}, computed once.
  const std::vector<Matrix>& sqrt_mats() const { return sqrt_mats_; }

  bool is_gaussian() const { return std::holds_alternative<GaussianFamily>(family_); }
  bool is_q_gaussian() const { return std::holds_alternative<QGaussianFamily>(family_); }
  bool is_phi() const { return std::holds_alternative<PhiExponentialFamily>(family_); }
  /// q of a q-Gaussian instance; 1 for the Gaussian family. Throws otherwise.
  double q() const;

  /// Same family, weights and penalty with new matrices.
  ProblemInstance with_mats(std::vector<SpdMatrix> mats) const;
  ProblemInstance with_gamma(double gamma) const;
  ProblemInstance with_family(MeasureFamily family) const;

 private:
  MeasureFamily family_;
  std::vector<SpdMatrix> mats_;
  std::vector<double> weights_;
  double gamma_;
  int dim_;
  std::vector<Matrix> sqrt_mats_;
};

/// Family matching a q value: Gaussian at q = 1, q-Gaussian otherwise.
MeasureFamily family_for_q(double q);

struct SpectralBounds {
  double alpha;
  double beta;
};

/// alpha = min_i lambda_min(A_i), beta = max_i lambda_max(A_i).
SpectralBounds spectral_bounds(const ProblemInstance& inst);

/// Scalar c(X) such that the optimality equation reads
/// X - c(X) I = sum_i lambda_i (X^{1/2} A_i X^{1/2})^{1/2}:
/// gamma (Gaussian), gamma m det(X)^{(q-1)/2} (q-Gaussian), 0 (phi).
double penalty_shift(const ProblemInstance& inst, double log_det_x);

/// Objective f (Gaussian), g (q-Gaussian) or f1 (phi) with cached
/// intermediate quantities, so that values, gradients and differences of
/// nearby points are cheap and accurate.
class ObjectiveEvaluator {
 public:
  explicit ObjectiveEvaluator(const ProblemInstance& inst);

  struct Point {
    SpdMatrix x;
    double log_det;
    /// Eigendecompositions of N_i = A_i^{1/2} X A_i^{1/2}.
    std::vector<SymEigen> n_eigen;
    double value;
  };

  Point at(SpdMatrix x) const;
  SymMatrix gradient(const Point& p) const;

  /// value(to) - value(from), evaluated without cancellation between the
  /// two absolute values; accurate even when the points are 1e-10 apart.
  double difference(const Point& from, const Point& to) const;

  const ProblemInstance& instance() const { return inst_; }

 private:
  double penalty(double log_det) const;

  const ProblemInstance& inst_;
};

double objective_value(const SpdMatrix& x, const ProblemInstance& inst);
SymMatrix gradient(const SpdMatrix& x, const ProblemInstance& inst);

/// Second derivative of k(X) = 2 gamma F_q(G_q(0, X)) applied to H.
SymMatrix tsallis_penalty_hessian_apply(const SpdMatrix& x, const SymMatrix& h, double q,
                                        double gamma, int d);

/// Lipschitz constant of the gradient on [alpha I, beta I].
double lipschitz_bound(const ProblemInstance& inst, const SpectralBounds& b);

struct ConvexityThreshold {
  /// +inf when the objective is convex for every gamma.
  double gamma_max;
  /// True when 1/beta^2 - (q-1)d/(2 alpha^2) was negative and its absolute
  /// value was used.
  bool factor_sign_flipped;
};

ConvexityThreshold convexity_gamma_max(double q, int d, const SpectralBounds& b);

}  // namespace wbary
