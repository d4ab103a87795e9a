#include "wbary/solvers.hpp"

#include <boost/math/tools/roots.hpp>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

namespace wbary {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// sum_i lambda_i (X^{1/2} A_i X^{1/2})^{1/2} + c(X) I as a plain matrix.
Matrix fixed_point_matrix(const SpdMatrix& x, const ProblemInstance& inst) {
  if (x.dim() != inst.dim()) throw InvalidInput("X has the wrong dimension");
  const int d = inst.dim();
  const Matrix& v = x.eigenvectors();
  const Matrix root = v * x.eigenvalues().cwiseSqrt().asDiagonal() * v.transpose();
  Matrix out = penalty_shift(inst, log_det(x)) * Matrix::Identity(d, d);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const SymEigen e = sym_eigen(SymMatrix(root * inst.mats()[i].mat() * root));
    out.noalias() += inst.weights()[i] *
                     (e.vectors * e.values.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                      e.vectors.transpose());
  }
  return 0.5 * (out + out.transpose());
}

// Smallest bracket end where f changes sign, by bisection on [lo, hi]
// after geometric expansion of hi. Returns (lo, hi) with f(lo) <= 0 < f(hi).
std::pair<double, double> bisect_increasing(const std::function<double(double)>& f, double lo,
                                            double hi) {
  int expansions = 0;
  while (f(lo) > 0.0) {
    lo *= 1e-3;
    if (++expansions > 100) throw NumericalError("bracket: no sign change below");
  }
  while (f(hi) <= 0.0) {
    hi *= 1e3;
    if (++expansions > 200) throw NumericalError("bracket: no sign change above");
  }
  std::uintmax_t max_iter = 500;
  const auto [a, b] = boost::math::tools::bisect(
      [&](double t) { return f(t) <= 0.0 ? -1.0 : 1.0; }, lo, hi,
      [](double l, double r) { return r - l <= 1e-12 * r; }, max_iter);
  if (max_iter >= 500) throw NumericalError("bracket: bisection did not converge");
  return {a, b};
}

// Largest root of t = sqrt(a0) sqrt(t) + c.
double shifted_root(double a0, double c) {
  const double s = std::sqrt(a0);
  const double r = 0.5 * (s + std::sqrt(a0 + 4.0 * c));
  return r * r;
}

LownerInterval feasible_box(const SolverConfig& cfg, double lo, double hi) {
  const double a = std::max(cfg.box.lower(), lo);
  const double b = std::min(cfg.box.upper(), hi);
  if (!(a < b)) {
    // A degenerate bracket (all A_i equal multiples of I) still needs an interval.
    const double mid = 0.5 * (a + b);
    if (a > b * (1.0 + 1e-12)) {
      throw InvalidInput("projection box does not intersect the solution bracket");
    }
    return LownerInterval(mid * (1.0 - 1e-9), mid * (1.0 + 1e-9));
  }
  return LownerInterval(a, b);
}

SpdMatrix initial_point(const SolverConfig& cfg, int d, const LownerInterval& box,
                        std::vector<std::string>& diagnostics) {
  if (cfg.x0 && cfg.x0->dim() != d) throw InvalidInput("x0 has the wrong dimension");
  const SpdMatrix start = cfg.x0 ? *cfg.x0 : SpdMatrix::identity(d);
  SpdMatrix x = lowner_project(start.sym(), box);
  if (cfg.x0 && (x.mat() - start.mat()).norm() > 0.0) {
    diagnostics.push_back("initial point projected onto the feasible box");
  }
  return x;
}

void note_convexity(const ProblemInstance& inst, double a_star, double b_star,
                    std::vector<std::string>& diagnostics) {
  if (!inst.is_q_gaussian() || inst.q() < 1.0 || inst.gamma() == 0.0) return;
  const SpectralBounds b{std::min(a_star, spectral_bounds(inst).alpha),
                         std::max(b_star, spectral_bounds(inst).beta)};
  const ConvexityThreshold t = convexity_gamma_max(inst.q(), inst.dim(), b);
  if (inst.gamma() >= t.gamma_max) {
    std::ostringstream msg;
    msg << "gamma = " << inst.gamma() << " is not below the convexity threshold "
        << t.gamma_max << "; a stationary point need not be the global minimizer";
    diagnostics.push_back(msg.str());
  }
}

}  // namespace

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::GpmArmijo:
      return "gpm-armijo";
    case SolverKind::GpmConst:
      return "gpm-const";
    case SolverKind::FixedPoint:
      return "fixed-point";
  }
  return "unknown";
}

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "gpm-armijo") return SolverKind::GpmArmijo;
  if (name == "gpm-const") return SolverKind::GpmConst;
  if (name == "fixed-point") return SolverKind::FixedPoint;
  throw InvalidInput("unknown solver '" + name + "'");
}

void SolverConfig::validate() const {
  if (!(xi > 0.0 && xi < 1.0)) throw InvalidInput("xi must lie in (0, 1)");
  if (!(sigma > 0.0 && sigma < 1.0)) throw InvalidInput("sigma must lie in (0, 1)");
  if (!(tol > 0.0)) throw InvalidInput("tol must be positive");
  if (max_iter < 1) throw InvalidInput("max_iter must be positive");
  if (max_backtracks < 1) throw InvalidInput("max_backtracks must be positive");
  if (!(damping > 0.0 && damping <= 1.0)) throw InvalidInput("damping must lie in (0, 1]");
  if (lipschitz && !(*lipschitz > 0.0)) throw InvalidInput("Lipschitz constant must be positive");
}

bool SolveReport::monotone() const {
  for (std::size_t k = 1; k < objective_trace.size(); ++k) {
    if (objective_trace[k] > objective_trace[k - 1]) return false;
  }
  return true;
}

double residual(const SpdMatrix& x, const ProblemInstance& inst) {
  return (x.mat() - fixed_point_matrix(x, inst)).norm();
}

SpdMatrix fixed_point_map(const SpdMatrix& x, const ProblemInstance& inst) {
  return SpdMatrix::from(fixed_point_matrix(x, inst));
}

std::pair<double, double> bracket(const ProblemInstance& inst) {
  const SpectralBounds b = spectral_bounds(inst);
  const double gamma = inst.gamma();
  if (inst.is_phi() || gamma == 0.0) return {b.alpha, b.beta};
  if (inst.is_gaussian()) return {shifted_root(b.alpha, gamma), shifted_root(b.beta, gamma)};

  const double q = inst.q();
  const int d = inst.dim();
  const double gm = gamma * family_constants(q, d).m;
  const double p = 0.5 * d * (q - 1.0);

  if (q > 1.0) {
    // t - sqrt(a0 t) - gm t^p has a single positive root since p < 1; the
    // lower bound must sit where the map pushes up, the upper where it pulls down.
    auto root = [&](double a0) {
      const double s = std::sqrt(a0);
      return bisect_increasing(
          [&](double t) { return 1.0 - s / std::sqrt(t) - gm * std::pow(t, p - 1.0); }, 1e-12,
          1e12);
    };
    const double lo = root(b.alpha).first;
    const double hi = root(b.beta).second;
    return {lo, hi};
  }

  // q < 1: the shift decreases with det X, so the ends are coupled through
  // alpha = A(beta), beta = B(alpha); solve beta = B(A(beta)).
  auto alpha_of = [&](double beta) { return shifted_root(b.alpha, gm * std::pow(beta, p)); };
  auto beta_of = [&](double alpha) { return shifted_root(b.beta, gm * std::pow(alpha, p)); };
  const double lo = b.beta;
  const double hi = beta_of(b.alpha);
  double beta_star = hi;
  if (hi > lo) {
    beta_star = bisect_increasing([&](double beta) { return beta - beta_of(alpha_of(beta)); },
                                  lo, hi)
                    .second;
  }
  const double alpha_star = alpha_of(beta_star);
  if (!(alpha_star <= beta_star)) {
    throw NumericalError("bracket: coupled system gave alpha* > beta*");
  }
  return {alpha_star, beta_star};
}

SolveReport solve_gpm(const ProblemInstance& inst, const SolverConfig& cfg) {
  const auto start = Clock::now();
  cfg.validate();
  if (cfg.kind == SolverKind::FixedPoint) throw InvalidInput("solve_gpm: fixed-point config");
  const bool constant = cfg.kind == SolverKind::GpmConst;

  SolveReport report;
  LownerInterval box = cfg.box;
  double step = 1.0;
  if (constant || cfg.tight_box) {
    const auto [a_star, b_star] = bracket(inst);
    const SpectralBounds sb = spectral_bounds(inst);
    const double lo = std::min(a_star, sb.alpha);
    const double hi = std::max(b_star, sb.beta);
    box = cfg.tight_box ? feasible_box(cfg, a_star, b_star) : feasible_box(cfg, lo, hi);
    if (constant) {
      const double l = cfg.lipschitz ? *cfg.lipschitz
                                     : lipschitz_bound(inst, {box.lower(), box.upper()});
      step = std::min(1.0, 1.0 / l);
    }
    note_convexity(inst, a_star, b_star, report.diagnostics);
  }

  const ObjectiveEvaluator eval(inst);
  ObjectiveEvaluator::Point p = eval.at(initial_point(cfg, inst.dim(), box, report.diagnostics));
  double psi = p.value;
  report.objective_trace.push_back(psi);

  int k = 0;
  for (;; ++k) {
    const SymMatrix g = eval.gradient(p);
    const SpdMatrix bar = lowner_project(SymMatrix(p.x.mat() - g.mat()), box);
    const Matrix dir = bar.mat() - p.x.mat();
    const double dn = dir.norm();
    report.direction_norms.push_back(dn);
    if (dn <= cfg.tol) {
      report.converged = true;
      break;
    }
    if (k >= cfg.max_iter) break;

    const double slope = g.mat().cwiseProduct(dir).sum();
    double t = step;
    ObjectiveEvaluator::Point trial = eval.at(SpdMatrix::clipped(SymMatrix(p.x.mat() + t * dir)));
    double delta = eval.difference(p, trial);
    if (!constant) {
      int backtracks = 0;
      while (!(delta <= cfg.sigma * t * slope)) {
        if (++backtracks > cfg.max_backtracks) {
          std::ostringstream msg;
          msg << "Armijo backtracking exceeded " << cfg.max_backtracks
              << " reductions at iteration " << k << " (|D| = " << dn << ")";
          throw StepsizeFailure(msg.str());
        }
        t *= cfg.xi;
        trial = eval.at(SpdMatrix::clipped(SymMatrix(p.x.mat() + t * dir)));
        delta = eval.difference(p, trial);
      }
    }
    psi += delta;
    report.objective_trace.push_back(psi);
    report.step_sizes.push_back(t);
    p = std::move(trial);
  }

  report.iterations = k;
  report.final_direction_norm = report.direction_norms.back();
  report.x_final = p.x;
  report.residual_norm = residual(p.x, inst);
  report.wall_time = seconds_since(start);
  return report;
}

SolveReport solve_fixed_point(const ProblemInstance& inst, const SolverConfig& cfg) {
  const auto start = Clock::now();
  cfg.validate();
  SolveReport report;
  const auto [a_star, b_star] = bracket(inst);
  note_convexity(inst, a_star, b_star, report.diagnostics);
  const LownerInterval box = feasible_box(cfg, a_star, b_star);
  const ObjectiveEvaluator eval(inst);
  SpdMatrix x = initial_point(cfg, inst.dim(), box, report.diagnostics);

  int k = 0;
  for (;; ++k) {
    report.objective_trace.push_back(eval.at(x).value);
    const Matrix next = fixed_point_matrix(x, inst);
    const double dn = (next - x.mat()).norm();
    report.direction_norms.push_back(dn);
    if (dn <= cfg.tol) {
      report.converged = true;
      break;
    }
    if (k >= cfg.max_iter || !std::isfinite(dn)) break;
    x = SpdMatrix::clipped(SymMatrix((1.0 - cfg.damping) * x.mat() + cfg.damping * next));
    report.step_sizes.push_back(cfg.damping);
  }
  if (!report.monotone()) report.diagnostics.push_back("objective increased along the iteration");

  report.iterations = k;
  report.final_direction_norm = report.direction_norms.back();
  report.x_final = x;
  report.residual_norm = residual(x, inst);
  report.wall_time = seconds_since(start);
  return report;
}

SolveReport solve(const ProblemInstance& inst, const SolverConfig& cfg) {
  if (cfg.kind == SolverKind::FixedPoint) return solve_fixed_point(inst, cfg);
  return solve_gpm(inst, cfg);
}

double closed_form_1d(const ProblemInstance& inst) {
  if (inst.dim() != 1 || !inst.is_gaussian()) {
    throw InvalidInput("closed_form_1d needs a one-dimensional Gaussian instance");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    s += inst.weights()[i] * std::sqrt(inst.mats()[i].mat()(0, 0));
  }
  const double r = s + std::sqrt(s * s + 4.0 * inst.gamma());
  return 0.25 * r * r;
}

SpdMatrix closed_form_two_measures(const SpdMatrix& a1, const SpdMatrix& a2, double l1,
                                   double l2) {
  if (a1.dim() != a2.dim()) throw InvalidInput("closed_form_two_measures: dimension mismatch");
  if (!(l1 >= 0.0 && l2 >= 0.0) || std::abs(l1 + l2 - 1.0) > 1e-12) {
    throw InvalidInput("closed_form_two_measures: weights must be nonnegative and sum to one");
  }
  // (A1 A2)^{1/2} = A1^{1/2} (A1^{1/2} A2 A1^{1/2})^{1/2} A1^{-1/2}; its transpose is (A2 A1)^{1/2}.
  const Matrix& v = a1.eigenvectors();
  const Vector s = a1.eigenvalues().cwiseSqrt();
  const Matrix half = v * s.asDiagonal() * v.transpose();
  const Matrix neg_half = v * s.cwiseInverse().asDiagonal() * v.transpose();
  const SpdMatrix middle = SpdMatrix::from(Matrix(half * a2.mat() * half));
  const Matrix root = half * spd_power(middle, 0.5).mat() * neg_half;
  const Matrix x = l1 * l1 * a1.mat() + l2 * l2 * a2.mat() + l1 * l2 * (root + root.transpose());
  return SpdMatrix::from(x);
}

}  // namespace wbary
