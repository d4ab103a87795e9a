#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wbary/objective.hpp"

namespace wbary {

enum class SolverKind { GpmArmijo, GpmConst, FixedPoint };

std::string to_string(SolverKind kind);
/// Accepts "gpm-armijo", "gpm-const", "fixed-point". Throws InvalidInput.
SolverKind parse_solver_kind(const std::string& name);

struct SolverConfig {
  SolverKind kind = SolverKind::GpmArmijo;
  LownerInterval box{1e-5, 1e5};
  /// Replace the box by the bracket [alpha*, beta*] (intersected with box).
  bool tight_box = false;
  double xi = 0.5;
  double sigma = 0.1;
  double tol = 1e-8;
  int max_iter = 100000;
  int max_backtracks = 60;
  /// Defaults to the identity (projected onto the feasible box).
  std::optional<SpdMatrix> x0;
  /// Fixed-point damping: X <- (1 - theta) X + theta F(X).
  double damping = 1.0;
  /// Overrides the computed Lipschitz constant for gpm-const.
  std::optional<double> lipschitz;
  /// Keep per-iteration traces; experiments switch this off.
  bool record_trace = true;

  void validate() const;
};

struct SolveReport {
  SpdMatrix x_final = SpdMatrix::identity(1);
  int iterations = 0;
  double residual_norm = 0.0;
  double final_direction_norm = 0.0;
  std::vector<double> direction_norms;
  std::vector<double> objective_trace;
  std::vector<double> step_sizes;
  bool converged = false;
  double wall_time = 0.0;
  std::vector<std::string> diagnostics;

  /// objective_trace is non-increasing.
  bool monotone() const;
};

/// ||X - c(X) I - sum_i lambda_i (X^{1/2} A_i X^{1/2})^{1/2}||_F.
double residual(const SpdMatrix& x, const ProblemInstance& inst);

/// F(X) = sum_i lambda_i (X^{1/2} A_i X^{1/2})^{1/2} + c(X) I.
SpdMatrix fixed_point_map(const SpdMatrix& x, const ProblemInstance& inst);

/// Interval [alpha*, beta*] mapped into itself by fixed_point_map, which
/// therefore contains a solution.
std::pair<double, double> bracket(const ProblemInstance& inst);

SolveReport solve_gpm(const ProblemInstance& inst, const SolverConfig& cfg);
SolveReport solve_fixed_point(const ProblemInstance& inst, const SolverConfig& cfg);
SolveReport solve(const ProblemInstance& inst, const SolverConfig& cfg);

/// Scalar Gaussian solution [s + sqrt(s^2 + 4 gamma)]^2 / 4 with s = sum lambda_i sqrt(a_i).
double closed_form_1d(const ProblemInstance& inst);

/// Unpenalized barycenter of two measures:
/// l1^2 A1 + l2^2 A2 + l1 l2 [(A1 A2)^{1/2} + (A2 A1)^{1/2}].
SpdMatrix closed_form_two_measures(const SpdMatrix& a1, const SpdMatrix& a2, double l1, double l2);

}  // namespace wbary
