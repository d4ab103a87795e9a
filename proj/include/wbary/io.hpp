#pragma once

#include <json.hpp>
#include <string>

#include "wbary/solvers.hpp"

namespace wbary {

/// Problem file:
///   {"family": "gaussian" | "q-gaussian" | "phi-exponential",
///    "q": number (q-gaussian only), "phi_power": number (phi-exponential, default 1),
///    "gamma": number, "weights": [number] (default uniform),
///    "matrices": [[d*d numbers, row-major], ...]}
/// Matrices must be symmetric within 1e-9 (relative to their largest entry).
/// Throws InvalidInput / DomainError on malformed content.
ProblemInstance parse_problem(const nlohmann::json& j);
ProblemInstance read_problem(const std::string& path);

nlohmann::json problem_to_json(const ProblemInstance& inst);

/// {"x", "residual", "iterations", "converged", "direction_norms", "objective",
///  "step_sizes", "wall_time", "diagnostics"}.
nlohmann::json report_to_json(const SolveReport& report);

nlohmann::json matrix_to_json(const Matrix& m);

}  // namespace wbary
