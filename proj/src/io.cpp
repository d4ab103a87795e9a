#include "wbary/io.hpp"

#include <cmath>
#include <fstream>

namespace wbary {

namespace {

using nlohmann::json;

double number_field(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidInput(std::string("problem: missing field '") + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) throw InvalidInput(std::string("problem: field '") + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw InvalidInput(std::string("problem: field '") + key + "' is not finite");
  return x;
}

SpdMatrix parse_matrix(const json& j, std::size_t index) {
  const std::string where = "problem: matrices[" + std::to_string(index) + "]";
  if (!j.is_array() || j.empty()) throw InvalidInput(where + " must be a non-empty array");
  const auto count = j.size();
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(count))));
  if (static_cast<std::size_t>(d * d) != count) {
    throw InvalidInput(where + " has " + std::to_string(count) + " entries, not a square count");
  }
  Matrix m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const json& v = j[static_cast<std::size_t>(r * d + c)];
      if (!v.is_number()) throw InvalidInput(where + " has a non-numeric entry");
      m(r, c) = v.get<double>();
    }
  }
  if (!m.allFinite()) throw InvalidInput(where + " has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw InvalidInput(where + " is not symmetric");
  }
  try {
    return SpdMatrix::from(m);
  } catch (const InvalidInput& e) {
    throw InvalidInput(where + ": " + e.what());
  }
}

}  // namespace

ProblemInstance parse_problem(const json& j) {
  if (!j.is_object()) throw InvalidInput("problem: top level must be an object");
  if (!j.contains("family") || !j.at("family").is_string()) {
    throw InvalidInput("problem: missing string field 'family'");
  }
  const std::string name = j.at("family").get<std::string>();
  MeasureFamily family = GaussianFamily{};
  if (name == "gaussian") {
    family = GaussianFamily{};
  } else if (name == "q-gaussian") {
    family = QGaussianFamily{number_field(j, "q")};
  } else if (name == "phi-exponential") {
    const double p = j.contains("phi_power") ? number_field(j, "phi_power") : 1.0;
    family = PhiExponentialFamily{PhiSpec::power(p)};
  } else {
    throw InvalidInput("problem: unknown family '" + name + "'");
  }
  if (name != "q-gaussian" && j.contains("q")) {
    throw InvalidInput("problem: 'q' is only valid for the q-gaussian family");
  }

  const double gamma = j.contains("gamma") ? number_field(j, "gamma") : 0.0;

  if (!j.contains("matrices") || !j.at("matrices").is_array()) {
    throw InvalidInput("problem: missing array field 'matrices'");
  }
  std::vector<SpdMatrix> mats;
  for (std::size_t i = 0; i < j.at("matrices").size(); ++i) {
    mats.push_back(parse_matrix(j.at("matrices")[i], i));
  }
  if (!j.contains("weights")) return ProblemInstance::uniform(std::move(family), std::move(mats), gamma);

  const json& w = j.at("weights");
  if (!w.is_array()) throw InvalidInput("problem: 'weights' must be an array");
  std::vector<double> weights;
  for (const auto& v : w) {
    if (!v.is_number()) throw InvalidInput("problem: weights must be numbers");
    weights.push_back(v.get<double>());
  }
  return ProblemInstance(std::move(family), std::move(mats), std::move(weights), gamma);
}

ProblemInstance read_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open problem file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidInput("problem file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_problem(j);
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

json problem_to_json(const ProblemInstance& inst) {
  json j;
  j["family"] = family_name(inst.family());
  if (inst.is_q_gaussian()) j["q"] = inst.q();
  if (const auto* phi = std::get_if<PhiExponentialFamily>(&inst.family())) {
    const auto p = phi->phi.power_exponent();
    if (!p) throw InvalidInput("only power-law phi functions can be written to a problem file");
    j["phi_power"] = *p;
  }
  j["gamma"] = inst.gamma();
  j["weights"] = inst.weights();
  json mats = json::array();
  for (const auto& a : inst.mats()) mats.push_back(matrix_to_json(a.mat()));
  j["matrices"] = std::move(mats);
  return j;
}

json report_to_json(const SolveReport& report) {
  json j;
  j["x"] = matrix_to_json(report.x_final.mat());
  j["dim"] = report.x_final.dim();
  j["residual"] = report.residual_norm;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  j["direction_norms"] = report.direction_norms;
  j["objective"] = report.objective_trace;
  j["step_sizes"] = report.step_sizes;
  j["wall_time"] = report.wall_time;
  j["diagnostics"] = report.diagnostics;
  return j;
}

}  // namespace wbary
