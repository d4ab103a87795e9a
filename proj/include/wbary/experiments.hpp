#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "wbary/solvers.hpp"

namespace wbary {

/// Random instance recipe: A_i = Q diag(eiglb + eigub * u) Q^T with u uniform
/// on [0, 1)^d and Q the orthogonal factor of a standard normal d x d draw.
struct GenSpec {
  int n = 100;
  int d = 10;
  double eiglb = 0.1;
  double eigub = 9.9;
  std::uint64_t seed = 42;

  void validate() const;
};

/// Counter-based 64-bit generator: output k is a SplitMix64 finalizer applied
/// to key + k * golden_gamma, so each output is addressable and streams with
/// different keys are independent for practical purposes.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::vector<SpdMatrix> gen_random_instance(const GenSpec& spec);

/// Matrices of dataset `index` in an experiment: the spec seed XOR the index.
std::vector<SpdMatrix> gen_dataset(const GenSpec& spec, int index);

struct ExperimentRecord {
  double q = 0.0;
  double gamma = 0.0;
  /// NaN for q-sweep records.
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  int dataset = 0;
  double metric = 0.0;
  double runtime = 0.0;
  int iterations = 0;
  bool converged = false;
  bool monotone = true;
  /// Largest optimality residual among the solves behind the record.
  double residual = 0.0;
  double direction_norm = 0.0;
  std::string error;
};

struct ExperimentOptions {
  SolverConfig solver;
  /// Datasets solved concurrently; results do not depend on it.
  int threads = 1;
};

/// For each dataset and gamma, metric = ||X_base - X_q||_F with every solve
/// on the same matrices. Records are ordered by (q, gamma, dataset).
std::vector<ExperimentRecord> run_q_sweep(double base_q, const std::vector<double>& qs,
                                          const std::vector<double>& gammas, const GenSpec& spec,
                                          int datasets, const ExperimentOptions& opts = {});

/// metric = ||X_B - X_A||_F / epsilon with B_i = A_i + epsilon I. Records are
/// ordered by (q, gamma, epsilon, dataset).
std::vector<ExperimentRecord> run_stability(const std::vector<double>& qs,
                                            const std::vector<double>& gammas,
                                            const std::vector<double>& epsilons,
                                            const GenSpec& spec, int datasets,
                                            const ExperimentOptions& opts = {});

/// CSV with header q,gamma,epsilon,dataset,metric,iterations,runtime_s. The
/// runtime column is left empty unless `timing` is set, so output is
/// reproducible byte for byte.
void write_csv(std::ostream& out, const std::vector<ExperimentRecord>& records, bool timing);

/// One table per (gamma, epsilon) with a row per q and a column per dataset.
void write_markdown(std::ostream& out, const std::vector<ExperimentRecord>& records);

}  // namespace wbary
