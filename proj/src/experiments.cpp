#include "wbary/experiments.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <thread>

namespace wbary {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t splitmix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Runs task(i) for i in [0, count) on up to `threads` workers.
void for_each_index(int count, int threads, const std::function<void(int)>& task) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next++; i < count; i = next++) task(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Solved {
  SolveReport report;
  std::string error;
};

Solved run_solver(const ProblemInstance& inst, const SolverConfig& cfg) {
  try {
    return {solve(inst, cfg), {}};
  } catch (const Error& e) {
    return {SolveReport{}, e.what()};
  }
}

void fill_from(ExperimentRecord& rec, const Solved& a, const Solved& b) {
  rec.error = !a.error.empty() ? a.error : b.error;
  if (!rec.error.empty()) {
    rec.metric = std::numeric_limits<double>::quiet_NaN();
    rec.converged = false;
    return;
  }
  rec.runtime = b.report.wall_time;
  rec.iterations = b.report.iterations;
  rec.converged = a.report.converged && b.report.converged;
  rec.monotone = a.report.monotone() && b.report.monotone();
  rec.residual = std::max(a.report.residual_norm, b.report.residual_norm);
  rec.direction_norm = std::max(a.report.final_direction_norm, b.report.final_direction_norm);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void GenSpec::validate() const {
  if (n < 1 || d < 1) throw InvalidInput("GenSpec: n and d must be positive");
  if (!(eiglb > 0.0) || !(eigub > 0.0) || !std::isfinite(eiglb + eigub)) {
    throw InvalidInput("GenSpec: eiglb and eigub must be positive");
  }
}

CounterRng::result_type CounterRng::operator()() {
  ++counter_;
  return splitmix(key_ + counter_ * kGolden);
}

std::vector<SpdMatrix> gen_random_instance(const GenSpec& spec) {
  spec.validate();
  CounterRng rng(spec.seed);
  boost::random::normal_distribution<double> normal;
  boost::random::uniform_01<double> uniform;
  const int d = spec.d;
  std::vector<SpdMatrix> out;
  out.reserve(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    Matrix g(d, d);
    for (int c = 0; c < d; ++c) {
      for (int r = 0; r < d; ++r) g(r, c) = normal(rng);
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(d, d);
    const Matrix& rfac = qr.matrixQR();
    for (int k = 0; k < d; ++k) {
      if (rfac(k, k) < 0.0) q.col(k) *= -1.0;
    }
    Vector eig(d);
    for (int k = 0; k < d; ++k) eig(k) = spec.eiglb + spec.eigub * uniform(rng);
    out.push_back(SpdMatrix::from_eigen(eig, q));
  }
  return out;
}

std::vector<SpdMatrix> gen_dataset(const GenSpec& spec, int index) {
  GenSpec s = spec;
  s.seed = spec.seed ^ static_cast<std::uint64_t>(index);
  return gen_random_instance(s);
}

std::vector<ExperimentRecord> run_q_sweep(double base_q, const std::vector<double>& qs,
                                          const std::vector<double>& gammas, const GenSpec& spec,
                                          int datasets, const ExperimentOptions& opts) {
  spec.validate();
  if (datasets < 1) throw InvalidInput("need at least one dataset");
  for (double q : qs) {
    if (q != 1.0 && !q_admissible(q, spec.d)) throw DomainError("q-sweep: inadmissible q");
  }
  if (base_q != 1.0 && !q_admissible(base_q, spec.d)) throw DomainError("q-sweep: inadmissible base q");

  const std::size_t nq = qs.size();
  const std::size_t ng = gammas.size();
  const auto nd = static_cast<std::size_t>(datasets);
  std::vector<ExperimentRecord> records(nq * ng * nd);

  for_each_index(datasets, opts.threads, [&](int ds) {
    const ProblemInstance base_inst =
        ProblemInstance::uniform(family_for_q(base_q), gen_dataset(spec, ds), 0.0);
    for (std::size_t gi = 0; gi < ng; ++gi) {
      const ProblemInstance at_gamma = base_inst.with_gamma(gammas[gi]);
      const Solved base = run_solver(at_gamma, opts.solver);
      for (std::size_t qi = 0; qi < nq; ++qi) {
        ExperimentRecord& rec = records[(qi * ng + gi) * nd + static_cast<std::size_t>(ds)];
        rec.q = qs[qi];
        rec.gamma = gammas[gi];
        rec.dataset = ds;
        const Solved other = qs[qi] == base_q
                                 ? base
                                 : run_solver(at_gamma.with_family(family_for_q(qs[qi])),
                                              opts.solver);
        fill_from(rec, base, other);
        if (rec.error.empty()) {
          rec.metric = (base.report.x_final.mat() - other.report.x_final.mat()).norm();
        }
      }
    }
  });
  return records;
}

std::vector<ExperimentRecord> run_stability(const std::vector<double>& qs,
                                            const std::vector<double>& gammas,
                                            const std::vector<double>& epsilons,
                                            const GenSpec& spec, int datasets,
                                            const ExperimentOptions& opts) {
  spec.validate();
  if (datasets < 1) throw InvalidInput("need at least one dataset");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw InvalidInput("stability: epsilon must be positive");
  }
  for (double q : qs) {
    if (q != 1.0 && !q_admissible(q, spec.d)) throw DomainError("stability: inadmissible q");
  }

  const std::size_t nq = qs.size();
  const std::size_t ng = gammas.size();
  const std::size_t ne = epsilons.size();
  const auto nd = static_cast<std::size_t>(datasets);
  std::vector<ExperimentRecord> records(nq * ng * ne * nd);

  for_each_index(datasets, opts.threads, [&](int ds) {
    const std::vector<SpdMatrix> mats = gen_dataset(spec, ds);
    std::vector<std::vector<SpdMatrix>> perturbed(ne);
    for (std::size_t ei = 0; ei < ne; ++ei) {
      for (const auto& a : mats) {
        Matrix b = a.mat();
        b.diagonal().array() += epsilons[ei];
        perturbed[ei].push_back(SpdMatrix::from(b));
      }
    }
    for (std::size_t qi = 0; qi < nq; ++qi) {
      for (std::size_t gi = 0; gi < ng; ++gi) {
        const ProblemInstance inst_a =
            ProblemInstance::uniform(family_for_q(qs[qi]), mats, gammas[gi]);
        const Solved sol_a = run_solver(inst_a, opts.solver);
        for (std::size_t ei = 0; ei < ne; ++ei) {
          ExperimentRecord& rec =
              records[((qi * ng + gi) * ne + ei) * nd + static_cast<std::size_t>(ds)];
          rec.q = qs[qi];
          rec.gamma = gammas[gi];
          rec.epsilon = epsilons[ei];
          rec.dataset = ds;
          const Solved sol_b = run_solver(inst_a.with_mats(perturbed[ei]), opts.solver);
          fill_from(rec, sol_a, sol_b);
          if (rec.error.empty()) {
            rec.metric =
                (sol_b.report.x_final.mat() - sol_a.report.x_final.mat()).norm() / epsilons[ei];
          }
        }
      }
    }
  });
  return records;
}

void write_csv(std::ostream& out, const std::vector<ExperimentRecord>& records, bool timing) {
  out << "q,gamma,epsilon,dataset,metric,iterations,runtime_s\n";
  for (const auto& r : records) {
    out << fmt(r.q) << ',' << fmt(r.gamma) << ',' << (std::isnan(r.epsilon) ? "" : fmt(r.epsilon))
        << ',' << r.dataset << ',' << fmt(r.metric) << ',' << r.iterations << ','
        << (timing ? fmt(r.runtime) : "") << '\n';
  }
}

void write_markdown(std::ostream& out, const std::vector<ExperimentRecord>& records) {
  // Group by (gamma, epsilon) in order of first appearance.
  std::vector<std::pair<double, double>> groups;
  auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
  for (const auto& r : records) {
    const bool seen = std::any_of(groups.begin(), groups.end(), [&](const auto& g) {
      return same(g.first, r.gamma) && same(g.second, r.epsilon);
    });
    if (!seen) groups.emplace_back(r.gamma, r.epsilon);
  }
  int datasets = 0;
  for (const auto& r : records) datasets = std::max(datasets, r.dataset + 1);

  bool first = true;
  for (const auto& [gamma, eps] : groups) {
    if (!first) out << '\n';
    first = false;
    out << "gamma = " << fmt(gamma);
    if (!std::isnan(eps)) out << ", epsilon = " << fmt(eps);
    out << "\n\n| q |";
    for (int k = 0; k < datasets; ++k) out << " set " << (k + 1) << " |";
    out << "\n|---|";
    for (int k = 0; k < datasets; ++k) out << "---|";
    out << '\n';
    std::map<int, const ExperimentRecord*> row;
    double row_q = std::numeric_limits<double>::quiet_NaN();
    auto flush = [&] {
      if (row.empty()) return;
      out << "| " << fmt(row_q) << " |";
      for (int k = 0; k < datasets; ++k) {
        const auto it = row.find(k);
        out << ' ' << (it == row.end() ? std::string("") : fmt(it->second->metric)) << " |";
      }
      out << '\n';
      row.clear();
    };
    for (const auto& r : records) {
      if (!same(r.gamma, gamma) || !same(r.epsilon, eps)) continue;
      if (!same(r.q, row_q)) {
        flush();
        row_q = r.q;
      }
      row[r.dataset] = &r;
    }
    flush();
  }
}

}  // namespace wbary
