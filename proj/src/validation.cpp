#include "wbary/validation.hpp"

#include <boost/random/uniform_real_distribution.hpp>
#include <cmath>
#include <functional>
#include <sstream>

#include "wbary/experiments.hpp"

namespace wbary {

namespace {

class Checker {
 public:
  explicit Checker(std::vector<CheckResult>& out) : out_(out) {}

  void run(const std::string& name, const std::function<std::string()>& body) {
    try {
      const std::string failure = body();
      out_.push_back({name, failure.empty(), failure});
    } catch (const std::exception& e) {
      out_.push_back({name, false, std::string("threw: ") + e.what()});
    }
  }

 private:
  std::vector<CheckResult>& out_;
};

std::string worse(double value, double limit) {
  if (value <= limit) return {};
  std::ostringstream msg;
  msg << "max error " << value << " exceeds " << limit;
  return msg.str();
}

SymMatrix random_sym(CounterRng& rng, int d) {
  boost::random::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix h(d, d);
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < d; ++r) h(r, c) = u(rng);
  }
  return SymMatrix(h);
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Checker check(out);
  CounterRng rng(seed);
  boost::random::uniform_real_distribution<double> unit(0.0, 1.0);
  const GenSpec small{4, 4, 0.5, 4.5, seed};
  const auto mats = gen_random_instance(small);

  check.run("geometric mean is symmetric", [&] {
    double err = 0.0;
    for (std::size_t i = 0; i + 1 < mats.size(); ++i) {
      const Matrix ab = geometric_mean(mats[i], mats[i + 1]).mat();
      const Matrix ba = geometric_mean(mats[i + 1], mats[i]).mat();
      err = std::max(err, (ab - ba).norm() / ab.norm());
    }
    return worse(err, 1e-10);
  });

  check.run("Lowner projection is idempotent", [&] {
    const LownerInterval box(1.0, 3.0);
    for (const auto& a : mats) {
      const SpdMatrix p = lowner_project(a.sym(), box);
      const SpdMatrix pp = lowner_project(p.sym(), box);
      if ((p.mat() - pp.mat()).norm() != 0.0) return std::string("projection moved a projected point");
    }
    return std::string();
  });

  check.run("q-log product rule", [&] {
    double err = 0.0;
    for (int k = 0; k < 50; ++k) {
      const double q = 0.1 + 1.3 * unit(rng);
      const double x = 0.1 + 10.0 * unit(rng);
      const double y = 0.1 + 10.0 * unit(rng);
      const double lx = q_log(q, x);
      const double ly = q_log(q, y);
      const double lhs = q_log(q, x * y);
      err = std::max(err, std::abs(lhs - (lx + ly + (1.0 - q) * lx * ly)) / std::max(1.0, std::abs(lhs)));
    }
    return worse(err, 1e-12);
  });

  check.run("W2 triangle inequality", [&] {
    for (std::size_t i = 0; i + 2 < mats.size(); ++i) {
      const Measure a = GaussianMeasure::centered(mats[i]);
      const Measure b = GaussianMeasure::centered(mats[i + 1]);
      const Measure c = GaussianMeasure::centered(mats[i + 2]);
      if (w2_distance(a, c) > w2_distance(a, b) + w2_distance(b, c) + 1e-9) {
        return std::string("triangle inequality violated");
      }
    }
    return std::string();
  });

  const std::vector<MeasureFamily> families = {GaussianFamily{}, QGaussianFamily{0.7},
                                               QGaussianFamily{1.1}};
  check.run("gradient matches central differences", [&] {
    double err = 0.0;
    for (const auto& fam : families) {
      const ProblemInstance inst = ProblemInstance::uniform(fam, mats, 0.1);
      for (int k = 0; k < 5; ++k) {
        const SpdMatrix x = SpdMatrix::from(Matrix(mats[static_cast<std::size_t>(k % 4)].mat() +
                                                   Matrix::Identity(4, 4)));
        const SymMatrix h = random_sym(rng, 4);
        const double step = 1e-5;
        const double fp = objective_value(SpdMatrix::from(Matrix(x.mat() + step * h.mat())), inst);
        const double fm = objective_value(SpdMatrix::from(Matrix(x.mat() - step * h.mat())), inst);
        const double fd = (fp - fm) / (2.0 * step);
        const double an = frobenius(gradient(x, inst), h).inner;
        err = std::max(err, std::abs(fd - an) / std::max(1e-8, std::abs(an)));
      }
    }
    return worse(err, 1e-5);
  });

  check.run("empirical Lipschitz ratio below the bound", [&] {
    for (const auto& fam : families) {
      const ProblemInstance inst = ProblemInstance::uniform(fam, mats, 0.1);
      const SpectralBounds b = spectral_bounds(inst);
      const double bound = lipschitz_bound(inst, b);
      for (int k = 0; k < 20; ++k) {
        auto sample = [&] {
          const SymEigen e = sym_eigen(random_sym(rng, 4));
          Vector v(4);
          for (int i = 0; i < 4; ++i) v(i) = b.alpha + (b.beta - b.alpha) * unit(rng);
          return SpdMatrix::from_eigen(v, e.vectors);
        };
        const SpdMatrix x = sample();
        const SpdMatrix y = sample();
        const double ratio = (gradient(x, inst).mat() - gradient(y, inst).mat()).norm() /
                             (x.mat() - y.mat()).norm();
        if (ratio > bound) return worse(ratio, bound);
      }
    }
    return std::string();
  });

  check.run("bracket is mapped into itself", [&] {
    for (const auto& fam : families) {
      const ProblemInstance inst = ProblemInstance::uniform(fam, mats, 0.1);
      const auto [lo, hi] = bracket(inst);
      for (int k = 0; k < 10; ++k) {
        const SymEigen e = sym_eigen(random_sym(rng, 4));
        Vector v(4);
        for (int i = 0; i < 4; ++i) v(i) = lo + (hi - lo) * unit(rng);
        const SpdMatrix fx = fixed_point_map(SpdMatrix::from_eigen(v, e.vectors), inst);
        if (fx.lambda_min() < lo * (1.0 - 1e-10) || fx.lambda_max() > hi * (1.0 + 1e-10)) {
          return std::string("map left [alpha*, beta*] for ") + family_name(fam);
        }
      }
    }
    return std::string();
  });

  check.run("solvers agree", [&] {
    const ProblemInstance inst = ProblemInstance::uniform(GaussianFamily{}, mats, 0.1);
    SolverConfig cfg;
    const SolveReport a = solve_gpm(inst, cfg);
    cfg.kind = SolverKind::FixedPoint;
    const SolveReport f = solve_fixed_point(inst, cfg);
    if (!a.converged || !f.converged) return std::string("a solver did not converge");
    if (!a.monotone()) return std::string("Armijo objective trace increased");
    return worse((a.x_final.mat() - f.x_final.mat()).norm(), 1e-6);
  });

  return out;
}

}  // namespace wbary
