#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "wbary/solvers.hpp"

using namespace wbary;

namespace {

SpdMatrix scalar(double v) { return SpdMatrix::from(Matrix::Constant(1, 1, v)); }

SpdMatrix diag(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double e : v) x(k++) = e;
  return SpdMatrix::from(Matrix(x.asDiagonal()));
}

std::vector<SpdMatrix> random_mats(CounterRng& rng, int n, int d, double lo = 0.1, double hi = 10.0) {
  std::vector<SpdMatrix> out;
  for (int i = 0; i < n; ++i) out.push_back(oracle::random_spd(rng, d, lo, hi));
  return out;
}

SpdMatrix sample_in(CounterRng& rng, int d, double lo, double hi) { return oracle::random_spd(rng, d, lo, hi); }

void expect_report_invariants(const SolveReport& r, const ProblemInstance& inst, const SolverConfig& cfg) {
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.direction_norms.back(), cfg.tol);
  EXPECT_LE(r.residual_norm, 100.0 * cfg.tol);
  EXPECT_TRUE(r.monotone());
  EXPECT_TRUE(cfg.box.contains(r.x_final, 1e-12));
  // Stationarity as a projected fixed point.
  const SymMatrix g = gradient(r.x_final, inst);
  const SpdMatrix bar = lowner_project(SymMatrix(Matrix(r.x_final.mat() - g.mat())), cfg.box);
  EXPECT_LE((bar.mat() - r.x_final.mat()).norm(), cfg.tol);
}

}  // namespace

TEST(SolverKind, Parse) {
  EXPECT_EQ(parse_solver_kind("gpm-armijo"), SolverKind::GpmArmijo);
  EXPECT_EQ(parse_solver_kind("gpm-const"), SolverKind::GpmConst);
  EXPECT_EQ(parse_solver_kind("fixed-point"), SolverKind::FixedPoint);
  EXPECT_THROW(parse_solver_kind("newton"), InvalidInput);
  EXPECT_EQ(to_string(SolverKind::GpmConst), "gpm-const");
}

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.xi = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = {};
  cfg.sigma = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = {};
  cfg.tol = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = {};
  cfg.damping = 1.5;
  EXPECT_THROW(cfg.validate(), InvalidInput);
}

TEST(Residual, Examples) {
  const auto one = ProblemInstance::uniform(GaussianFamily{}, {scalar(1.0)}, 2.0);
  EXPECT_NEAR(residual(scalar(4.0), one), 0.0, 1e-15);
  const auto four = ProblemInstance::uniform(GaussianFamily{}, {SpdMatrix::from(Matrix(4.0 * Matrix::Identity(3, 3)))}, 0.0);
  EXPECT_NEAR(residual(SpdMatrix::identity(3), four), std::sqrt(3.0), 1e-14);
  CounterRng rng(103);
  const auto mats = random_mats(rng, 2, 5);
  const auto phi = ProblemInstance(PhiExponentialFamily{PhiSpec::power(0.6)}, mats, {0.3, 0.7}, 0.0);
  EXPECT_LE(residual(closed_form_two_measures(mats[0], mats[1], 0.3, 0.7), phi), 1e-10);
}

TEST(FixedPointMap, Examples) {
  const auto one = ProblemInstance::uniform(GaussianFamily{}, {scalar(1.0)}, 2.0);
  EXPECT_NEAR(fixed_point_map(scalar(4.0), one).mat()(0, 0), 4.0, 1e-15);
  CounterRng rng(107);
  const SpdMatrix a = oracle::random_spd(rng, 4, 0.5, 5.0);
  const auto same = ProblemInstance::uniform(GaussianFamily{}, {a, a, a}, 0.0);
  EXPECT_LE((fixed_point_map(a, same).mat() - a.mat()).norm(), 1e-12);
}

TEST(Bracket, GaussianExamples) {
  const auto inst = ProblemInstance::uniform(GaussianFamily{}, {diag({1.0, 3.0})}, 2.0);
  EXPECT_DOUBLE_EQ(bracket(inst).first, 4.0);
  const auto [lo, hi] = bracket(inst.with_gamma(0.0));
  EXPECT_EQ(lo, 1.0);
  EXPECT_EQ(hi, 3.0);
}

TEST(Bracket, QAboveOneMatchesBisectionOracle) {
  const double q = 1.1, gamma = 0.01;
  const auto inst = ProblemInstance::uniform(QGaussianFamily{q}, {diag({0.1, 1.0, 2.0, 5.0, 10.0})}, gamma);
  const auto [lo, hi] = bracket(inst);
  const double gm = gamma * family_constants(q, 5).m;
  const double p = 0.5 * 5 * (q - 1.0);
  // Sign change of t - sqrt(a0 t) - gm t^p across each end.
  auto h = [&](double a0, double t) { return t - std::sqrt(a0 * t) - gm * std::pow(t, p); };
  EXPECT_LE(h(0.1, lo), 0.0);
  EXPECT_GT(h(0.1, lo * (1.0 + 1e-11)), 0.0);
  EXPECT_GE(h(10.0, hi), 0.0);
  EXPECT_LT(h(10.0, hi * (1.0 - 1e-11)), 0.0);
  EXPECT_LT(lo, hi);
}

TEST(Bracket, SelfMapAllFamilies) {
  CounterRng rng(109);
  const std::vector<MeasureFamily> fams = {GaussianFamily{}, QGaussianFamily{0.3}, QGaussianFamily{0.9},
                                           QGaussianFamily{1.05}, QGaussianFamily{1.25},
                                           PhiExponentialFamily{PhiSpec::power(1.0)}};
  for (const auto& fam : fams) {
    for (double gamma : {0.01, 0.5, 3.0}) {
      const double g = std::holds_alternative<PhiExponentialFamily>(fam) ? 0.0 : gamma;
      const auto inst = ProblemInstance::uniform(fam, random_mats(rng, 6, 5), g);
      const auto [lo, hi] = bracket(inst);
      ASSERT_LE(lo, hi);
      for (int k = 0; k < 30; ++k) {
        const SpdMatrix fx = fixed_point_map(sample_in(rng, 5, lo, hi), inst);
        EXPECT_GE(fx.lambda_min(), lo * (1.0 - 1e-12)) << family_name(fam) << " gamma=" << g;
        EXPECT_LE(fx.lambda_max(), hi * (1.0 + 1e-12)) << family_name(fam) << " gamma=" << g;
      }
    }
  }
}

TEST(ClosedForm1d, Examples) {
  EXPECT_DOUBLE_EQ(closed_form_1d(ProblemInstance::uniform(GaussianFamily{}, {scalar(1.0)}, 0.0)), 1.0);
  EXPECT_DOUBLE_EQ(closed_form_1d(ProblemInstance::uniform(GaussianFamily{}, {scalar(1.0)}, 2.0)), 4.0);
  const auto inst = ProblemInstance(GaussianFamily{}, {scalar(1.0), scalar(4.0)}, {0.25, 0.75}, 0.0);
  EXPECT_DOUBLE_EQ(closed_form_1d(inst), std::pow(0.25 + 0.75 * 2.0, 2));
  EXPECT_THROW(closed_form_1d(ProblemInstance::uniform(GaussianFamily{}, {SpdMatrix::identity(2)}, 0.0)), InvalidInput);
}

TEST(ClosedForm1d, SatisfiesScalarEquationAndIncreasesInGamma) {
  const auto base = ProblemInstance::uniform(GaussianFamily{}, {scalar(0.3), scalar(2.0), scalar(7.0)}, 0.0);
  double prev = 0.0;
  for (double gamma : {0.0, 0.01, 0.1, 1.0}) {
    const auto inst = base.with_gamma(gamma);
    const double x = closed_form_1d(inst);
    double s = 0.0;
    for (double a : {0.3, 2.0, 7.0}) s += std::sqrt(a) / 3.0;
    EXPECT_NEAR(x - gamma, std::sqrt(x) * s, 1e-12);
    EXPECT_GT(x, prev);
    prev = x;
    // GPM solutions follow the same order.
    EXPECT_NEAR(solve_gpm(inst, {}).x_final.mat()(0, 0), x, 1e-7);
  }
}

TEST(ClosedFormTwoMeasures, Examples) {
  CounterRng rng(113);
  const SpdMatrix a = oracle::random_spd(rng, 4, 0.5, 5.0);
  EXPECT_LE((closed_form_two_measures(a, a, 0.4, 0.6).mat() - a.mat()).norm(), 1e-12);
  const SpdMatrix x = closed_form_two_measures(diag({1.0, 4.0}), diag({9.0, 16.0}), 0.3, 0.7);
  EXPECT_NEAR(x.mat()(0, 0), std::pow(0.3 * 1.0 + 0.7 * 3.0, 2), 1e-13);
  EXPECT_NEAR(x.mat()(1, 1), std::pow(0.3 * 2.0 + 0.7 * 4.0, 2), 1e-13);
  const auto mats = random_mats(rng, 2, 5);
  const auto inst = ProblemInstance(PhiExponentialFamily{PhiSpec::power(1.0)}, mats, {0.3, 0.7}, 0.0);
  EXPECT_LE(residual(closed_form_two_measures(mats[0], mats[1], 0.3, 0.7), inst), 1e-9);
  EXPECT_THROW(closed_form_two_measures(a, a, 0.5, 0.6), InvalidInput);
}

TEST(SolveGpm, ScalarInstance) {
  const auto inst = ProblemInstance::uniform(GaussianFamily{}, {scalar(1.0), scalar(4.0), scalar(9.0)}, 0.1);
  const SolverConfig cfg;
  const SolveReport r = solve_gpm(inst, cfg);
  EXPECT_NEAR(r.x_final.mat()(0, 0), closed_form_1d(inst), 1e-6);
  expect_report_invariants(r, inst, cfg);
}

TEST(SolveGpm, TwoMeasurePhiInstance) {
  CounterRng rng(127);
  const auto mats = random_mats(rng, 2, 5);
  const auto inst = ProblemInstance(PhiExponentialFamily{PhiSpec::power(0.5)}, mats, {0.35, 0.65}, 0.0);
  const SolverConfig cfg;
  const SolveReport r = solve_gpm(inst, cfg);
  EXPECT_LE((r.x_final.mat() - closed_form_two_measures(mats[0], mats[1], 0.35, 0.65).mat()).norm(), 1e-6);
  expect_report_invariants(r, inst, cfg);
}

TEST(Solvers, IdenticalMeasuresGiveThatMeasure) {
  CounterRng rng(131);
  const SpdMatrix a = oracle::random_spd(rng, 4, 0.5, 5.0);
  const auto inst = ProblemInstance::uniform(GaussianFamily{}, {a, a, a, a}, 0.0);
  for (SolverKind kind : {SolverKind::GpmArmijo, SolverKind::GpmConst, SolverKind::FixedPoint}) {
    SolverConfig cfg;
    cfg.kind = kind;
    cfg.tol = 1e-10;
    const SolveReport r = solve(inst, cfg);
    EXPECT_TRUE(r.converged) << to_string(kind);
    EXPECT_LE((r.x_final.mat() - a.mat()).norm(), 1e-8) << to_string(kind);
  }
}

TEST(Solvers, ArmijoAndFixedPointAgree) {
  CounterRng rng(137);
  for (int k = 0; k < 20; ++k) {
    const auto inst = ProblemInstance::uniform(GaussianFamily{}, random_mats(rng, 10, 5), 0.1);
    SolverConfig cfg;
    const SolveReport a = solve_gpm(inst, cfg);
    cfg.kind = SolverKind::FixedPoint;
    const SolveReport f = solve_fixed_point(inst, cfg);
    ASSERT_TRUE(a.converged && f.converged);
    EXPECT_LE((a.x_final.mat() - f.x_final.mat()).norm(), 1e-6);
    // The Picard limit is a fixed point of the map.
    EXPECT_LE((fixed_point_map(a.x_final, inst).mat() - a.x_final.mat()).norm(), 1e-7);
  }
}

TEST(Solvers, ConstantStepConverges) {
  CounterRng rng(139);
  const auto inst = ProblemInstance::uniform(QGaussianFamily{0.7}, random_mats(rng, 8, 4, 1.0, 3.0), 0.2);
  SolverConfig cfg;
  cfg.kind = SolverKind::GpmConst;
  const SolveReport c = solve_gpm(inst, cfg);
  ASSERT_TRUE(c.converged);
  EXPECT_TRUE(c.monotone());
  for (double t : c.step_sizes) EXPECT_EQ(t, c.step_sizes.front());
  const SolveReport a = solve_gpm(inst, {});
  EXPECT_LE((a.x_final.mat() - c.x_final.mat()).norm(), 1e-6);
}

TEST(Solvers, QGaussianMinimizerBeatsPerturbations) {
  CounterRng rng(149);
  for (double q : {0.6, 1.1}) {
    const auto inst = ProblemInstance::uniform(QGaussianFamily{q}, random_mats(rng, 10, 4), 0.1);
    const SolveReport r = solve_gpm(inst, {});
    ASSERT_TRUE(r.converged);
    const double best = objective_value(r.x_final, inst);
    const auto [lo, hi] = bracket(inst);
    for (int k = 0; k < 100; ++k) {
      const Matrix y = r.x_final.mat() + 0.05 * oracle::random_sym(rng, 4).mat();
      const SpdMatrix x = lowner_project(SymMatrix(y), LownerInterval(lo, hi));
      EXPECT_LE(best, objective_value(x, inst) + 1e-12);
    }
  }
}

TEST(Solvers, TightBoxAndStartPoint) {
  CounterRng rng(151);
  const auto inst = ProblemInstance::uniform(QGaussianFamily{0.5}, random_mats(rng, 6, 3), 1.0);
  const auto [lo, hi] = bracket(inst);
  SolverConfig cfg;
  cfg.tight_box = true;
  cfg.x0 = SpdMatrix::from(Matrix(50.0 * Matrix::Identity(3, 3)));
  const SolveReport r = solve_gpm(inst, cfg);
  ASSERT_TRUE(r.converged);
  EXPECT_GE(r.x_final.lambda_min(), lo * (1.0 - 1e-12));
  EXPECT_LE(r.x_final.lambda_max(), hi * (1.0 + 1e-12));
  EXPECT_LE((r.x_final.mat() - solve_gpm(inst, {}).x_final.mat()).norm(), 1e-6);
}

TEST(Solvers, IterationCapIsNotAnError) {
  CounterRng rng(157);
  const auto inst = ProblemInstance::uniform(GaussianFamily{}, random_mats(rng, 5, 3), 0.1);
  SolverConfig cfg;
  cfg.max_iter = 2;
  const SolveReport r = solve_gpm(inst, cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2);
  EXPECT_EQ(r.direction_norms.size(), 3u);
  cfg.kind = SolverKind::FixedPoint;
  EXPECT_FALSE(solve_fixed_point(inst, cfg).converged);
}

TEST(Solvers, BacktrackingLimit) {
  const auto inst = ProblemInstance::uniform(GaussianFamily{}, {scalar(100.0)}, 0.0);
  SolverConfig cfg;
  cfg.xi = 0.99;
  cfg.sigma = 0.99;
  cfg.max_backtracks = 1;
  EXPECT_THROW(solve_gpm(inst, cfg), StepsizeFailure);
}

TEST(Solvers, ArmijoStepsArePowersOfXi) {
  CounterRng rng(163);
  const auto inst = ProblemInstance::uniform(QGaussianFamily{1.2}, random_mats(rng, 10, 5), 0.1);
  const SolveReport r = solve_gpm(inst, {});
  ASSERT_TRUE(r.converged);
  for (double t : r.step_sizes) {
    const double j = std::log(t) / std::log(0.5);
    EXPECT_NEAR(j, std::round(j), 1e-12);
  }
}
