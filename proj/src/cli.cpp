#include "wbary/cli.hpp"

#include <CLI11.hpp>
#include <fstream>

#include "wbary/experiments.hpp"
#include "wbary/io.hpp"
#include "wbary/validation.hpp"

namespace wbary {

namespace {

constexpr int kOk = 0;
constexpr int kSolverFailure = 1;
constexpr int kInvalidInput = 2;

struct GlobalOptions {
  std::uint64_t seed = 42;
  double tol = 1e-8;
  int max_iter = 100000;
  double xi = 0.5;
  double sigma = 0.1;
  double alpha_hat = 1e-5;
  double beta_hat = 1e5;
  std::string solver = "gpm-armijo";

  SolverConfig config() const {
    SolverConfig cfg;
    cfg.kind = parse_solver_kind(solver);
    cfg.box = LownerInterval(alpha_hat, beta_hat);
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    cfg.xi = xi;
    cfg.sigma = sigma;
    return cfg;
  }
};

struct ExperimentArgs {
  std::string regime = "low";
  int datasets = 5;
  std::vector<double> qs;
  std::vector<double> gammas;
  std::vector<double> epsilons;
  double base_q = 0.0;
  int n = 0;
  int d = 0;
  double eiglb = 0.1;
  double eigub = 9.9;
  std::string format = "csv";
  std::string output;
  bool timing = false;
  int threads = 1;
};

// Writes to `path`, or to `out` when the path is empty or "-".
template <typename Fn>
void emit(const std::string& path, std::ostream& out, Fn&& write) {
  if (path.empty() || path == "-") {
    write(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw InvalidInput("cannot write '" + path + "'");
  write(file);
}

void add_experiment_options(CLI::App* cmd, ExperimentArgs& a) {
  cmd->add_option("--regime", a.regime, "low (q < 1, n=100, d=10) or high (q > 1, n=50, d=5)")
      ->check(CLI::IsMember({"low", "high"}));
  cmd->add_option("--datasets", a.datasets, "number of random datasets")->check(CLI::PositiveNumber);
  cmd->add_option("--qs", a.qs, "comma-separated q values")->delimiter(',');
  cmd->add_option("--gammas", a.gammas, "comma-separated penalty values")->delimiter(',');
  cmd->add_option("--n", a.n, "matrices per dataset");
  cmd->add_option("--d", a.d, "dimension");
  cmd->add_option("--eiglb", a.eiglb, "smallest eigenvalue of generated matrices");
  cmd->add_option("--eigub", a.eigub, "width of the eigenvalue range");
  cmd->add_option("--format", a.format, "csv or markdown")->check(CLI::IsMember({"csv", "markdown"}));
  cmd->add_option("--output,-o", a.output, "output file (default stdout)");
  cmd->add_flag("--timing", a.timing, "fill the runtime_s column");
  cmd->add_option("--threads", a.threads, "datasets solved concurrently")->check(CLI::PositiveNumber);
}

void apply_regime_defaults(ExperimentArgs& a, bool stability) {
  const bool low = a.regime == "low";
  if (a.n == 0) a.n = low ? 100 : 50;
  if (a.d == 0) a.d = low ? 10 : 5;
  if (a.qs.empty()) {
    a.qs = low ? std::vector<double>{0.6, 0.7, 0.8, 0.9, 0.99}
               : std::vector<double>{1.2, 1.1, 1.01};
  }
  if (a.gammas.empty()) {
    a.gammas = low ? std::vector<double>{1.0, 0.1, 0.01} : std::vector<double>{0.1, 0.01};
  }
  if (stability && a.epsilons.empty()) a.epsilons = {1e-2, 1e-3, 1e-5};
  if (a.base_q == 0.0) a.base_q = low ? 0.5 : 1.2;
}

int report_records(const std::vector<ExperimentRecord>& records, const ExperimentArgs& a,
                   std::ostream& out, std::ostream& err) {
  emit(a.output, out, [&](std::ostream& o) {
    if (a.format == "markdown") {
      write_markdown(o, records);
    } else {
      write_csv(o, records, a.timing);
    }
  });
  int failures = 0;
  for (const auto& r : records) {
    if (!r.error.empty() || !r.converged) {
      ++failures;
      err << "cell q=" << r.q << " gamma=" << r.gamma << " dataset=" << r.dataset << ": "
          << (r.error.empty() ? "did not converge" : r.error) << '\n';
    }
  }
  return failures == 0 ? kOk : kSolverFailure;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Penalized Wasserstein barycenters of Gaussian-type measures", "wbary"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--tol", g.tol, "stop when the projected step norm is below this");
  app.add_option("--max-iter", g.max_iter, "iteration cap");
  app.add_option("--xi", g.xi, "Armijo reduction factor");
  app.add_option("--sigma", g.sigma, "Armijo sufficient-decrease constant");
  app.add_option("--alpha-hat", g.alpha_hat, "lower end of the projection box");
  app.add_option("--beta-hat", g.beta_hat, "upper end of the projection box");
  app.add_option("--solver", g.solver, "gpm-armijo, gpm-const or fixed-point")
      ->check(CLI::IsMember({"gpm-armijo", "gpm-const", "fixed-point"}));

  std::string input;
  std::string solve_output;
  bool tight_box = false;
  double damping = 1.0;
  auto* solve_cmd = app.add_subcommand("solve", "solve a problem file and print the report JSON");
  solve_cmd->add_option("--input,-i", input, "problem JSON")->required();
  solve_cmd->add_option("--output,-o", solve_output, "report file (default stdout)");
  solve_cmd->add_flag("--tight-box", tight_box, "project onto the solution bracket");
  solve_cmd->add_option("--damping", damping, "fixed-point damping in (0, 1]");

  ExperimentArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep-q", "||X_base - X_q||_F over q, gamma and datasets");
  add_experiment_options(sweep_cmd, sweep);
  sweep_cmd->add_option("--base-q", sweep.base_q, "reference q (default 0.5 low, 1.2 high)");

  ExperimentArgs stab;
  auto* stab_cmd = app.add_subcommand("stability", "||X_B - X_A||_F / eps with B_i = A_i + eps I");
  add_experiment_options(stab_cmd, stab);
  stab_cmd->add_option("--epsilons", stab.epsilons, "comma-separated perturbations")->delimiter(',');

  int gen_n = 10;
  int gen_d = 5;
  double gen_lb = 0.1;
  double gen_ub = 9.9;
  std::string gen_family = "gaussian";
  double gen_q = 0.5;
  double gen_gamma = 0.0;
  double gen_phi = 1.0;
  std::string gen_output;
  auto* gen_cmd = app.add_subcommand("gen", "write a random problem file");
  gen_cmd->add_option("--n", gen_n, "number of matrices")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--d", gen_d, "dimension")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--eiglb", gen_lb, "smallest eigenvalue");
  gen_cmd->add_option("--eigub", gen_ub, "width of the eigenvalue range");
  gen_cmd->add_option("--family", gen_family, "gaussian, q-gaussian or phi-exponential")
      ->check(CLI::IsMember({"gaussian", "q-gaussian", "phi-exponential"}));
  gen_cmd->add_option("--q", gen_q, "q for the q-gaussian family");
  gen_cmd->add_option("--gamma", gen_gamma, "penalty");
  gen_cmd->add_option("--phi-power", gen_phi, "phi(s) = s^p for the phi-exponential family");
  gen_cmd->add_option("--output,-o", gen_output, "problem file (default stdout)");

  auto* validate_cmd = app.add_subcommand("validate", "run the invariant self-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidInput;
  }

  try {
    if (solve_cmd->parsed()) {
      const ProblemInstance inst = read_problem(input);
      SolverConfig cfg = g.config();
      cfg.tight_box = tight_box;
      cfg.damping = damping;
      const SolveReport report = solve(inst, cfg);
      emit(solve_output, out, [&](std::ostream& o) { o << report_to_json(report).dump(2) << '\n'; });
      for (const auto& msg : report.diagnostics) err << "note: " << msg << '\n';
      if (!report.converged) {
        err << "solver stopped after " << report.iterations << " iterations without converging\n";
        return kSolverFailure;
      }
      return kOk;
    }
    if (sweep_cmd->parsed() || stab_cmd->parsed()) {
      const bool is_stab = stab_cmd->parsed();
      ExperimentArgs& a = is_stab ? stab : sweep;
      apply_regime_defaults(a, is_stab);
      const GenSpec spec{a.n, a.d, a.eiglb, a.eigub, g.seed};
      ExperimentOptions opts;
      opts.solver = g.config();
      opts.threads = a.threads;
      const auto records = is_stab
                               ? run_stability(a.qs, a.gammas, a.epsilons, spec, a.datasets, opts)
                               : run_q_sweep(a.base_q, a.qs, a.gammas, spec, a.datasets, opts);
      return report_records(records, a, out, err);
    }
    if (gen_cmd->parsed()) {
      const GenSpec spec{gen_n, gen_d, gen_lb, gen_ub, g.seed};
      MeasureFamily family = GaussianFamily{};
      if (gen_family == "q-gaussian") family = QGaussianFamily{gen_q};
      if (gen_family == "phi-exponential") family = PhiExponentialFamily{PhiSpec::power(gen_phi)};
      const ProblemInstance inst =
          ProblemInstance::uniform(std::move(family), gen_random_instance(spec), gen_gamma);
      emit(gen_output, out, [&](std::ostream& o) { o << problem_to_json(inst).dump(2) << '\n'; });
      return kOk;
    }
    if (validate_cmd->parsed()) {
      int failed = 0;
      for (const auto& r : run_invariant_suite(g.seed)) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name;
        if (!r.passed) {
          out << ": " << r.detail;
          ++failed;
        }
        out << '\n';
      }
      return failed == 0 ? kOk : kSolverFailure;
    }
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const Error& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  }
  return kInvalidInput;
}

}  // namespace wbary
