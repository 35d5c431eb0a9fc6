// Command-line driver: convergence, errorfield, verify, list-problems.

#include <CLI11.hpp>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "csplit/error.hpp"
#include "csplit/harness.hpp"

namespace {

using namespace csplit;
using harness::ExperimentConfig;

struct CommonFlags {
  std::string problem;
  std::string methods = "StrangNaiv,StrangCorr,C3Naiv,C3New";
  double T = 0.1;
  double dx = 0.0;
  std::string ladder = "0..6";
  double ref_tau = 1e-6;
  std::string ref_mode;
  std::string out = "results";
  std::string cache;
  unsigned jobs = 1;
  double tol = 1e-12;
  bool zero_source = false;
  bool deterministic = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--problem", f.problem, "Problem id (see list-problems)")->required();
  cmd->add_option("--T", f.T, "Final time")->capture_default_str();
  cmd->add_option("--dx", f.dx, "Grid spacing (default: the problem's)");
  cmd->add_option("--ref-tau", f.ref_tau, "Reference step")->capture_default_str();
  cmd->add_option("--ref-mode", f.ref_mode, "Reference: affine, strang or c3new")
      ->check(CLI::IsMember({"affine", "strang", "c3new"}));
  cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
  cmd->add_option("--cache-dir", f.cache, "Reference cache directory (default <out>/cache)");
  cmd->add_option("--expmv-tol", f.tol, "Krylov tolerance")->capture_default_str();
  cmd->add_flag("--zero-source", f.zero_source, "Replace the source by f = 0");
  cmd->add_flag("--quiet", f.quiet, "No progress output");
}

ExperimentConfig to_config(const CommonFlags& f) {
  ExperimentConfig cfg;
  cfg.problem = f.problem;
  harness::problem_info(f.problem);
  cfg.methods.clear();
  std::stringstream ss(f.methods);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) cfg.methods.push_back(parse_scheme(item));
  }
  if (cfg.methods.empty()) throw ConfigError("no methods given");
  cfg.T = f.T;
  cfg.dx = f.dx;
  std::tie(cfg.ladder_k0, cfg.ladder_k1) = harness::parse_ladder(f.ladder);
  cfg.ref_tau = f.ref_tau;
  if (!f.ref_mode.empty()) cfg.ref_mode = harness::parse_reference_mode(f.ref_mode);
  cfg.out_dir = f.out;
  cfg.cache_dir = f.cache;
  cfg.jobs = f.jobs;
  cfg.expmv.tol = f.tol;
  cfg.zero_source = f.zero_source;
  cfg.deterministic = f.deterministic;
  cfg.log = f.quiet ? nullptr : &std::cerr;
  return cfg;
}

int run_convergence(const CommonFlags& flags) {
  const ExperimentConfig cfg = to_config(flags);
  const auto result = harness::run_convergence(cfg);
  std::cout << "reference: " << harness::reference_mode_name(result.reference.mode)
            << (result.reference.from_cache ? " (cached)" : "");
  if (result.reference.error_estimate > 0.0) {
    std::cout << ", error estimate " << result.reference.error_estimate;
  }
  std::cout << '\n';
  for (const auto& fit : result.fits) {
    std::cout << std::left << std::setw(11) << scheme_name(fit.method) << " slope "
              << std::setprecision(4) << fit.slope_filtered << " (" << fit.points_used
              << " points above floor " << std::setprecision(3) << fit.floor << ", all "
              << std::setprecision(4) << fit.slope_all << ")\n";
  }
  std::cout << "wrote " << result.csv.string() << " and " << result.orders_csv.string() << '\n';
  int failed = 0;
  for (const auto& row : result.rows) failed += row.failure.empty() ? 0 : 1;
  return failed == 0 ? 0 : 1;
}

int run_errorfield(const CommonFlags& flags, const std::string& method, double tau) {
  const ExperimentConfig cfg = to_config(flags);
  const auto field = harness::run_errorfield(cfg, parse_scheme(method), tau);
  double mx = 0.0;
  for (double e : field.abs_error) mx = std::max(mx, e);
  std::cout << "max |error| " << mx << "\nwrote " << field.csv.string() << '\n';
  return 0;
}

int run_verify(bool mutate) {
  const auto checks = harness::verify({mutate});
  int failed = 0;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    failed += c.passed ? 0 : 1;
  }
  if (mutate) {
    // the mutated check is expected to fail and nothing else
    const bool caught = !checks.empty() && [&] {
      for (const auto& c : checks) {
        if (c.name == "defect identity (mutated a)") return !c.passed;
      }
      return false;
    }();
    std::cout << (caught ? "mutation detected\n" : "mutation NOT detected\n");
    return caught && failed == 1 ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complex-coefficient splitting integrators for parabolic problems"};
  app.require_subcommand(1);

  CommonFlags conv;
  auto* c = app.add_subcommand("convergence", "Error ladder against a reference solution");
  add_common(c, conv);
  c->add_option("--methods", conv.methods, "Comma-separated methods")->capture_default_str();
  c->add_option("--tau-ladder", conv.ladder, "k0..k1 for tau_k = 0.02 * 2^-k")
      ->capture_default_str();
  c->add_option("--jobs", conv.jobs, "Worker threads")->capture_default_str();
  c->add_flag("--deterministic", conv.deterministic, "Write 0 in the wall-time column");

  CommonFlags ef;
  std::string ef_method = "C3New";
  double ef_tau = 1e-2;
  auto* e = app.add_subcommand("errorfield", "Pointwise error of one run");
  add_common(e, ef);
  e->add_option("--method", ef_method, "Method")->capture_default_str();
  e->add_option("--tau", ef_tau, "Time step")->capture_default_str();

  bool mutate = false;
  auto* v = app.add_subcommand("verify", "Run the property suite");
  v->add_flag("--self-test", mutate, "Inject a sign error in a; the defect check must catch it");

  app.add_subcommand("list-problems", "List problem ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  try {
    if (c->parsed()) return run_convergence(conv);
    if (e->parsed()) return run_errorfield(ef, ef_method, ef_tau);
    if (v->parsed()) return run_verify(mutate);
    for (const auto& p : harness::problems()) {
      std::cout << std::left << std::setw(14) << p.id << p.dim << "D  dx = " << p.default_dx
                << "  " << p.description << '\n';
    }
    return 0;
  } catch (const csplit::ConfigError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
}
