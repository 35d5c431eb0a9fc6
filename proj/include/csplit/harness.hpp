#pragma once
// Experiment drivers: problem catalogue, cached reference solutions,
// convergence ladders, pointwise error fields and the verification suite.

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "csplit/schemes.hpp"

namespace csplit::harness {

struct ProblemInfo {
  std::string id;
  int dim;
  double default_dx;
  bool independent_source;
  std::string description;
};

const std::vector<ProblemInfo>& problems();
/// Throws ConfigError listing the valid ids.
const ProblemInfo& problem_info(const std::string& id);

struct Problem {
  ProblemInfo info;
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const DiscreteOperator> op;
  SourceTerm source;
  BoundarySpec boundary;
  Field u0;
};

struct ProblemOptions {
  /// 0 selects the problem's default spacing.
  double dx = 0.0;
  /// Replaces the source by f = 0 (diagnostic).
  bool zero_source = false;
};

Problem build_problem(const std::string& id, const ProblemOptions& options = {});
SplittingContext make_context(const Problem& problem, const ContextOptions& options = {});

enum class ReferenceMode {
  /// Closed form e^{TL}u0 + T phi1(TL)(g_b + f); solution-independent sources only.
  Affine,
  /// StrangNaiv with step ref_tau.
  Strang,
  /// C3New with step ref_tau.
  C3New,
};
std::string_view reference_mode_name(ReferenceMode mode);
ReferenceMode parse_reference_mode(std::string_view name);

struct ExperimentConfig {
  std::string problem;
  std::vector<SchemeId> methods{all_schemes()};
  double T = 0.1;
  double dx = 0.0;
  int ladder_k0 = 0;
  int ladder_k1 = 6;
  double tau0 = 0.02;
  double ref_tau = 1e-6;
  /// Unset: Affine for solution-independent sources, Strang otherwise.
  std::optional<ReferenceMode> ref_mode;
  ExpmvConfig expmv{};
  std::filesystem::path out_dir = "results";
  /// Empty: <out_dir>/cache.
  std::filesystem::path cache_dir;
  unsigned jobs = 1;
  bool zero_source = false;
  /// Writes 0 in the wall-time column so repeated runs are byte-identical.
  bool deterministic = false;
  /// Progress and warnings; may be null.
  std::ostream* log = nullptr;

  std::vector<double> ladder() const;
  ReferenceMode effective_ref_mode(const ProblemInfo& info) const;
  std::filesystem::path effective_cache_dir() const;
};

/// Parses "k0..k1" (or a single k).
std::pair<int, int> parse_ladder(std::string_view text);

struct ReferenceInfo {
  ReferenceMode mode = ReferenceMode::Affine;
  bool from_cache = false;
  std::size_t steps = 0;
  std::filesystem::path file;
  /// ||u_ref(ref_tau) - u_ref(2 ref_tau)|| for stepped references, else 0.
  double error_estimate = 0.0;
};

/// Reference solution at time cfg.T, cached on disk keyed by (problem, dx, T,
/// mode, ref_tau, expmv tol) with an FNV-1a checksum. A damaged cache entry is
/// recomputed with a warning.
Field reference_solution(const ExperimentConfig& cfg, const Problem& problem,
                         const SplittingContext& ctx, ReferenceInfo* info = nullptr);

/// 64-bit FNV-1a of raw bytes.
std::uint64_t fnv1a(const void* data, std::size_t bytes);

struct ConvergenceRow {
  std::string problem;
  SchemeId method;
  double tau = 0.0;
  double error_l2 = 0.0;
  /// NaN for the first ladder point.
  double order_pairwise = 0.0;
  std::size_t n_steps = 0;
  StepStats stats;
  double wall_time_s = 0.0;
  /// Non-empty when the cell failed; the run continues.
  std::string failure;
};

struct OrderFit {
  SchemeId method;
  double slope_all = 0.0;
  double slope_filtered = 0.0;
  std::size_t points_used = 0;
  double floor = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::vector<OrderFit> fits;
  ReferenceInfo reference;
  double reference_norm = 0.0;
  double floor = 0.0;
  std::filesystem::path csv;
  std::filesystem::path orders_csv;
};

inline constexpr const char* kConvergenceHeader =
    "problem,method,tau,error_l2,order_pairwise,n_steps,n_diffusion_flows,n_source_flows,"
    "n_corrector_solves,wall_time_s";

/// Runs every (method, tau) cell, writes <out>/<problem>_convergence.csv and
/// <out>/<problem>_orders.csv. `write` = false skips the files.
ConvergenceResult run_convergence(const ExperimentConfig& cfg, bool write = true);

struct ErrorField {
  int dim = 1;
  std::size_t closed_per_axis = 0;
  /// Closed-grid coordinates and |u_N - u_ref|, boundary nodes with 0.
  std::vector<double> x, y, abs_error;
  std::shared_ptr<const Mesh> mesh;
  /// Interior error field.
  std::vector<double> interior_abs_error;
  std::filesystem::path csv;
};

ErrorField run_errorfield(const ExperimentConfig& cfg, SchemeId method, double tau,
                          bool write = true);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  /// Evaluates the defect identity with a sign error in a; that check must fail.
  bool mutate = false;
};

/// Property suite: S bounds and supremum, series seam, spectral defect
/// identity, one-step grid cross-check, FD eigenvalues, expmv against a dense
/// eigendecomposition, corrector closed form.
std::vector<CheckResult> verify(const VerifyOptions& options = {});

}  // namespace csplit::harness
