#pragma once
// Splitting integrators built from the exact flows, and the stepping loop.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csplit/correctors.hpp"
#include "csplit/expm_krylov.hpp"
#include "csplit/flows.hpp"
#include "csplit/mesh.hpp"

namespace csplit {

enum class SchemeId { StrangNaiv, StrangCorr, C3Naiv, C3New };

std::string_view scheme_name(SchemeId id);
/// Case-insensitive; throws ConfigError listing the valid names.
SchemeId parse_scheme(std::string_view name);
const std::vector<SchemeId>& all_schemes();

/// Substep multipliers of tau, in application order.
struct SchemeCoefficients {
  std::vector<cplx> source;
  std::vector<cplx> diffusion;
};
SchemeCoefficients scheme_coefficients(SchemeId id);

struct StepStats {
  std::size_t n_diffusion_flows = 0;
  std::size_t n_source_flows = 0;
  /// Applications of the corrector flow u -> u - t q.
  std::size_t n_corrector_flows = 0;
  /// Elliptic solves performed while stepping (zero when correctors are cached).
  std::size_t n_elliptic_solves = 0;

  StepStats& operator+=(const StepStats& other);
  bool operator==(const StepStats&) const = default;
};

/// Per-step counts for one scheme.
StepStats per_step_stats(SchemeId id, bool independent_source);

struct ContextOptions {
  ExpmvConfig expmv{};
  /// Forces every corrector to zero (diagnostic; turns the corrected schemes
  /// into their naive counterparts).
  bool disable_correctors = false;
};

/// Immutable problem context shared by all steps of an integration.
class SplittingContext {
 public:
  SplittingContext(std::shared_ptr<const DiscreteOperator> op, SourceTerm source,
                   BoundarySpec boundary, ContextOptions options = {});

  const Mesh& mesh() const noexcept { return op_->mesh(); }
  const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return op_->mesh_ptr(); }
  const DiscreteOperator& op() const noexcept { return *op_; }
  const SourceTerm& source() const noexcept { return source_; }
  const BoundarySpec& boundary() const noexcept { return boundary_; }
  std::span<const cplx> boundary_values() const noexcept { return boundary_values_; }
  const ExpmvConfig& expmv() const noexcept { return options_.expmv; }
  const ContextOptions& options() const noexcept { return options_; }
  const EllipticSolver& elliptic() const noexcept { return *solver_; }

  /// Cached correctors of a solution-independent source (state and step free).
  const CorrectorPair* cached_chained() const noexcept {
    return chained_ ? &*chained_ : nullptr;
  }
  const CorrectorPair* cached_projection() const noexcept {
    return projection_ ? &*projection_ : nullptr;
  }

 private:
  std::shared_ptr<const DiscreteOperator> op_;
  SourceTerm source_;
  BoundarySpec boundary_;
  std::vector<cplx> boundary_values_;
  ContextOptions options_;
  std::shared_ptr<const EllipticSolver> solver_;
  std::optional<CorrectorPair> chained_;
  std::optional<CorrectorPair> projection_;
};

Field step_strang_naiv(const Field& u, double tau, const SplittingContext& ctx,
                       StepStats* stats = nullptr);
Field step_strang_corr(const Field& u, double tau, const SplittingContext& ctx,
                       StepStats* stats = nullptr);
Field step_c3_naiv(const Field& u, double tau, const SplittingContext& ctx,
                   StepStats* stats = nullptr);
Field step_c3_new(const Field& u, double tau, const SplittingContext& ctx,
                  StepStats* stats = nullptr);

Field step(SchemeId id, const Field& u, double tau, const SplittingContext& ctx,
           StepStats* stats = nullptr);

struct IntegrationResult {
  Field u;
  StepStats stats;
  std::size_t steps = 0;
};

/// Number of steps T/tau; throws ConfigError when it is not an integer.
std::size_t step_count(double tau, double final_time);

IntegrationResult integrate(SchemeId id, const Field& u0, double tau, double final_time,
                            const SplittingContext& ctx);

}  // namespace csplit
