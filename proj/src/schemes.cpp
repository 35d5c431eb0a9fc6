#include "csplit/schemes.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "csplit/error.hpp"

namespace csplit {

namespace {

constexpr cplx kA = ComplexCoeffs::a;
constexpr cplx kAbar = ComplexCoeffs::abar;
constexpr double kC = ComplexCoeffs::c;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

}  // namespace

std::string_view scheme_name(SchemeId id) {
  switch (id) {
    case SchemeId::StrangNaiv:
      return "StrangNaiv";
    case SchemeId::StrangCorr:
      return "StrangCorr";
    case SchemeId::C3Naiv:
      return "C3Naiv";
    case SchemeId::C3New:
      return "C3New";
  }
  return "?";
}

const std::vector<SchemeId>& all_schemes() {
  static const std::vector<SchemeId> ids{SchemeId::StrangNaiv, SchemeId::StrangCorr,
                                         SchemeId::C3Naiv, SchemeId::C3New};
  return ids;
}

SchemeId parse_scheme(std::string_view name) {
  const std::string key = lower(name);
  for (SchemeId id : all_schemes()) {
    if (lower(scheme_name(id)) == key) return id;
  }
  std::ostringstream msg;
  msg << "unknown method '" << name << "'; valid: StrangNaiv, StrangCorr, C3Naiv, C3New";
  throw ConfigError(msg.str());
}

SchemeCoefficients scheme_coefficients(SchemeId id) {
  switch (id) {
    case SchemeId::StrangNaiv:
    case SchemeId::StrangCorr:
      return {{0.5, 0.5}, {1.0}};
    case SchemeId::C3Naiv:
    case SchemeId::C3New:
      return {{kA, kC, kAbar}, {2.0 * kA, 2.0 * kAbar}};
  }
  return {};
}

StepStats& StepStats::operator+=(const StepStats& other) {
  n_diffusion_flows += other.n_diffusion_flows;
  n_source_flows += other.n_source_flows;
  n_corrector_flows += other.n_corrector_flows;
  n_elliptic_solves += other.n_elliptic_solves;
  return *this;
}

StepStats per_step_stats(SchemeId id, bool independent_source) {
  StepStats s;
  switch (id) {
    case SchemeId::StrangNaiv:
      s.n_diffusion_flows = 1;
      s.n_source_flows = 2;
      break;
    case SchemeId::StrangCorr:
      s.n_diffusion_flows = 1;
      s.n_source_flows = 2;
      s.n_corrector_flows = 2;
      s.n_elliptic_solves = independent_source ? 0 : 1;
      break;
    case SchemeId::C3Naiv:
      s.n_diffusion_flows = 2;
      s.n_source_flows = 3;
      break;
    case SchemeId::C3New:
      s.n_diffusion_flows = 2;
      s.n_source_flows = 3;
      s.n_corrector_flows = 4;
      s.n_elliptic_solves = independent_source ? 0 : 4;
      break;
  }
  return s;
}

SplittingContext::SplittingContext(std::shared_ptr<const DiscreteOperator> op, SourceTerm source,
                                   BoundarySpec boundary, ContextOptions options)
    : op_(std::move(op)),
      source_(std::move(source)),
      boundary_(std::move(boundary)),
      options_(options) {
  if (!op_) {
    throw ConfigError("splitting context needs an operator");
  }
  options_.expmv.validate();
  const std::vector<double> trace = boundary_trace(op_->mesh(), boundary_.value);
  boundary_values_.assign(trace.begin(), trace.end());
  solver_ = std::make_shared<EllipticSolver>(op_);
  if (source_.is_independent()) {
    chained_ = build_independent_corrector(source_, *solver_, CorrectorKind::Chained);
    projection_ = build_independent_corrector(source_, *solver_, CorrectorKind::Projection);
  }
}

namespace {

void count(StepStats* stats, const StepStats& s) {
  if (stats != nullptr) *stats += s;
}

Field diffuse(const SplittingContext& ctx, const Field* q, cplx t, const Field& u) {
  return diffusion_flow(ctx.op(), q, t, u, ctx.expmv());
}

// Corrector of one block, or nullopt when correctors are switched off.
std::optional<CorrectorPair> block_corrector(const SplittingContext& ctx, const Field& omega,
                                             cplx tau_j, CorrectorKind kind, int block) {
  if (ctx.options().disable_correctors) return std::nullopt;
  const CorrectorPair* cached =
      kind == CorrectorKind::Chained ? ctx.cached_chained() : ctx.cached_projection();
  if (cached != nullptr) {
    CorrectorPair pair = *cached;
    pair.tau_j = tau_j;
    pair.block = block;
    return pair;
  }
  return build_corrector(ctx.source(), omega, ctx.boundary_values(), tau_j, ctx.elliptic(), kind,
                         block);
}

// phi^{-q}_{t} o phi^{D+q}_{2t} o phi^{-q}_{t}
Field corrected_diffusion(const SplittingContext& ctx, const std::optional<CorrectorPair>& pair,
                          cplx t, const Field& u) {
  if (!pair) return diffuse(ctx, nullptr, 2.0 * t, u);
  Field v = corrector_flow(pair->q, t, u);
  v = diffuse(ctx, &pair->q, 2.0 * t, v);
  corrector_flow_inplace(pair->q, t, v);
  return v;
}

}  // namespace

Field step_strang_naiv(const Field& u, double tau, const SplittingContext& ctx,
                       StepStats* stats) {
  const SourceTerm& f = ctx.source();
  Field v = source_flow(f, 0.5 * tau, u);
  v = diffuse(ctx, nullptr, tau, v);
  v = source_flow(f, 0.5 * tau, v);
  count(stats, per_step_stats(SchemeId::StrangNaiv, f.is_independent()));
  return v;
}

Field step_strang_corr(const Field& u, double tau, const SplittingContext& ctx,
                       StepStats* stats) {
  const SourceTerm& f = ctx.source();
  const cplx half(0.5 * tau, 0.0);
  const auto pair = block_corrector(ctx, u, half, CorrectorKind::Projection, 1);
  Field v = source_flow(f, half, u);
  v = corrected_diffusion(ctx, pair, half, v);
  v = source_flow(f, half, v);
  StepStats s = per_step_stats(SchemeId::StrangCorr, f.is_independent());
  if (ctx.options().disable_correctors) s.n_elliptic_solves = 0;
  count(stats, s);
  return v;
}

Field step_c3_naiv(const Field& u, double tau, const SplittingContext& ctx, StepStats* stats) {
  const SourceTerm& f = ctx.source();
  Field v = source_flow(f, kA * tau, u);
  v = diffuse(ctx, nullptr, 2.0 * kA * tau, v);
  v = source_flow(f, kC * tau, v);
  v = diffuse(ctx, nullptr, 2.0 * kAbar * tau, v);
  v = source_flow(f, kAbar * tau, v);
  count(stats, per_step_stats(SchemeId::C3Naiv, f.is_independent()));
  return v;
}

Field step_c3_new(const Field& u, double tau, const SplittingContext& ctx, StepStats* stats) {
  const SourceTerm& f = ctx.source();
  const cplx t1 = kA * tau;
  const cplx t2 = kAbar * tau;

  const auto q1 = block_corrector(ctx, u, t1, CorrectorKind::Chained, 1);
  Field v = source_flow(f, t1, u);
  v = corrected_diffusion(ctx, q1, t1, v);
  v = source_flow(f, kC * tau, v);

  const auto q2 = block_corrector(ctx, v, t2, CorrectorKind::Chained, 2);
  v = corrected_diffusion(ctx, q2, t2, v);
  v = source_flow(f, t2, v);

  StepStats s = per_step_stats(SchemeId::C3New, f.is_independent());
  if (ctx.options().disable_correctors) s.n_elliptic_solves = 0;
  count(stats, s);
  return v;
}

Field step(SchemeId id, const Field& u, double tau, const SplittingContext& ctx,
           StepStats* stats) {
  switch (id) {
    case SchemeId::StrangNaiv:
      return step_strang_naiv(u, tau, ctx, stats);
    case SchemeId::StrangCorr:
      return step_strang_corr(u, tau, ctx, stats);
    case SchemeId::C3Naiv:
      return step_c3_naiv(u, tau, ctx, stats);
    case SchemeId::C3New:
      return step_c3_new(u, tau, ctx, stats);
  }
  throw ConfigError("unknown scheme");
}

std::size_t step_count(double tau, double final_time) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ConfigError("time step must be positive and finite");
  }
  if (!(final_time >= 0.0) || !std::isfinite(final_time)) {
    throw ConfigError("final time must be non-negative and finite");
  }
  const double ratio = final_time / tau;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, n)) {
    std::ostringstream msg;
    msg << "T / tau = " << ratio << " is not an integer (T = " << final_time
        << ", tau = " << tau << ")";
    throw ConfigError(msg.str());
  }
  return static_cast<std::size_t>(n);
}

IntegrationResult integrate(SchemeId id, const Field& u0, double tau, double final_time,
                            const SplittingContext& ctx) {
  if (!(u0.mesh() == ctx.mesh())) {
    throw ConfigError("initial value lives on a different mesh than the operator");
  }
  const std::size_t n = step_count(tau, final_time);
  IntegrationResult out{u0, {}, n};
  for (std::size_t k = 0; k < n; ++k) {
    out.u = step(id, out.u, tau, ctx, &out.stats);
  }
  return out;
}

}  // namespace csplit
