#include "csplit/flows.hpp"

#include <cmath>
#include <sstream>

#include "csplit/error.hpp"
#include "csplit/kernels.hpp"

namespace csplit {

SourceTerm SourceTerm::independent(std::shared_ptr<const Mesh> mesh, ScalarFunction f,
                                   ScalarFunction diffusion_of_f) {
  Field samples = Field::sample(mesh, f);
  return SourceTerm(Independent{std::move(f), std::move(diffusion_of_f), std::move(samples)});
}

SourceTerm SourceTerm::logistic(double rate) {
  if (!(rate > 0.0)) {
    throw ConfigError("logistic rate M must be positive");
  }
  return SourceTerm(Logistic{rate});
}

SourceTerm SourceTerm::custom(PointwiseFlow flow) {
  if (!flow) {
    throw ConfigError("custom source needs a flow");
  }
  return SourceTerm(CustomExact{std::move(flow)});
}

namespace {

// e^z - 1 without cancellation for small |z|
inline cplx expm1(cplx z) {
  const double s = std::sin(0.5 * z.imag());
  return {std::expm1(z.real()) * std::cos(z.imag()) - 2.0 * s * s,
          std::exp(z.real()) * std::sin(z.imag())};
}

inline cplx logistic_value(double rate, cplx growth_m1, cplx t, cplx u, std::size_t node) {
  // u e^{Mt} / (1 + u (e^{Mt} - 1))
  const cplx denom = 1.0 + u * growth_m1;
  if (std::abs(denom) < 1e-12) {
    std::ostringstream msg;
    msg << "logistic flow (M = " << rate << ", t = " << t << ") is singular at node " << node;
    throw SingularFlowError(msg.str(), node);
  }
  return u * (1.0 + growth_m1) / denom;
}

}  // namespace

cplx SourceTerm::flow_value(cplx t, cplx u, double x, double y, std::size_t node) const {
  if (const auto* ind = std::get_if<Independent>(&term_)) {
    return u + t * ind->f(x, y);
  }
  if (const auto* log = std::get_if<Logistic>(&term_)) {
    return logistic_value(log->rate, expm1(log->rate * t), t, u, node);
  }
  return std::get<CustomExact>(term_).flow(t, u, x, y);
}

cplx SourceTerm::increment(cplx t, cplx u, double x, double y, std::size_t node) const {
  if (const auto* ind = std::get_if<Independent>(&term_)) {
    return t * ind->f(x, y);
  }
  if (const auto* log = std::get_if<Logistic>(&term_)) {
    // phi_t(u) - u = u (1 - u) (e^{Mt} - 1) / (1 + u (e^{Mt} - 1))
    const cplx gm1 = expm1(log->rate * t);
    const cplx denom = 1.0 + u * gm1;
    if (std::abs(denom) < 1e-12) {
      throw SingularFlowError("logistic flow is singular", node);
    }
    return u * (1.0 - u) * gm1 / denom;
  }
  return std::get<CustomExact>(term_).flow(t, u, x, y) - u;
}

Field source_flow(const SourceTerm& term, cplx t, const Field& u) {
  Field out(u);
  if (t == cplx(0.0, 0.0)) {
    return out;
  }
  if (const auto* ind = term.as_independent()) {
    out.axpy(t, ind->samples);
    return out;
  }
  if (const auto* log = term.as_logistic()) {
    const cplx growth_m1 = expm1(log->rate * t);
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = logistic_value(log->rate, growth_m1, t, u[k], k);
    }
    return out;
  }
  const Mesh& mesh = u.mesh();
  const auto& flow = term.as_custom()->flow;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto [x, y] = mesh.interior_coords(k);
    out[k] = flow(t, u[k], x, y);
  }
  return out;
}

Field corrector_flow(const Field& q, cplx t, const Field& u) {
  Field out(u);
  out.axpy(-t, q);
  return out;
}

void corrector_flow_inplace(const Field& q, cplx t, Field& u) { u.axpy(-t, q); }

Field diffusion_flow(const DiscreteOperator& op, std::span<const cplx> lift_plus_q, cplx t,
                     const Field& u, const ExpmvConfig& cfg) {
  if (!(t.real() > 0.0) && t != cplx(0.0, 0.0)) {
    throw ConfigError("diffusion flow needs a step with positive real part");
  }
  return expmv_affine(t, op.matrix(), lift_plus_q, u, cfg);
}

Field diffusion_flow(const DiscreteOperator& op, const Field* q, cplx t, const Field& u,
                     const ExpmvConfig& cfg) {
  std::vector<cplx> g(op.lift().begin(), op.lift().end());
  if (q != nullptr) {
    kernels::axpy(1.0, q->values(), g);
  }
  return diffusion_flow(op, g, t, u, cfg);
}

}  // namespace csplit
