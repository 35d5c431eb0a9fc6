#pragma once
// Exact flows of the sub-equations composed by the splitting schemes:
//   source      u' = f(u)
//   corrector   u' = -q
//   diffusion   u' = D u + q in the interior, u = b on the boundary

#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <variant>

#include "csplit/expm_krylov.hpp"
#include "csplit/mesh.hpp"

namespace csplit {

/// Coefficients of the complex third-order composition: a = (1 - i/sqrt 3)/4,
/// its conjugate, and the middle source weight c = 1/2.
struct ComplexCoeffs {
  static constexpr cplx a{0.25, -0.25 / std::numbers::sqrt3};
  static constexpr cplx abar{0.25, 0.25 / std::numbers::sqrt3};
  static constexpr double c = 0.5;
};

/// Nodewise exact flow t -> phi_t(u) of an autonomous pointwise source.
using PointwiseFlow = std::function<cplx(cplx t, cplx u, double x, double y)>;

class SourceTerm {
 public:
  struct Independent {
    ScalarFunction f;
    /// D f, used for the corrector's second boundary condition. When empty it
    /// is approximated from samples of f with one-sided differences.
    ScalarFunction diffusion_of_f;
    Field samples;
  };
  struct Logistic {
    double rate;  // M in f(u) = M u (1 - u)
  };
  struct CustomExact {
    PointwiseFlow flow;
  };

  static SourceTerm independent(std::shared_ptr<const Mesh> mesh, ScalarFunction f,
                                ScalarFunction diffusion_of_f = {});
  static SourceTerm logistic(double rate);
  static SourceTerm custom(PointwiseFlow flow);

  bool is_independent() const noexcept { return std::holds_alternative<Independent>(term_); }
  const Independent* as_independent() const noexcept { return std::get_if<Independent>(&term_); }
  const Logistic* as_logistic() const noexcept { return std::get_if<Logistic>(&term_); }
  const CustomExact* as_custom() const noexcept { return std::get_if<CustomExact>(&term_); }

  /// Flow of a single value at position (x, y); throws SingularFlowError with
  /// node index `node` when the logistic denominator vanishes.
  cplx flow_value(cplx t, cplx u, double x, double y, std::size_t node = 0) const;
  /// phi_t(u) - u, evaluated without the cancellation of the difference.
  cplx increment(cplx t, cplx u, double x, double y, std::size_t node = 0) const;

 private:
  explicit SourceTerm(std::variant<Independent, Logistic, CustomExact> term)
      : term_(std::move(term)) {}
  std::variant<Independent, Logistic, CustomExact> term_;
};

/// Exact source flow over complex time t.
Field source_flow(const SourceTerm& term, cplx t, const Field& u);

/// u - t q
Field corrector_flow(const Field& q, cplx t, const Field& u);
void corrector_flow_inplace(const Field& q, cplx t, Field& u);

/// Exact discrete solution of u' = L u + g_b + q over complex time t, where
/// g_b is the operator's boundary lift. `q` may be empty (q = 0).
Field diffusion_flow(const DiscreteOperator& op, std::span<const cplx> lift_plus_q, cplx t,
                     const Field& u, const ExpmvConfig& cfg);

/// Same with q supplied separately from the lift.
Field diffusion_flow(const DiscreteOperator& op, const Field* q, cplx t, const Field& u,
                     const ExpmvConfig& cfg);

}  // namespace csplit
