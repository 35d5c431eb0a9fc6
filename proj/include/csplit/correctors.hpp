#pragma once
// Corrector functions that keep the intermediate states of the corrected
// splittings compatible with the boundary conditions of the diffusion flow.
//
// For a block with entry state omega and substep tau_j the chained pair is
//   D r = 0  in the interior,  r = D w       on the boundary,
//   D q = r  in the interior,  q = w         on the boundary,
// with w = (phi^f_{tau_j}(omega) - omega) / tau_j extended to the boundary by the
// Dirichlet data. For a solution-independent source w = f exactly, so the pair
// does not depend on the state or the step.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "csplit/flows.hpp"
#include "csplit/mesh.hpp"

namespace csplit {

/// Direct sparse factorization of L, reused for every elliptic solve on one operator.
class EllipticSolver {
 public:
  explicit EllipticSolver(std::shared_ptr<const DiscreteOperator> op);

  /// v with L v + fold(boundary_values) = rhs, i.e. D v = rhs with trace
  /// boundary_values. Checks the relative residual against 1e-10.
  Field solve(std::span<const cplx> rhs, std::span<const cplx> boundary_values) const;

  const DiscreteOperator& op() const noexcept { return *op_; }

 private:
  std::shared_ptr<const DiscreteOperator> op_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  double matrix_norm1_ = 0.0;
};

enum class CorrectorKind {
  /// Dq = r, Dr = 0: both q and D q carry boundary data (third-order blocks).
  Chained,
  /// Dq = 0: only q carries boundary data (corrected Strang step).
  Projection,
};

struct CorrectorPair {
  Field q;
  Field r;
  cplx tau_j;
  int block = 1;
  std::vector<cplx> q_trace;
  std::vector<cplx> r_trace;
};

/// Builds the corrector of one block. `boundary_values` is the trace of b in the
/// mesh's boundary ordering; the entry state omega takes those values on the boundary.
CorrectorPair build_corrector(const SourceTerm& term, const Field& omega,
                              std::span<const cplx> boundary_values, cplx tau_j,
                              const EllipticSolver& solver, CorrectorKind kind, int block = 1);

/// Corrector of a solution-independent source: traces f and D f, no state needed.
CorrectorPair build_independent_corrector(const SourceTerm& term, const EllipticSolver& solver,
                                          CorrectorKind kind);

}  // namespace csplit
