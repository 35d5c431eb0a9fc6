#include "csplit/correctors.hpp"

#include <cmath>
#include <sstream>

#include "csplit/error.hpp"
#include "csplit/kernels.hpp"

namespace csplit {

namespace {

Eigen::SparseMatrix<double> to_eigen(const CsrMatrix& m) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(m.nnz());
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::int64_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(m.col_idx[k]), m.values[k]);
    }
  }
  Eigen::SparseMatrix<double> out(static_cast<int>(m.rows), static_cast<int>(m.cols));
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

double norm1(const CsrMatrix& m) {
  std::vector<double> colsum(m.cols, 0.0);
  for (std::size_t k = 0; k < m.nnz(); ++k) {
    colsum[m.col_idx[k]] += std::abs(m.values[k]);
  }
  double out = 0.0;
  for (double v : colsum) out = std::max(out, v);
  return out;
}

}  // namespace

EllipticSolver::EllipticSolver(std::shared_ptr<const DiscreteOperator> op) : op_(std::move(op)) {
  const Eigen::SparseMatrix<double> a = to_eigen(op_->matrix());
  matrix_norm1_ = norm1(op_->matrix());
  lu_.analyzePattern(a);
  lu_.factorize(a);
  if (lu_.info() != Eigen::Success) {
    throw SingularMatrixError("elliptic factorization failed: " + lu_.lastErrorMessage(),
                              INFINITY);
  }
  const double abs_det_log = lu_.logAbsDeterminant();
  if (!std::isfinite(abs_det_log)) {
    throw SingularMatrixError("elliptic operator is singular", INFINITY);
  }
}

Field EllipticSolver::solve(std::span<const cplx> rhs, std::span<const cplx> boundary_values) const {
  const Mesh& mesh = op_->mesh();
  const std::size_t n = mesh.size();
  std::vector<cplx> b(rhs.begin(), rhs.end());
  if (b.size() != n) {
    throw Error("elliptic rhs length does not match the mesh");
  }
  if (!boundary_values.empty()) {
    const std::vector<cplx> folded = op_->fold(boundary_values);
    kernels::axpy(-1.0, folded, b);
  }
  Eigen::VectorXd re(static_cast<Eigen::Index>(n));
  Eigen::VectorXd im(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    re(static_cast<Eigen::Index>(k)) = b[k].real();
    im(static_cast<Eigen::Index>(k)) = b[k].imag();
  }
  const Eigen::VectorXd xr = lu_.solve(re);
  const Eigen::VectorXd xi = lu_.solve(im);
  Field v(op_->mesh_ptr());
  for (std::size_t k = 0; k < n; ++k) {
    v[k] = cplx(xr(static_cast<Eigen::Index>(k)), xi(static_cast<Eigen::Index>(k)));
  }

  // residual check: || L v - b || <= 1e-10 (||L|| ||v|| + ||b||)
  std::vector<cplx> resid(n);
  op_->apply(v.values(), resid);
  kernels::axpy(-1.0, b, resid);
  const double r = std::sqrt(kernels::norm2_sq(resid));
  const double scale = matrix_norm1_ * std::sqrt(kernels::norm2_sq(v.values())) +
                       std::sqrt(kernels::norm2_sq(b));
  if (scale > 0.0 && r > 1e-10 * scale) {
    std::ostringstream msg;
    msg << "elliptic solve residual " << r / scale << " exceeds 1e-10";
    throw SingularMatrixError(msg.str(), r / scale / 1e-16);
  }
  return v;
}

namespace {

CorrectorPair solve_pair(const EllipticSolver& solver, std::vector<cplx> q_trace,
                         std::vector<cplx> r_trace, cplx tau_j, int block, CorrectorKind kind) {
  const Mesh& mesh = solver.op().mesh();
  const std::vector<cplx> zeros(mesh.size(), cplx(0.0, 0.0));
  Field r(solver.op().mesh_ptr());
  if (kind == CorrectorKind::Chained) {
    r = solver.solve(zeros, r_trace);
  } else {
    std::fill(r_trace.begin(), r_trace.end(), cplx(0.0, 0.0));
  }
  Field q = solver.solve(r.values(), q_trace);
  return CorrectorPair{std::move(q), std::move(r), tau_j, block, std::move(q_trace),
                       std::move(r_trace)};
}

}  // namespace

CorrectorPair build_corrector(const SourceTerm& term, const Field& omega,
                              std::span<const cplx> boundary_values, cplx tau_j,
                              const EllipticSolver& solver, CorrectorKind kind, int block) {
  if (term.is_independent()) {
    CorrectorPair pair = build_independent_corrector(term, solver, kind);
    pair.tau_j = tau_j;
    pair.block = block;
    return pair;
  }
  const Mesh& mesh = omega.mesh();
  const std::size_t nb = mesh.boundary_size();

  // w = (phi^f_{tau_j}(omega) - omega) / tau_j on the closed grid
  std::vector<cplx> w_interior(mesh.size());
  for (std::size_t k = 0; k < mesh.size(); ++k) {
    const auto [x, y] = mesh.interior_coords(k);
    w_interior[k] = term.increment(tau_j, omega[k], x, y, k) / tau_j;
  }
  std::vector<cplx> q_trace(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto [x, y] = mesh.boundary_coords(b);
    q_trace[b] = term.increment(tau_j, boundary_values[b], x, y) / tau_j;
  }
  std::vector<cplx> r_trace;
  if (kind == CorrectorKind::Chained) {
    const std::vector<cplx> closed = to_closed_grid(mesh, w_interior, q_trace);
    r_trace = solver.op().apply_on_boundary(closed);
  } else {
    r_trace.assign(nb, cplx(0.0, 0.0));
  }
  return solve_pair(solver, std::move(q_trace), std::move(r_trace), tau_j, block, kind);
}

CorrectorPair build_independent_corrector(const SourceTerm& term, const EllipticSolver& solver,
                                          CorrectorKind kind) {
  const auto* ind = term.as_independent();
  if (ind == nullptr) {
    throw Error("build_independent_corrector needs a solution-independent source");
  }
  const DiscreteOperator& op = solver.op();
  const Mesh& mesh = op.mesh();
  const std::size_t nb = mesh.boundary_size();
  std::vector<cplx> q_trace(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto [x, y] = mesh.boundary_coords(b);
    q_trace[b] = ind->f(x, y);
  }
  std::vector<cplx> r_trace(nb, cplx(0.0, 0.0));
  if (kind == CorrectorKind::Chained) {
    if (ind->diffusion_of_f) {
      for (std::size_t b = 0; b < nb; ++b) {
        const auto [x, y] = mesh.boundary_coords(b);
        r_trace[b] = ind->diffusion_of_f(x, y);
      }
    } else {
      const std::vector<cplx> closed = to_closed_grid(mesh, ind->samples.values(), q_trace);
      r_trace = op.apply_on_boundary(closed);
    }
  }
  return solve_pair(solver, std::move(q_trace), std::move(r_trace), cplx(0.0, 0.0), 1, kind);
}

}  // namespace csplit
