#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>

#include "sparseid/coefficients.hpp"
#include "sparseid/grid.hpp"

namespace sparseid {

/// Backward-Euler time-step operator for
///   du/dt - d*Laplace(u) + v.grad(u) = 0,   u = 0 on the boundary.
///
/// The spatial operator A uses the 5-point second-order stencil for the
/// diffusion term and central differences for the advection term, with
/// node-local coefficients. Stepping solves M u^{n+1} = u^n with
/// M = I + dt*A; the adjoint steps the transposed system backward, so the
/// discrete adjoint is the exact transpose of the discrete forward map.
class TimeStepOperator {
 public:
  TimeStepOperator(Grid2D grid, Coefficients coeffs, double dt, int nsteps);

  const Grid2D& grid() const { return grid_; }
  const Coefficients& coefficients() const { return coeffs_; }
  double dt() const { return dt_; }
  int nsteps() const { return nsteps_; }
  double horizon() const { return dt_ * nsteps_; }

  /// Assembled step matrix M = I + dt*A (interior nodes, i fastest-varying).
  const Eigen::SparseMatrix<double>& step_matrix() const { return m_; }

  /// Forward map L: u0 -> u(.,T), nsteps implicit steps.
  Field forward_solve(const Field& u0) const;

  /// Discrete adjoint L*: pT -> zeta(.,0), nsteps transposed steps.
  Field adjoint_solve(const Field& pT) const;

 private:
  Field run_steps(const Field& start, const Eigen::SparseLU<Eigen::SparseMatrix<double>>& lu,
                  const char* what) const;

  Grid2D grid_;
  Coefficients coeffs_;
  double dt_;
  int nsteps_;
  Eigen::SparseMatrix<double> m_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_transpose_;
};

/// Assembles and factorizes the step operator.
TimeStepOperator assemble_operator(const Grid2D& grid, const Coefficients& coeffs,
                                   double dt, int nsteps);

/// Grid function representing intensity * delta(location): the nearest
/// interior node carries intensity/(dx*dy), all other nodes are zero.
/// Snapping ties break toward the smaller node index.
Field discrete_delta(const Grid2D& grid, double x, double y, double intensity);

struct OpnormEstimate {
  double value = 0.0;   // dominant eigenvalue of L L*, i.e. ||L L*||
  int iterations = 0;
  bool converged = false;
};

/// Power iteration on q -> L(L*(q)) from a deterministic seed. Stops when the
/// relative eigenvalue change drops below tol. Hitting maxit with a relative
/// change above 100*tol flags the estimate instead of failing.
OpnormEstimate estimate_opnorm(const TimeStepOperator& op, double tol = 1e-6, int maxit = 500);
OpnormEstimate estimate_opnorm(const TimeStepOperator& op, const Field& seed,
                               double tol, int maxit);

}  // namespace sparseid
