#include "sparseid/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace sparseid {

TimeStepOperator::TimeStepOperator(Grid2D grid, Coefficients coeffs, double dt, int nsteps)
    : grid_(grid), coeffs_(std::move(coeffs)), dt_(dt), nsteps_(nsteps) {
  if (!(dt > 0.0)) throw Error("assemble_operator: dt must be positive");
  if (nsteps < 1) throw Error("assemble_operator: nsteps must be >= 1");

  const int n = grid_.size();
  const double idx2 = 1.0 / (grid_.dx * grid_.dx);
  const double idy2 = 1.0 / (grid_.dy * grid_.dy);
  const double i2dx = 1.0 / (2.0 * grid_.dx);
  const double i2dy = 1.0 / (2.0 * grid_.dy);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(5) * n);

  for (int j = 1; j <= grid_.ny; ++j) {
    for (int i = 1; i <= grid_.nx; ++i) {
      const CoefficientRegion& c = coeffs_.at(grid_.x(i), grid_.y(j));
      if (!(c.d > 0.0)) throw Error("assemble_operator: diffusivity must be positive");
      const int row = grid_.index(i, j);

      // M = I + dt*A with A = -d*Laplace_h + v.grad_h.
      trip.emplace_back(row, row, 1.0 + dt * (2.0 * c.d * idx2 + 2.0 * c.d * idy2));
      if (i > 1)
        trip.emplace_back(row, grid_.index(i - 1, j), dt * (-c.d * idx2 - c.vx * i2dx));
      if (i < grid_.nx)
        trip.emplace_back(row, grid_.index(i + 1, j), dt * (-c.d * idx2 + c.vx * i2dx));
      if (j > 1)
        trip.emplace_back(row, grid_.index(i, j - 1), dt * (-c.d * idy2 - c.vy * i2dy));
      if (j < grid_.ny)
        trip.emplace_back(row, grid_.index(i, j + 1), dt * (-c.d * idy2 + c.vy * i2dy));
    }
  }

  m_.resize(n, n);
  m_.setFromTriplets(trip.begin(), trip.end());
  m_.makeCompressed();

  lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  lu_->compute(m_);
  if (lu_->info() != Eigen::Success) {
    throw SingularSystem("assemble_operator: factorization of M failed");
  }

  Eigen::SparseMatrix<double> mt = m_.transpose();
  mt.makeCompressed();
  lu_transpose_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  lu_transpose_->compute(mt);
  if (lu_transpose_->info() != Eigen::Success) {
    throw SingularSystem("assemble_operator: factorization of M^T failed");
  }
}

Field TimeStepOperator::run_steps(const Field& start,
                                  const Eigen::SparseLU<Eigen::SparseMatrix<double>>& lu,
                                  const char* what) const {
  if (start.grid != grid_) {
    throw GridMismatch(std::string(what) + ": field grid does not match operator grid");
  }
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(start.values.data(),
                                                        static_cast<Eigen::Index>(start.values.size()));
  for (int step = 0; step < nsteps_; ++step) {
    x = lu.solve(x);
    if (lu.info() != Eigen::Success) {
      throw SolveFailure(std::string(what) + ": sparse solve failed");
    }
  }
  Field out(grid_);
  Eigen::Map<Eigen::VectorXd>(out.values.data(), x.size()) = x;
  return out;
}

Field TimeStepOperator::forward_solve(const Field& u0) const {
  return run_steps(u0, *lu_, "forward_solve");
}

Field TimeStepOperator::adjoint_solve(const Field& pT) const {
  return run_steps(pT, *lu_transpose_, "adjoint_solve");
}

TimeStepOperator assemble_operator(const Grid2D& grid, const Coefficients& coeffs,
                                   double dt, int nsteps) {
  return TimeStepOperator(grid, coeffs, dt, nsteps);
}

Field discrete_delta(const Grid2D& grid, double x, double y, double intensity) {
  if (!(x > 0.0) || !(x < grid.lx) || !(y > 0.0) || !(y < grid.ly)) {
    std::ostringstream msg;
    msg << "discrete_delta: location (" << x << "," << y << ") is not strictly inside the domain";
    throw OutsideDomain(msg.str());
  }
  auto snap = [](double q, int n) {
    const int lo = static_cast<int>(std::floor(q));
    // Equidistant case resolves to the smaller index.
    int idx = (q - lo <= 0.5) ? lo : lo + 1;
    if (idx < 1) idx = 1;
    if (idx > n) idx = n;
    return idx;
  };
  const int i = snap(x / grid.dx, grid.nx);
  const int j = snap(y / grid.dy, grid.ny);
  Field f(grid);
  f.at(i, j) = intensity / grid.cell_area();
  return f;
}

OpnormEstimate estimate_opnorm(const TimeStepOperator& op, double tol, int maxit) {
  Field seed(op.grid());
  std::fill(seed.values.begin(), seed.values.end(), 1.0);
  return estimate_opnorm(op, seed, tol, maxit);
}

OpnormEstimate estimate_opnorm(const TimeStepOperator& op, const Field& seed,
                               double tol, int maxit) {
  if (!(tol > 0.0)) throw Error("estimate_opnorm: tol must be positive");

  Field q = seed;
  const double n0 = norm_l2(q);
  if (n0 == 0.0) throw Error("estimate_opnorm: seed vector is zero");
  for (double& v : q.values) v /= n0;

  OpnormEstimate est;
  double lambda_prev = 0.0;
  double relchange = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= maxit; ++it) {
    Field z = op.forward_solve(op.adjoint_solve(q));
    const double lambda = inner_product(q, z);  // Rayleigh quotient of L L*
    est.value = lambda;
    est.iterations = it;
    if (lambda <= 0.0) {
      // L L* is positive semidefinite; a vanishing quotient means the seed
      // collapsed into the numerical null space.
      est.converged = true;
      return est;
    }
    relchange = std::abs(lambda - lambda_prev) / lambda;
    if (it > 1 && relchange < tol) {
      est.converged = true;
      return est;
    }
    lambda_prev = lambda;
    const double zn = norm_l2(z);
    if (zn == 0.0) {
      est.converged = true;
      return est;
    }
    for (double& v : z.values) v /= zn;
    q = std::move(z);
  }
  est.converged = relchange <= 100.0 * tol;
  return est;
}

}  // namespace sparseid
