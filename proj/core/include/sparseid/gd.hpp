#pragma once

#include <optional>

#include "sparseid/operator.hpp"
#include "sparseid/pdhg.hpp"

namespace sparseid {

/// Constant-step subgradient descent baseline.
struct GdParams {
  std::optional<double> eta;  // absent => 1/(opnorm + tau) at validation time
  double tau = 1e-2;
  double beta = 0.0;
  double tol = 1e-5;
  int kmax = 1000;
};

/// Fills eta when absent and checks positivity.
GdParams validate_gd_params(const GdParams& p, double opnorm);

/// Elementwise beta*sign(u0) with sign(0) := 0.
Field subgradient_l1(const Field& u0, double beta);

/// Iterates u <- u - eta*(L*(L u - uT) + tau*u + beta*sign(u)) until the
/// relative change drops below tol or kmax is reached. One forward and one
/// adjoint solve per iteration.
OptimizerResult run_gd(const TimeStepOperator& op, const Field& uT,
                       const GdParams& params, const Field& u0_init);

}  // namespace sparseid
