#include "sparseid/gd.hpp"

#include <cmath>
#include <string>

namespace sparseid {

GdParams validate_gd_params(const GdParams& p, double opnorm) {
  if (!(opnorm > 0.0)) throw Error("validate_gd_params: opnorm must be positive");
  if (!(p.tau >= 0.0)) throw Error("validate_gd_params: tau must be nonnegative");
  if (p.beta < 0.0) throw Error("validate_gd_params: beta must be nonnegative");
  if (!(p.tol > 0.0)) throw Error("validate_gd_params: tol must be positive");
  if (p.kmax < 1) throw Error("validate_gd_params: kmax must be >= 1");

  GdParams out = p;
  if (!out.eta.has_value()) {
    out.eta = 1.0 / (opnorm + out.tau);
  }
  if (!(*out.eta > 0.0)) throw StepSizeViolation("validate_gd_params: eta must be positive");
  return out;
}

Field subgradient_l1(const Field& u0, double beta) {
  Field out(u0.grid);
  for (size_t k = 0; k < u0.values.size(); ++k) {
    const double v = u0.values[k];
    out.values[k] = v > 0.0 ? beta : (v < 0.0 ? -beta : 0.0);
  }
  return out;
}

OptimizerResult run_gd(const TimeStepOperator& op, const Field& uT,
                       const GdParams& params, const Field& u0_init) {
  if (!params.eta.has_value()) {
    throw Error("run_gd: params must be validated (eta is unset)");
  }
  const double eta = *params.eta;
  const double tau = params.tau;
  const double beta = params.beta;

  OptimizerResult res;
  res.residual_history.reserve(static_cast<size_t>(params.kmax));

  Field u = u0_init;
  const size_t n = u.values.size();

  for (int k = 0; k < params.kmax; ++k) {
    Field residual = op.forward_solve(u);
    for (size_t m = 0; m < n; ++m) residual.values[m] -= uT.values[m];
    const Field psi0 = op.adjoint_solve(residual);

    Field unew(u.grid);
    for (size_t m = 0; m < n; ++m) {
      const double v = u.values[m];
      const double sub = v > 0.0 ? beta : (v < 0.0 ? -beta : 0.0);
      unew.values[m] = v - eta * (psi0.values[m] + tau * v + sub);
    }
    if (!unew.all_finite()) {
      throw NonFiniteIterate("run_gd: iterate diverged at k=" + std::to_string(k) +
                             " (step size too large?)");
    }

    const double ek = relative_change(unew, u);
    res.residual_history.push_back(ek);
    u = std::move(unew);
    res.iterations = k + 1;
    if (ek <= params.tol) {
      res.converged = true;
      break;
    }
  }

  res.u0_star = std::move(u);
  res.p_star = Field(op.grid());
  return res;
}

}  // namespace sparseid
