#pragma once

#include <optional>
#include <vector>

#include "sparseid/operator.hpp"

namespace sparseid {

/// Parameters of the generalized primal-dual method. With theta = 1 the
/// correction factors must satisfy rho = sigma in (0,2); with theta in (0,1)
/// they must satisfy rho in (0, 1+theta-sqrt(1-theta)] and sigma = theta/rho.
/// The proximal steps must satisfy r*s < 1/||L L*||.
struct PdhgParams {
  double theta = 1.0;
  double r = 6.0;
  std::optional<double> s;  // absent => 0.999/(r*opnorm) at validation time
  double rho = 1.9;
  double sigma = 1.9;
  double tau = 1e-2;   // L2 regularization weight
  double beta = 0.0;   // L1 regularization weight
  double tol = 1e-5;
  int kmax = 1000;
};

/// Optional per-iteration diagnostics. Each enabled record costs one extra
/// forward solve per iteration.
struct PdhgDiagnostics {
  bool knorm_history = false;  // record diag_knorm of the correction step
  bool ergodic_average = false;
  // When both are set, record ||w^k - w_ref||_K per iteration.
  const Field* contraction_ref_u = nullptr;
  const Field* contraction_ref_p = nullptr;
};

struct OptimizerResult {
  Field u0_star;
  Field p_star;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;                 // e_k per iteration
  std::optional<std::vector<double>> diag_knorm_history;
  std::optional<std::vector<double>> contraction_history;
  std::optional<Field> ergodic_u0;  // running average of the u-predictors
};

/// Checks the step-size and relaxation rules and fills s when absent.
PdhgParams validate_params(const PdhgParams& p, double opnorm);

/// Soft-thresholding: a-gamma if a>gamma, 0 if |a|<=gamma, a+gamma if a<-gamma.
double shrinkage(double a, double gamma);
Field shrinkage(const Field& f, double gamma);

/// Primal proximal step: S_{beta*r/(tau*r+1)}((u0k - r*L*pk)/(tau*r+1)).
Field u_step(const Field& u0k, const Field& pk, const TimeStepOperator& op,
             double r, double tau, double beta);

/// Dual proximal step: (pk + s*(L*ubar - uT))/(s+1).
Field p_step(const Field& pk, const Field& ubar, const TimeStepOperator& op,
             double s, const Field& uT);

/// Weighted correction-step magnitude used as the non-ergodic monotonicity
/// diagnostic: rho * [ (1/r)||du||^2 - 2<L du, dp> + (1/s)||dp||^2 ] with
/// du = rho*w_diff_u, dp = sigma*w_diff_p. Requires theta=1 and rho=sigma.
double diag_knorm(const Field& w_diff_u, const Field& w_diff_p,
                  const TimeStepOperator& op, double r, double s, double rho);

/// Squared K-norm of a primal/dual pair for the theta=1, rho=sigma
/// configuration: (1/rho) * [ (1/r)||du||^2 - 2<L du, dp> + (1/s)||dp||^2 ].
double knorm_sq(const Field& du, const Field& dp, const TimeStepOperator& op,
                double r, double s, double rho);

/// Runs the generalized primal-dual iteration until the relative-change
/// stopping rule e_k <= tol or kmax iterations. Params must be validated.
OptimizerResult run_pdhg(const TimeStepOperator& op, const Field& uT,
                         const PdhgParams& params, const Field& u0_init,
                         const Field& p_init, const PdhgDiagnostics& diag = {});

/// Relative change ||a-b||_L2 / ||a||_L2 with 0/0 -> 0 and x/0 -> +inf.
double relative_change(const Field& a, const Field& b);

}  // namespace sparseid
