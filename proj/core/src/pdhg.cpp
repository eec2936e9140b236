#include "sparseid/pdhg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace sparseid {

PdhgParams validate_params(const PdhgParams& p, double opnorm) {
  if (!(opnorm > 0.0)) throw Error("validate_params: opnorm must be positive");
  if (!(p.theta > 0.0) || p.theta > 1.0) {
    throw RelaxationViolation("validate_params: theta must lie in (0,1]");
  }
  if (!(p.r > 0.0)) throw StepSizeViolation("validate_params: r must be positive");
  if (!(p.tau > 0.0)) throw Error("validate_params: tau must be positive");
  if (p.beta < 0.0) throw Error("validate_params: beta must be nonnegative");
  if (!(p.tol > 0.0)) throw Error("validate_params: tol must be positive");
  if (p.kmax < 1) throw Error("validate_params: kmax must be >= 1");

  PdhgParams out = p;
  if (!out.s.has_value()) {
    out.s = 0.999 / (out.r * opnorm);
  }
  const double s = *out.s;
  if (!(s > 0.0)) throw StepSizeViolation("validate_params: s must be positive");

  if (!(out.r * s < 1.0 / opnorm)) {
    std::ostringstream msg;
    msg << "validate_params: step sizes violate r*s < 1/||L L*||: r*s = "
        << out.r * s << " >= " << 1.0 / opnorm;
    throw StepSizeViolation(msg.str());
  }

  const double releq = 1e-12 * std::max({1.0, std::abs(out.rho), std::abs(out.sigma)});
  if (out.theta == 1.0) {
    if (std::abs(out.rho - out.sigma) > releq) {
      std::ostringstream msg;
      msg << "validate_params: theta=1 requires rho = sigma in (0,2); got rho="
          << out.rho << ", sigma=" << out.sigma;
      throw RelaxationViolation(msg.str());
    }
    if (!(out.rho > 0.0 && out.rho < 2.0)) {
      std::ostringstream msg;
      msg << "validate_params: theta=1 requires rho = sigma in (0,2); got rho=" << out.rho;
      throw RelaxationViolation(msg.str());
    }
  } else {
    const double rho_max = 1.0 + out.theta - std::sqrt(1.0 - out.theta);
    if (!(out.rho > 0.0) || out.rho > rho_max + 1e-12 * rho_max) {
      std::ostringstream msg;
      msg << "validate_params: theta in (0,1) requires rho in (0, 1+theta-sqrt(1-theta)] = (0, "
          << rho_max << "]; got rho=" << out.rho;
      throw RelaxationViolation(msg.str());
    }
    const double sigma_req = out.theta / out.rho;
    if (std::abs(out.sigma - sigma_req) > 1e-12 * std::max(1.0, sigma_req)) {
      std::ostringstream msg;
      msg << "validate_params: theta in (0,1) requires sigma = theta/rho = "
          << sigma_req << "; got sigma=" << out.sigma;
      throw RelaxationViolation(msg.str());
    }
  }
  return out;
}

double shrinkage(double a, double gamma) {
  if (a > gamma) return a - gamma;
  if (a < -gamma) return a + gamma;
  return 0.0;
}

Field shrinkage(const Field& f, double gamma) {
  Field out = f;
  for (double& v : out.values) v = shrinkage(v, gamma);
  return out;
}

Field u_step(const Field& u0k, const Field& pk, const TimeStepOperator& op,
             double r, double tau, double beta) {
  const Field zeta0 = op.adjoint_solve(pk);
  const double scale = 1.0 / (tau * r + 1.0);
  const double gamma = beta * r * scale;
  Field out(u0k.grid);
  const size_t n = out.values.size();
  for (size_t k = 0; k < n; ++k) {
    out.values[k] = shrinkage((u0k.values[k] - r * zeta0.values[k]) * scale, gamma);
  }
  return out;
}

Field p_step(const Field& pk, const Field& ubar, const TimeStepOperator& op,
             double s, const Field& uT) {
  const Field lu = op.forward_solve(ubar);
  const double scale = 1.0 / (s + 1.0);
  Field out(pk.grid);
  const size_t n = out.values.size();
  for (size_t k = 0; k < n; ++k) {
    out.values[k] = scale * pk.values[k] + s * scale * (lu.values[k] - uT.values[k]);
  }
  return out;
}

double relative_change(const Field& a, const Field& b) {
  Field diff = a;
  for (size_t k = 0; k < diff.values.size(); ++k) diff.values[k] -= b.values[k];
  const double num = norm_l2(diff);
  const double den = norm_l2(a);
  if (den == 0.0) {
    return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return num / den;
}

double knorm_sq(const Field& du, const Field& dp, const TimeStepOperator& op,
                double r, double s, double rho) {
  const Field ldu = op.forward_solve(du);
  return (1.0 / rho) * ((1.0 / r) * inner_product(du, du) -
                        2.0 * inner_product(ldu, dp) +
                        (1.0 / s) * inner_product(dp, dp));
}

double diag_knorm(const Field& w_diff_u, const Field& w_diff_p,
                  const TimeStepOperator& op, double r, double s, double rho) {
  Field du = w_diff_u;
  Field dp = w_diff_p;
  for (double& v : du.values) v *= rho;
  for (double& v : dp.values) v *= rho;  // sigma = rho in this configuration
  const Field ldu = op.forward_solve(du);
  return rho * ((1.0 / r) * inner_product(du, du) -
                2.0 * inner_product(ldu, dp) +
                (1.0 / s) * inner_product(dp, dp));
}

OptimizerResult run_pdhg(const TimeStepOperator& op, const Field& uT,
                         const PdhgParams& params, const Field& u0_init,
                         const Field& p_init, const PdhgDiagnostics& diag) {
  if (!params.s.has_value()) {
    throw Error("run_pdhg: params must be validated (s is unset)");
  }
  const double r = params.r;
  const double s = *params.s;
  const double theta = params.theta;
  const double rho = params.rho;
  const double sigma = params.sigma;

  const bool need_knorm = diag.knorm_history;
  const bool need_contraction = diag.contraction_ref_u && diag.contraction_ref_p;
  if ((need_knorm || need_contraction) && (theta != 1.0 || rho != sigma)) {
    throw UnsupportedConfig("run_pdhg: K-norm diagnostics require theta=1 and rho=sigma");
  }

  OptimizerResult res;
  res.residual_history.reserve(static_cast<size_t>(params.kmax));
  if (need_knorm) res.diag_knorm_history.emplace();
  if (need_contraction) res.contraction_history.emplace();
  if (diag.ergodic_average) res.ergodic_u0.emplace(op.grid());

  Field u = u0_init;
  Field p = p_init;
  const size_t n = u.values.size();

  for (int k = 0; k < params.kmax; ++k) {
    if (need_contraction) {
      Field du = u;
      Field dp = p;
      for (size_t m = 0; m < n; ++m) du.values[m] -= diag.contraction_ref_u->values[m];
      for (size_t m = 0; m < n; ++m) dp.values[m] -= diag.contraction_ref_p->values[m];
      res.contraction_history->push_back(knorm_sq(du, dp, op, r, s, rho));
    }

    const Field ut = u_step(u, p, op, r, params.tau, params.beta);

    Field ubar(u.grid);
    for (size_t m = 0; m < n; ++m) {
      ubar.values[m] = ut.values[m] + theta * (ut.values[m] - u.values[m]);
    }

    const Field pt = p_step(p, ubar, op, s, uT);

    Field unew(u.grid);
    Field pnew(p.grid);
    for (size_t m = 0; m < n; ++m) {
      unew.values[m] = u.values[m] - rho * (u.values[m] - ut.values[m]);
      pnew.values[m] = p.values[m] - sigma * (p.values[m] - pt.values[m]);
    }
    if (!unew.all_finite() || !pnew.all_finite()) {
      throw NonFiniteIterate("run_pdhg: iterate contains a non-finite value at k=" +
                             std::to_string(k));
    }

    if (need_knorm) {
      Field du(u.grid), dp(p.grid);
      for (size_t m = 0; m < n; ++m) du.values[m] = u.values[m] - ut.values[m];
      for (size_t m = 0; m < n; ++m) dp.values[m] = p.values[m] - pt.values[m];
      res.diag_knorm_history->push_back(diag_knorm(du, dp, op, r, s, rho));
    }
    if (diag.ergodic_average) {
      // Running mean of the predictors u-tilde over k = 0..K.
      Field& avg = *res.ergodic_u0;
      const double w = 1.0 / (k + 1);
      for (size_t m = 0; m < n; ++m) {
        avg.values[m] += (ut.values[m] - avg.values[m]) * w;
      }
    }

    const double ek = std::max(relative_change(unew, u), relative_change(pnew, p));
    res.residual_history.push_back(ek);
    u = std::move(unew);
    p = std::move(pnew);
    res.iterations = k + 1;
    if (ek <= params.tol) {
      res.converged = true;
      break;
    }
  }

  res.u0_star = std::move(u);
  res.p_star = std::move(p);
  return res;
}

}  // namespace sparseid
