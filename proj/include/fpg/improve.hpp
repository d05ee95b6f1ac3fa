#pragma once

#include "fpg/gradients.hpp"
#include "fpg/mdp.hpp"

namespace fpg {

struct Threshold {
  double tau = 0.0;
  bool underflow_clamped = false;  // expression underflowed; clamped to 1e-300
};

/// The value-nondecreasing threshold
///   tau* = min([f']^{-1}(-(16 + 8 gamma lambda d_f) / (lambda (1-gamma)^2
///   rho_min)), [f']^{-1}(-4 |f'(1/2)|), pi_ref_floor / 2).
/// Requires lambda > 0 and rho_min > 0.
Threshold tau_star(const RegularizedProblem& prob, double d_f, double rho_min);

/// As tau_star, but rho_min = 0 resolves to the limiting threshold 1e-300
/// (with the clamp flag set) instead of raising; used by the training loop
/// on point-mass initial distributions.
Threshold tau_star_or_limit(const RegularizedProblem& prob, double d_f,
                            double rho_min);

/// Largest temperature for which the uniform PL lower bound applies:
///   4 / ((1-gamma)^2 rho_min) * min(4/|f'(iota)|, 1/|f'(1/2)|,
///   4/|f'(floor/2)|), terms with f' = 0 skipped.
double lambda_admissible_max(const RegularizedProblem& prob, double rho_min);

/// Statewise redistribution: every action with pi/ref <= tau/2 is raised to
/// ref * tau and the added mass is taken from the action with the largest
/// ratio (ties: lowest index). Mass is conserved row by row.
Policy improve_policy(const RegularizedProblem& prob, const Policy& pi,
                      double tau);

/// Logit recovery phi: theta(s,a) = f'(pi(a|s)/ref) - f'(pi(A-1|s)/ref); the
/// last action's logit is 0 and policy_from_logits(phi(pi)) = pi.
Logits logits_from_policy(const RegularizedProblem& prob, const Policy& pi);

/// The lifted operator T_tau = phi . U_tau . softargmax.
Logits project_logits(const RegularizedProblem& prob, const Logits& theta,
                      double tau);

}  // namespace fpg
