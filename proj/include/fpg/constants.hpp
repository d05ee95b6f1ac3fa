#pragma once

#include "fpg/gradients.hpp"
#include "fpg/improve.hpp"
#include "fpg/mdp.hpp"

namespace fpg {

/// The explicit constants ledger. KL and Tsallis use the tabulated
/// closed-form bounds; Jensen-Shannon values marked numeric are certified
/// upper bounds computed at construction (d_f is an exact vertex maximum,
/// y_f combines a 1-D grid maximum with an analytic tail bound).
///
/// mu_bar and tau_star require lambda > 0 (and mu_bar also rho_min > 0);
/// they are NaN when undefined.
struct TheoryConstants {
  double omega = 0.0;
  double kappa = 0.0;
  double iota = 0.0;
  double zeta = 0.0;
  double d_f = 0.0;
  double y_f = 0.0;
  double L_f = 0.0;      // smoothness of the regularized objective
  double sigma_sq = 0.0; // estimator variance bound (per B = 1)
  double beta = 0.0;     // truncation bias bound at horizon H_for_beta
  double mu_bar = 0.0;   // uniform PL constant on the projected region
  double tau_star = 0.0; // improvement threshold (clamped at 1e-300)
  double eta_default = 0.0;  // 1 / (2 L_f)
  long long H_default = -1;  // horizon recommendation at accuracy eps
};

TheoryConstants compute_constants(const RegularizedProblem& prob,
                                  int H_for_beta, double eps = 1e-2);

/// Divergence bound d_f and score-mass bound y_f alone (used by tau_star
/// callers and the regularization-gap tests).
double divergence_bound(const RegularizedProblem& prob);
double score_mass_bound(const RegularizedProblem& prob);
double zeta_bound(const RegularizedProblem& prob);

/// Non-uniform Lojasiewicz coefficient at theta:
///   mu_f(theta) = lambda (1-gamma) rho_min^2 (zeta/omega)^2 min_{s,a} w^2.
double loja_coefficient(const RegularizedProblem& prob, const Logits& theta);

/// Step-size / horizon / iteration recommendation for target accuracy eps
/// and batch size B (the explicit-constants schedule; the initial gap is
/// bounded by
/// (1 + lambda d_f) / (1 - gamma)).
struct Schedule {
  double eta = 0.0;
  long long H = 0;
  long long T = 0;
};

Schedule recommend_schedule(const RegularizedProblem& prob,
                            const TheoryConstants& tc, double eps, int B);

/// Leading-order sample-complexity-optimal Tsallis index:
/// alpha*(eps) = 11 / (2 log(1/eps)), for eps in (0, 1).
double tsallis_alpha_star(double eps);

}  // namespace fpg
