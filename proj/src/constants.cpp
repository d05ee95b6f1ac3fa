#include "fpg/constants.hpp"

#include <cmath>
#include <limits>

namespace fpg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double js_unit_interval_peak(const GeneratorSpec& g) {
  // max over u in (0, 1] of |f'(u)| / f''(u); 1-D grid.
  double best = 0.0;
  const int n = 20000;
  for (int i = 1; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    best = std::max(best, std::abs(g.f_prime(u)) / g.f_second(u));
  }
  return best;
}

long long saturating_ceil(double v) {
  constexpr long long cap = 4'000'000'000'000'000'000LL;
  if (std::isnan(v)) return -1;
  if (v >= static_cast<double>(cap)) return cap;
  return static_cast<long long>(std::ceil(v));
}

}  // namespace

double divergence_bound(const RegularizedProblem& prob) {
  const GeneratorSpec& g = prob.gen;
  const double floor = g.pi_ref_floor();
  switch (g.kind()) {
    case GeneratorKind::KL:
      return std::abs(std::log(floor));
    case GeneratorKind::Tsallis:
      return 4.0 * std::abs(std::log(floor)) / (g.alpha() * g.alpha());
    case GeneratorKind::JensenShannon: {
      // D_f(. || q) is convex on the simplex, so the maximum over policies
      // sits at a vertex: D(delta_b || q) = q_b f(1/q_b) + (1-q_b) f(0).
      double best = 0.0;
      for (int s = 0; s < prob.mdp.n_states; ++s) {
        for (int b = 0; b < prob.mdp.n_actions; ++b) {
          const double qb = prob.pi_ref.pi(s, b);
          best = std::max(best,
                          qb * g.f_value(1.0 / qb) + (1.0 - qb) * g.f_zero());
        }
      }
      return best;
    }
  }
  return 0.0;
}

double score_mass_bound(const RegularizedProblem& prob) {
  const GeneratorSpec& g = prob.gen;
  const double floor = g.pi_ref_floor();
  switch (g.kind()) {
    case GeneratorKind::KL:
      return 1.0 + 2.0 * std::abs(std::log(floor));
    case GeneratorKind::Tsallis:
      return 4.0 * std::abs(std::log(floor));
    case GeneratorKind::JensenShannon:
      // sum_a q g(nu/q) with g = |f'|/f''. Ratios <= 1 contribute at most
      // the unit-interval peak of g; ratios > 1 have
      // g(u) <= log(2) u (u+1), and sum q u (u+1) <= 1/floor + 1.
      return js_unit_interval_peak(g) +
             std::log(2.0) * (1.0 + 1.0 / floor);
  }
  return 0.0;
}

double zeta_bound(const RegularizedProblem& prob) {
  switch (prob.gen.kind()) {
    case GeneratorKind::KL:
    case GeneratorKind::Tsallis:
      return 1.0;
    case GeneratorKind::JensenShannon:
      // sum_a q / f''(nu/q) is convex in nu with minimum at nu = q.
      return 1.0 / prob.gen.f_second(1.0);
  }
  return 1.0;
}

TheoryConstants compute_constants(const RegularizedProblem& prob,
                                  int H_for_beta, double eps) {
  const GeneratorSpec& g = prob.gen;
  const double gamma = prob.mdp.gamma;
  const double lam = prob.lambda;
  const double om = g.omega();
  const double ka = g.kappa();
  const double one_m = 1.0 - gamma;

  TheoryConstants tc;
  tc.omega = om;
  tc.kappa = ka;
  tc.iota = g.iota();
  tc.zeta = zeta_bound(prob);
  tc.d_f = divergence_bound(prob);
  tc.y_f = score_mass_bound(prob);

  tc.L_f = 8.0 * om * (gamma * om + one_m * ka) / (one_m * one_m * one_m) +
           4.0 * lam *
               (2.0 * gamma * gamma * om * om * tc.d_f +
                2.0 * gamma * one_m * om * (ka * tc.d_f + tc.y_f) +
                one_m * one_m * (om + 2.0 * ka * tc.y_f)) /
               (one_m * one_m * one_m);
  tc.eta_default = 1.0 / (2.0 * tc.L_f);

  tc.sigma_sq = 12.0 / std::pow(one_m, 4) *
                (om * om * om + lam * lam * gamma * gamma * om * om * om *
                                    tc.d_f * tc.d_f +
                 lam * lam * one_m * one_m * om * om * tc.y_f * tc.y_f);

  const double h = static_cast<double>(H_for_beta);
  tc.beta = 2.0 * std::pow(gamma, h) * (h + 1.0) / (one_m * one_m) * om *
            (2.0 + 2.0 * lam * tc.d_f + lam * one_m * tc.y_f);

  const double rho_min = prob.mdp.rho_min();
  if (lam > 0.0) {
    tc.tau_star = tau_star_or_limit(prob, tc.d_f, rho_min).tau;
  } else {
    tc.tau_star = kNaN;
  }
  if (lam > 0.0 && rho_min > 0.0) {
    const double arg =
        -(16.0 + 8.0 * gamma * lam * tc.d_f) / (lam * one_m * one_m * rho_min);
    const double conj = g.conjugate_second(arg);
    tc.mu_bar = lam * one_m * rho_min * rho_min * tc.zeta * tc.zeta *
                g.pi_ref_floor() * g.pi_ref_floor() * conj * conj / (om * om);
    // Horizon recommendation at accuracy eps. mu_bar
    // can underflow in the deep-exponential regime; saturate instead of
    // overflowing.
    const double log_arg =
        216.0 * om * om / (eps * tc.mu_bar * std::pow(one_m, 4)) *
        (4.0 + 4.0 * lam * lam * tc.d_f * tc.d_f +
         lam * lam * one_m * one_m * tc.y_f * tc.y_f);
    tc.H_default = saturating_ceil(4.0 / (one_m * one_m) +
                                   std::log(log_arg) / one_m);
  } else {
    tc.mu_bar = kNaN;
    tc.H_default = -1;
  }
  return tc;
}

double loja_coefficient(const RegularizedProblem& prob, const Logits& theta) {
  const LogitsEval ev = policy_from_logits(prob, theta);
  const StateCache cache = make_cache(prob, ev.pi);
  const double w_min = cache.weights.minCoeff();
  const double ratio = zeta_bound(prob) / prob.gen.omega();
  const double rho_min = prob.mdp.rho_min();
  return prob.lambda * (1.0 - prob.mdp.gamma) * rho_min * rho_min * ratio *
         ratio * w_min * w_min;
}

Schedule recommend_schedule(const RegularizedProblem& prob,
                            const TheoryConstants& tc, double eps, int B) {
  if (!(eps > 0.0) || B < 1) {
    throw ValidationError("recommend_schedule: eps > 0 and B >= 1 required");
  }
  if (std::isnan(tc.mu_bar)) {
    throw DomainError(
        "recommend_schedule requires mu_bar (lambda > 0, rho_min > 0)");
  }
  Schedule sch;
  sch.eta = std::min(1.0 / (2.0 * tc.L_f),
                     eps * B * tc.mu_bar / (18.0 * tc.sigma_sq));
  sch.H = tc.H_default;
  const double gap0 =
      (1.0 + prob.lambda * tc.d_f) / (1.0 - prob.mdp.gamma);
  sch.T = saturating_ceil(
      4.0 / tc.mu_bar *
      std::max(2.0 * tc.L_f, 18.0 * tc.sigma_sq / (eps * B * tc.mu_bar)) *
      std::log(3.0 * gap0 / eps));
  return sch;
}

double tsallis_alpha_star(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw DomainError("tsallis_alpha_star requires eps in (0, 1)");
  }
  return 11.0 / (2.0 * std::log(1.0 / eps));
}

}  // namespace fpg
