#include "fpg/improve.hpp"

#include <cmath>
#include <limits>

namespace fpg {

namespace {

constexpr double kTauClamp = 1e-300;

Threshold tau_star_impl(const RegularizedProblem& prob, double d_f,
                        double rho_min) {
  const GeneratorSpec& g = prob.gen;
  const double gamma = prob.mdp.gamma;
  Threshold t;

  double t1;
  if (rho_min == 0.0) {
    t1 = 0.0;  // [f']^{-1}(-inf)
  } else {
    const double arg = -(16.0 + 8.0 * gamma * prob.lambda * d_f) /
                       (prob.lambda * (1.0 - gamma) * (1.0 - gamma) * rho_min);
    t1 = g.inverse_fprime(arg);
  }
  const double t2 = g.inverse_fprime(-4.0 * std::abs(g.f_prime(0.5)));
  t.tau = std::min({t1, t2, 0.5 * g.pi_ref_floor()});
  if (t.tau <= 0.0) {
    t.tau = kTauClamp;
    t.underflow_clamped = true;
  }
  return t;
}

}  // namespace

Threshold tau_star(const RegularizedProblem& prob, double d_f,
                   double rho_min) {
  if (!(prob.lambda > 0.0)) throw DomainError("tau_star requires lambda > 0");
  if (!(rho_min > 0.0)) throw DomainError("tau_star requires rho_min > 0");
  return tau_star_impl(prob, d_f, rho_min);
}

Threshold tau_star_or_limit(const RegularizedProblem& prob, double d_f,
                            double rho_min) {
  if (!(prob.lambda > 0.0)) throw DomainError("tau_star requires lambda > 0");
  return tau_star_impl(prob, d_f, rho_min);
}

double lambda_admissible_max(const RegularizedProblem& prob, double rho_min) {
  if (!(rho_min > 0.0)) {
    throw DomainError("lambda_admissible_max requires rho_min > 0");
  }
  const GeneratorSpec& g = prob.gen;
  const double gamma = prob.mdp.gamma;
  double bound = std::numeric_limits<double>::infinity();
  const double fp_iota = std::abs(g.f_prime(g.iota()));
  const double fp_half = std::abs(g.f_prime(0.5));
  const double fp_floor = std::abs(g.f_prime(0.5 * g.pi_ref_floor()));
  if (fp_iota > 0.0) bound = std::min(bound, 4.0 / fp_iota);
  if (fp_half > 0.0) bound = std::min(bound, 1.0 / fp_half);
  if (fp_floor > 0.0) bound = std::min(bound, 4.0 / fp_floor);
  return 4.0 / ((1.0 - gamma) * (1.0 - gamma) * rho_min) * bound;
}

Policy improve_policy(const RegularizedProblem& prob, const Policy& pi,
                      double tau) {
  if (!(tau > 0.0 && tau <= 0.5 * prob.gen.pi_ref_floor())) {
    throw DomainError("improve_policy: tau must lie in (0, pi_ref_floor/2]");
  }
  const int ns = prob.mdp.n_states;
  const int na = prob.mdp.n_actions;
  Policy out = pi;
  for (int s = 0; s < ns; ++s) {
    int a_max = 0;
    double best_ratio = -1.0;
    for (int a = 0; a < na; ++a) {
      const double ratio = pi.pi(s, a) / prob.pi_ref.pi(s, a);
      if (ratio > best_ratio) {
        best_ratio = ratio;
        a_max = a;
      }
    }
    double added = 0.0;
    bool raised_amax = false;
    for (int a = 0; a < na; ++a) {
      const double ref = prob.pi_ref.pi(s, a);
      if (pi.pi(s, a) / ref <= 0.5 * tau) {
        added += ref * tau - pi.pi(s, a);
        out.pi(s, a) = ref * tau;
        raised_amax |= a == a_max;
      }
    }
    if (raised_amax) {
      // Impossible for tau <= floor/2: max ratio is always >= 1.
      throw std::logic_error("improve_policy: argmax action fell below tau/2");
    }
    out.pi(s, a_max) -= added;
  }
  return out;
}

Logits logits_from_policy(const RegularizedProblem& prob, const Policy& pi) {
  const int ns = prob.mdp.n_states;
  const int na = prob.mdp.n_actions;
  if (!(pi.pi.minCoeff() > 0.0)) {
    throw DomainError("logits_from_policy: policy must be strictly positive");
  }
  Logits theta(ns, na);
  for (int s = 0; s < ns; ++s) {
    const double anchor =
        prob.gen.f_prime(pi.pi(s, na - 1) / prob.pi_ref.pi(s, na - 1));
    for (int a = 0; a < na - 1; ++a) {
      theta(s, a) =
          prob.gen.f_prime(pi.pi(s, a) / prob.pi_ref.pi(s, a)) - anchor;
    }
    theta(s, na - 1) = 0.0;
  }
  return theta;
}

Logits project_logits(const RegularizedProblem& prob, const Logits& theta,
                      double tau) {
  const LogitsEval ev = policy_from_logits(prob, theta);
  return logits_from_policy(prob, improve_policy(prob, ev.pi, tau));
}

}  // namespace fpg
