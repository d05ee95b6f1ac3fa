#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fpg/generator.hpp"
#include "fpg/parallel.hpp"
#include "fpg/softargmax.hpp"

namespace fpg {

/// Finite MDP with rewards in [0, 1] and discount in (0, 1) (gamma = 0 is
/// also accepted for bandit-style fixtures). Transitions are stored per
/// action: transition[a](s, s') = P(s' | s, a).
struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  double gamma = 0.0;
  Eigen::VectorXd rho;
  Eigen::MatrixXd reward;                    // n_states x n_actions
  std::vector<Eigen::MatrixXd> transition;   // n_actions matrices, S x S

  double rho_min() const { return rho.minCoeff(); }
  void validate() const;  // throws ValidationError
};

struct Policy {
  Eigen::MatrixXd pi;  // n_states x n_actions, rows stochastic, entries > 0

  static Policy uniform(int n_states, int n_actions);
  void validate() const;
};

/// The f-regularized control problem: MDP, generator, temperature, and a
/// full-support reference policy with min entry >= gen.pi_ref_floor.
struct RegularizedProblem {
  TabularMdp mdp;
  GeneratorSpec gen;
  double lambda = 0.0;
  Policy pi_ref;

  void validate() const;
};

/// State kernel P^pi(s, s') = sum_a pi(a|s) P(s'|s, a).
Eigen::MatrixXd policy_kernel(const TabularMdp& mdp, const Policy& pi);

/// r~(s) = <pi(.|s), r(s,.)> - lambda D_f(pi(.|s) || pi_ref(.|s)).
Eigen::VectorXd regularized_reward(const RegularizedProblem& prob,
                                   const Policy& pi);

/// Exact solve of v = r~ + gamma P^pi v (dense partial-pivot LU).
Eigen::VectorXd evaluate_regularized(const RegularizedProblem& prob,
                                     const Policy& pi);

/// Unregularized policy value (same solve with lambda = 0).
Eigen::VectorXd evaluate_policy(const TabularMdp& mdp, const Policy& pi);

/// Q(s,a) = r(s,a) + gamma sum_s' P(s'|s,a) v(s').
Eigen::MatrixXd q_function(const RegularizedProblem& prob,
                           const Eigen::VectorXd& v);

/// Discounted state occupancy. `normalized` sums to 1 and equals
/// (1-gamma) sum_t gamma^t rho P^t; `discounted()` = normalized/(1-gamma)
/// is the convention entering the policy-gradient formulas.
struct Occupancy {
  Eigen::VectorXd normalized;
  double gamma = 0.0;
  Eigen::VectorXd discounted() const { return normalized / (1.0 - gamma); }
};

Occupancy occupancy(const TabularMdp& mdp, const Policy& pi,
                    const Eigen::VectorXd& rho);

struct SoftViResult {
  Eigen::VectorXd v;
  Policy pi;
  std::vector<SoftArgmaxResult> states;
  int iterations = 0;
  double residual = 0.0;
};

/// Regularized value iteration: v(s) <- lambda * softmax(Q_v(s,.)/lambda,
/// pi_ref(.|s)) until the sup-norm change drops below tol. Jacobi sweeps, so
/// the parallel path is bit-identical to the serial one. Requires
/// lambda > 0. Default max_iter: ceil(log(tol (1-gamma)) / log gamma) + 100.
SoftViResult soft_value_iteration(const RegularizedProblem& prob,
                                  double tol = 1e-10, int max_iter = -1,
                                  Exec exec = Exec::Parallel);

/// JSON document {"n_states", "n_actions", "gamma", "rho", "reward",
/// "transition"} with transition indexed [s][a][s'].
std::string mdp_to_json(const TabularMdp& mdp);
TabularMdp mdp_from_json(const std::string& text);

}  // namespace fpg
