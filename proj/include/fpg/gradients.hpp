#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fpg/mdp.hpp"
#include "fpg/parallel.hpp"
#include "fpg/rng.hpp"

namespace fpg {

using Logits = Eigen::MatrixXd;  // n_states x n_actions, finite entries

/// Per-state quantities shared by the exact gradient, the score function,
/// and the REINFORCE estimator. Built directly from a policy (no
/// root-finding needed).
struct StateCache {
  Policy pi;
  Eigen::MatrixXd weights;       // w(a|s)
  Eigen::VectorXd s_sum;         // S(s)
  Eigen::VectorXd y_sum;         // sum_a ref |f'| / f''
  Eigen::MatrixXd fprime_ratio;  // f'(pi/ref)
  Eigen::VectorXd div_ref;       // D_f(pi(.|s) || ref(.|s))
};

StateCache make_cache(const RegularizedProblem& prob, const Policy& pi);

struct LogitsEval {
  Policy pi;
  Eigen::VectorXd mu;  // per-state normalizer
};

/// Row s of the policy is softargmax(theta(s,.), pi_ref(.|s)). The parallel
/// path writes per-state slots and is bit-identical to Exec::Serial.
LogitsEval policy_from_logits(const RegularizedProblem& prob,
                              const Logits& theta,
                              Exec exec = Exec::Parallel);

struct ExactGradient {
  Eigen::MatrixXd grad;  // d reg-value(rho) / d theta(s,a)
  Eigen::VectorXd v;     // regularized value of pi
  Eigen::MatrixXd q;     // regularized Q
  Occupancy occ;
};

/// Gradient of the regularized value at the policy described by `cache`,
/// with theta the logits that produced it:
///   grad(s,.) = S(s) * occ.discounted()(s) * H(w(s)) [Q(s,.) - lambda
///   theta(s,.)],  H(u) = diag(u) - u u^T.
ExactGradient exact_gradient_detail(const RegularizedProblem& prob,
                                    const StateCache& cache,
                                    const Logits& theta);

Eigen::MatrixXd exact_gradient(const RegularizedProblem& prob,
                               const Logits& theta);

/// d log pi(a|s) / d theta(s', b): zero unless s' == s; the returned row is
/// (S(s)/pi(a|s)) (1{b=a} w(a|s) - w(a|s) w(b|s)).
struct SparseScoreRow {
  int state = 0;
  Eigen::VectorXd row;
};

SparseScoreRow log_policy_gradient(const RegularizedProblem& prob,
                                   const StateCache& cache, int s, int a);

/// The correction vector M(s): zero outside row s, and
/// M(s)_b = S(s) w(b|s) [f'(pi(b|s)/ref) - sum_a w(a|s) f'(pi(a|s)/ref)].
SparseScoreRow reinforce_correction(const RegularizedProblem& prob,
                                    const StateCache& cache, int s);

struct TrajectoryBatch {
  int batch_size = 0;
  int horizon = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXi states;   // B x H
  Eigen::MatrixXi actions;  // B x H
};

/// B i.i.d. truncated trajectories: s0 ~ rho, a_h ~ pi(.|s_h),
/// s_{h+1} ~ P(.|s_h, a_h). Trajectory b uses substream(seed, b), so the
/// batch is a function of (seed, B, H) alone. Guard: B*H <= 1e7.
TrajectoryBatch sample_batch(const TabularMdp& mdp, const Policy& pi, int B,
                             int H, std::uint64_t seed,
                             Exec exec = Exec::Parallel);

/// REINFORCE-like estimator of the regularized-value gradient. The reward
/// term carries the score sum over l in [0, h], the divergence term over
/// l in [0, h-1], plus the -lambda gamma^h M(s_h) correction. Per-trajectory
/// contributions are materialized and summed serially, so the result is
/// independent of worker count.
Eigen::MatrixXd stochastic_gradient(const RegularizedProblem& prob,
                                    const StateCache& cache,
                                    const TrajectoryBatch& batch,
                                    Exec exec = Exec::Parallel);

}  // namespace fpg
