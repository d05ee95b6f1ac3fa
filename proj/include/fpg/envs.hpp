#pragma once

#include <cstdint>
#include <string>

#include "fpg/mdp.hpp"

namespace fpg {

/// One state, self-loop, action a pays rewards[a]. rho = (1).
TabularMdp bandit(const Eigen::VectorXd& rewards, double gamma);

/// Chain cells 0..n-1 plus an absorbing terminal. FORWARD (action 0)
/// advances one cell and pays 1 on the transition into cell n-1; BACK
/// (action 1) returns to cell 0 for 0.01. The goal cell leads to the
/// terminal with no further reward. rho = delta_0, deterministic moves.
TabularMdp nchain(int n, double gamma);

/// L x L descending grid plus an absorbing terminal (L^2 + 1 states).
/// LEFT/RIGHT move down one row and shift the column (clamped). Rewards
/// stay in [0, 1] by paying the movement cost as a LEFT bonus of 0.01/L;
/// the treasure is reward 1 for RIGHT out of (L-1, L-1). The affine shift
/// against the cost-for-RIGHT convention is reported in `per_step_shift`:
/// shifted_return = original_return + per_step_shift * sum_{t<L} gamma^t.
struct DeepSea {
  TabularMdp mdp;
  double per_step_shift = 0.0;
  int episode_length = 0;
};

DeepSea deepsea(int L, double gamma = 0.99);

/// Property-test fixture: Dirichlet(1) transition rows, uniform rewards,
/// rho mixed with uniform so that min rho >= rho_min_floor.
TabularMdp random_mdp(int n_states, int n_actions, double gamma,
                      std::uint64_t seed, double rho_min_floor);

/// Tags: "bandit:<r0>,<r1>[,...]", "nchain:<n>", "deepsea:<L>",
/// "random:<S>,<A>,<seed>".
TabularMdp parse_env(const std::string& tag, double gamma);

}  // namespace fpg
