#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fpg/constants.hpp"
#include "fpg/gradients.hpp"

namespace fpg {

enum class TrainMode { Exact, Stochastic };

struct TrainConfig {
  double eta = 0.0;
  long long T = 0;
  TrainMode mode = TrainMode::Exact;
  int B = 1;          // Stochastic only
  int H = 1;          // Stochastic only
  double tau = -1.0;  // < 0 selects Auto(tau*)
  bool project = true;
  std::uint64_t seed = 0;
  long long log_every = 1;

  void validate() const;
};

struct RunRow {
  long long iter = 0;
  double reg_value = 0.0;         // regularized value at rho
  double value = 0.0;             // unregularized value at rho
  double grad_norm = 0.0;         // Frobenius norm of the gradient used
  double gap = 0.0;               // v*_reg(rho) - reg_value
  double min_policy_entry = 0.0;
  double wall_clock = 0.0;        // seconds since the run started
};

struct RunRecord {
  std::vector<RunRow> rows;
  double v_star_rho = 0.0;  // soft value-iteration optimum used for gaps
  double tau_used = 0.0;
  bool tau_underflow = false;

  /// CSV columns: iter,reg_value,value,grad_norm,gap,min_policy_entry.
  void write_csv(std::ostream& os) const;
  static RunRecord parse_csv(std::istream& is);
};

struct TrainResult {
  Logits theta;  // the final iterate theta_T
  RunRecord record;
};

/// The coupled policy-gradient loop:
///   theta_{t+1} = T_tau(theta_t + eta g_t),
/// with g_t either the exact gradient or the REINFORCE estimator on a fresh
/// batch (per-iteration stream substream(seed, t)). Rows are logged every
/// log_every iterations plus the final iterate. The projected policy is
/// carried into the next iteration directly (phi is exactly inverted by the
/// softargmax), so each iteration runs one root-finding sweep.
TrainResult train(const RegularizedProblem& prob, const TrainConfig& cfg,
                  const Logits& theta0);

}  // namespace fpg
