#include "fpg/train.hpp"

#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace fpg {

void TrainConfig::validate() const {
  if (!(eta >= 0.0)) throw ValidationError("train: eta must be >= 0");
  if (T < 0) throw ValidationError("train: T must be >= 0");
  if (log_every < 1) throw ValidationError("train: log_every must be >= 1");
  if (mode == TrainMode::Stochastic && (B < 1 || H < 1)) {
    throw ValidationError("train: stochastic mode needs B >= 1 and H >= 1");
  }
}

void RunRecord::write_csv(std::ostream& os) const {
  os << "iter,reg_value,value,grad_norm,gap,min_policy_entry\n";
  os.precision(17);
  for (const RunRow& r : rows) {
    os << r.iter << ',' << r.reg_value << ',' << r.value << ',' << r.grad_norm
       << ',' << r.gap << ',' << r.min_policy_entry << '\n';
  }
}

RunRecord RunRecord::parse_csv(std::istream& is) {
  RunRecord rec;
  std::string line;
  if (!std::getline(is, line) ||
      line != "iter,reg_value,value,grad_norm,gap,min_policy_entry") {
    throw ValidationError("run record csv: bad header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    RunRow r;
    char c;
    if (!(ss >> r.iter >> c >> r.reg_value >> c >> r.value >> c >>
          r.grad_norm >> c >> r.gap >> c >> r.min_policy_entry)) {
      throw ValidationError("run record csv: bad row '" + line + "'");
    }
    rec.rows.push_back(r);
  }
  return rec;
}

TrainResult train(const RegularizedProblem& prob, const TrainConfig& cfg,
                  const Logits& theta0) {
  cfg.validate();
  prob.validate();
  if (!(prob.lambda > 0.0)) {
    throw DomainError("train requires lambda > 0 (the loop optimizes the "
                      "regularized objective)");
  }
  const auto t_start = std::chrono::steady_clock::now();
  const double d_f = divergence_bound(prob);

  Threshold tau;
  if (cfg.tau >= 0.0) {
    tau.tau = std::min(cfg.tau, 0.5 * prob.gen.pi_ref_floor());
    if (tau.tau <= 0.0) {
      tau.tau = 1e-300;
      tau.underflow_clamped = true;
    }
  } else {
    tau = tau_star_or_limit(prob, d_f, prob.mdp.rho_min());
  }

  const SoftViResult opt = soft_value_iteration(prob);
  const double v_star_rho = opt.v.dot(prob.mdp.rho);

  TrainResult out;
  out.record.v_star_rho = v_star_rho;
  out.record.tau_used = tau.tau;
  out.record.tau_underflow = tau.underflow_clamped;

  Logits theta = theta0;
  LogitsEval ev = policy_from_logits(prob, theta);
  Policy pi = ev.pi;

  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t_start)
        .count();
  };
  const auto log_row = [&](long long iter, const StateCache& cache,
                           double grad_norm, const Eigen::VectorXd* v_reg) {
    RunRow row;
    row.iter = iter;
    const Eigen::VectorXd vr =
        v_reg != nullptr ? *v_reg : evaluate_regularized(prob, cache.pi);
    row.reg_value = vr.dot(prob.mdp.rho);
    row.value = evaluate_policy(prob.mdp, cache.pi).dot(prob.mdp.rho);
    row.grad_norm = grad_norm;
    row.gap = v_star_rho - row.reg_value;
    row.min_policy_entry = cache.pi.pi.minCoeff();
    row.wall_clock = elapsed();
    out.record.rows.push_back(row);
  };

  StateCache cache = make_cache(prob, pi);
  for (long long t = 0; t < cfg.T; ++t) {
    Eigen::MatrixXd g;
    const Eigen::VectorXd* v_reg = nullptr;
    Eigen::VectorXd v_hold;
    if (cfg.mode == TrainMode::Exact) {
      ExactGradient eg = exact_gradient_detail(prob, cache, theta);
      g = std::move(eg.grad);
      v_hold = std::move(eg.v);
      v_reg = &v_hold;
    } else {
      const TrajectoryBatch batch =
          sample_batch(prob.mdp, pi, cfg.B, cfg.H,
                       substream(cfg.seed, static_cast<std::uint64_t>(t))
                           .state);
      g = stochastic_gradient(prob, cache, batch);
    }
    if (!g.allFinite()) {
      throw NumericError(
          "train: non-finite gradient at iteration " + std::to_string(t) +
              " (min policy entry " +
              std::to_string(cache.pi.pi.minCoeff()) + ")",
          0.0);
    }
    const double grad_norm = g.norm();
    if (t % cfg.log_every == 0) log_row(t, cache, grad_norm, v_reg);

    const Logits stepped = theta + cfg.eta * g;
    if (cfg.project) {
      const LogitsEval raw = policy_from_logits(prob, stepped);
      pi = improve_policy(prob, raw.pi, tau.tau);
      theta = logits_from_policy(prob, pi);
    } else {
      const LogitsEval raw = policy_from_logits(prob, stepped);
      pi = raw.pi;
      theta = stepped;
    }
    cache = make_cache(prob, pi);
  }
  log_row(cfg.T, cache, 0.0, nullptr);

  out.theta = theta;
  return out;
}

}  // namespace fpg
