#include "fpg/mdp.hpp"

#include <cmath>

#include "json.hpp"

namespace fpg {

void TabularMdp::validate() const {
  if (n_states <= 0 || n_actions <= 0) {
    throw ValidationError("mdp: state and action counts must be positive");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw ValidationError("mdp: gamma must lie in [0, 1)");
  }
  if (rho.size() != n_states || std::abs(rho.sum() - 1.0) > 1e-10 ||
      rho.minCoeff() < 0.0) {
    throw ValidationError("mdp: rho must be a distribution over states");
  }
  if (reward.rows() != n_states || reward.cols() != n_actions ||
      reward.minCoeff() < 0.0 || reward.maxCoeff() > 1.0) {
    throw ValidationError("mdp: rewards must be S x A with entries in [0,1]");
  }
  if (static_cast<int>(transition.size()) != n_actions) {
    throw ValidationError("mdp: one transition matrix per action required");
  }
  for (const auto& p : transition) {
    if (p.rows() != n_states || p.cols() != n_states || p.minCoeff() < 0.0) {
      throw ValidationError("mdp: transition matrices must be S x S, >= 0");
    }
    for (int s = 0; s < n_states; ++s) {
      if (std::abs(p.row(s).sum() - 1.0) > 1e-10) {
        throw ValidationError("mdp: transition row does not sum to 1");
      }
    }
  }
}

Policy Policy::uniform(int n_states, int n_actions) {
  Policy p;
  p.pi = Eigen::MatrixXd::Constant(n_states, n_actions, 1.0 / n_actions);
  return p;
}

void Policy::validate() const {
  if (pi.rows() == 0 || pi.cols() == 0 || !(pi.minCoeff() > 0.0)) {
    throw ValidationError("policy: entries must be strictly positive");
  }
  for (Eigen::Index s = 0; s < pi.rows(); ++s) {
    if (std::abs(pi.row(s).sum() - 1.0) > 1e-10) {
      throw ValidationError("policy: row does not sum to 1");
    }
  }
}

void RegularizedProblem::validate() const {
  mdp.validate();
  pi_ref.validate();
  if (pi_ref.pi.rows() != mdp.n_states || pi_ref.pi.cols() != mdp.n_actions) {
    throw ValidationError("problem: pi_ref shape does not match the MDP");
  }
  if (lambda < 0.0) throw ValidationError("problem: lambda must be >= 0");
  if (pi_ref.pi.minCoeff() < gen.pi_ref_floor() - 1e-15) {
    throw ValidationError(
        "problem: pi_ref violates the generator's pi_ref_floor");
  }
}

Eigen::MatrixXd policy_kernel(const TabularMdp& mdp, const Policy& pi) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_states);
  for (int a = 0; a < mdp.n_actions; ++a) {
    k.noalias() += pi.pi.col(a).asDiagonal() * mdp.transition[a];
  }
  return k;
}

Eigen::VectorXd regularized_reward(const RegularizedProblem& prob,
                                   const Policy& pi) {
  const int ns = prob.mdp.n_states;
  Eigen::VectorXd r(ns);
  for (int s = 0; s < ns; ++s) {
    r[s] = pi.pi.row(s).dot(prob.mdp.reward.row(s));
    if (prob.lambda != 0.0) {
      r[s] -= prob.lambda * divergence(prob.gen, pi.pi.row(s).transpose(),
                                       prob.pi_ref.pi.row(s).transpose());
    }
  }
  return r;
}

Eigen::VectorXd evaluate_regularized(const RegularizedProblem& prob,
                                     const Policy& pi) {
  const int ns = prob.mdp.n_states;
  const Eigen::MatrixXd sys =
      Eigen::MatrixXd::Identity(ns, ns) -
      prob.mdp.gamma * policy_kernel(prob.mdp, pi);
  return sys.partialPivLu().solve(regularized_reward(prob, pi));
}

Eigen::VectorXd evaluate_policy(const TabularMdp& mdp, const Policy& pi) {
  const int ns = mdp.n_states;
  Eigen::VectorXd r(ns);
  for (int s = 0; s < ns; ++s) r[s] = pi.pi.row(s).dot(mdp.reward.row(s));
  const Eigen::MatrixXd sys =
      Eigen::MatrixXd::Identity(ns, ns) - mdp.gamma * policy_kernel(mdp, pi);
  return sys.partialPivLu().solve(r);
}

Eigen::MatrixXd q_function(const RegularizedProblem& prob,
                           const Eigen::VectorXd& v) {
  Eigen::MatrixXd q = prob.mdp.reward;
  for (int a = 0; a < prob.mdp.n_actions; ++a) {
    q.col(a).noalias() += prob.mdp.gamma * (prob.mdp.transition[a] * v);
  }
  return q;
}

Occupancy occupancy(const TabularMdp& mdp, const Policy& pi,
                    const Eigen::VectorXd& rho) {
  const int ns = mdp.n_states;
  const Eigen::MatrixXd sys =
      Eigen::MatrixXd::Identity(ns, ns) -
      mdp.gamma * policy_kernel(mdp, pi).transpose();
  Occupancy occ;
  occ.gamma = mdp.gamma;
  occ.normalized = (1.0 - mdp.gamma) * sys.partialPivLu().solve(rho);
  return occ;
}

SoftViResult soft_value_iteration(const RegularizedProblem& prob, double tol,
                                  int max_iter, Exec exec) {
  if (!(prob.lambda > 0.0)) {
    throw DomainError("soft_value_iteration requires lambda > 0");
  }
  const int ns = prob.mdp.n_states;
  if (max_iter < 0) {
    max_iter = prob.mdp.gamma == 0.0
                   ? 2
                   : static_cast<int>(std::ceil(
                         std::log(tol * (1.0 - prob.mdp.gamma)) /
                         std::log(prob.mdp.gamma))) +
                         100;
  }

  Eigen::VectorXd v = Eigen::VectorXd::Zero(ns);
  Eigen::VectorXd v_next(ns);
  double residual = 0.0;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const Eigen::MatrixXd q = q_function(prob, v);
    parallel_for(
        ns,
        [&](int s) {
          v_next[s] = prob.lambda *
                      softmax_value(prob.gen,
                                    q.row(s).transpose() / prob.lambda,
                                    prob.pi_ref.pi.row(s).transpose());
        },
        exec);
    residual = (v_next - v).cwiseAbs().maxCoeff();
    v = v_next;
    if (residual < tol) break;
  }
  if (residual >= tol) {
    throw NumericError("soft_value_iteration exceeded max_iter", residual);
  }

  SoftViResult out;
  out.v = v;
  out.iterations = iter + 1;
  out.residual = residual;
  out.states.resize(ns);
  out.pi.pi.resize(ns, prob.mdp.n_actions);
  const Eigen::MatrixXd q = q_function(prob, v);
  parallel_for(
      ns,
      [&](int s) {
        out.states[s] = softargmax(prob.gen, q.row(s).transpose() / prob.lambda,
                                   prob.pi_ref.pi.row(s).transpose());
        out.pi.pi.row(s) = out.states[s].probs.transpose();
      },
      exec);
  return out;
}

std::string mdp_to_json(const TabularMdp& mdp) {
  nlohmann::json j;
  j["n_states"] = mdp.n_states;
  j["n_actions"] = mdp.n_actions;
  j["gamma"] = mdp.gamma;
  j["rho"] = std::vector<double>(mdp.rho.data(), mdp.rho.data() + mdp.rho.size());
  auto reward = nlohmann::json::array();
  for (int s = 0; s < mdp.n_states; ++s) {
    auto row = nlohmann::json::array();
    for (int a = 0; a < mdp.n_actions; ++a) row.push_back(mdp.reward(s, a));
    reward.push_back(row);
  }
  j["reward"] = reward;
  auto transition = nlohmann::json::array();
  for (int s = 0; s < mdp.n_states; ++s) {
    auto per_action = nlohmann::json::array();
    for (int a = 0; a < mdp.n_actions; ++a) {
      auto row = nlohmann::json::array();
      for (int t = 0; t < mdp.n_states; ++t) {
        row.push_back(mdp.transition[a](s, t));
      }
      per_action.push_back(row);
    }
    transition.push_back(per_action);
  }
  j["transition"] = transition;
  return j.dump(2);
}

TabularMdp mdp_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("mdp json parse failed: ") + e.what());
  }
  TabularMdp mdp;
  try {
    mdp.n_states = j.at("n_states").get<int>();
    mdp.n_actions = j.at("n_actions").get<int>();
    mdp.gamma = j.at("gamma").get<double>();
    const auto rho = j.at("rho").get<std::vector<double>>();
    mdp.rho = Eigen::Map<const Eigen::VectorXd>(rho.data(), rho.size());
    mdp.reward.resize(mdp.n_states, mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int a = 0; a < mdp.n_actions; ++a) {
        mdp.reward(s, a) = j.at("reward").at(s).at(a).get<double>();
      }
    }
    mdp.transition.assign(mdp.n_actions,
                          Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_states));
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int a = 0; a < mdp.n_actions; ++a) {
        for (int t = 0; t < mdp.n_states; ++t) {
          mdp.transition[a](s, t) =
              j.at("transition").at(s).at(a).at(t).get<double>();
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("mdp json schema mismatch: ") +
                          e.what());
  }
  mdp.validate();
  return mdp;
}

}  // namespace fpg
