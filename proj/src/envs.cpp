#include "fpg/envs.hpp"

#include <cmath>
#include <sstream>

#include "fpg/rng.hpp"

namespace fpg {

TabularMdp bandit(const Eigen::VectorXd& rewards, double gamma) {
  if (rewards.size() < 1 || rewards.minCoeff() < 0.0 ||
      rewards.maxCoeff() > 1.0) {
    throw ValidationError("bandit: rewards must lie in [0, 1]");
  }
  TabularMdp m;
  m.n_states = 1;
  m.n_actions = static_cast<int>(rewards.size());
  m.gamma = gamma;
  m.rho = Eigen::VectorXd::Ones(1);
  m.reward = rewards.transpose();
  m.transition.assign(m.n_actions, Eigen::MatrixXd::Ones(1, 1));
  m.validate();
  return m;
}

TabularMdp nchain(int n, double gamma) {
  if (n < 2) throw ValidationError("nchain: n must be >= 2");
  const int terminal = n;
  TabularMdp m;
  m.n_states = n + 1;
  m.n_actions = 2;
  m.gamma = gamma;
  m.rho = Eigen::VectorXd::Zero(m.n_states);
  m.rho[0] = 1.0;
  m.reward = Eigen::MatrixXd::Zero(m.n_states, 2);
  m.transition.assign(2, Eigen::MatrixXd::Zero(m.n_states, m.n_states));
  for (int s = 0; s < n - 1; ++s) {
    m.transition[0](s, s + 1) = 1.0;  // FORWARD
    if (s + 1 == n - 1) m.reward(s, 0) = 1.0;
    m.transition[1](s, 0) = 1.0;  // BACK
    m.reward(s, 1) = 0.01;
  }
  // Goal cell: both actions fall through to the terminal for 0 reward.
  m.transition[0](n - 1, terminal) = 1.0;
  m.transition[1](n - 1, terminal) = 1.0;
  m.transition[0](terminal, terminal) = 1.0;
  m.transition[1](terminal, terminal) = 1.0;
  m.validate();
  return m;
}

DeepSea deepsea(int L, double gamma) {
  if (L < 2) throw ValidationError("deepsea: L must be >= 2");
  const int terminal = L * L;
  const double bonus = 0.01 / L;
  const auto id = [L](int row, int col) { return row * L + col; };

  DeepSea env;
  TabularMdp& m = env.mdp;
  m.n_states = L * L + 1;
  m.n_actions = 2;
  m.gamma = gamma;
  m.rho = Eigen::VectorXd::Zero(m.n_states);
  m.rho[id(0, 0)] = 1.0;
  m.reward = Eigen::MatrixXd::Zero(m.n_states, 2);
  m.transition.assign(2, Eigen::MatrixXd::Zero(m.n_states, m.n_states));

  for (int row = 0; row < L; ++row) {
    for (int col = 0; col < L; ++col) {
      const int s = id(row, col);
      const int left_col = std::max(col - 1, 0);
      const int right_col = std::min(col + 1, L - 1);
      const int left_next = row + 1 < L ? id(row + 1, left_col) : terminal;
      const int right_next = row + 1 < L ? id(row + 1, right_col) : terminal;
      m.transition[0](s, left_next) = 1.0;   // LEFT
      m.transition[1](s, right_next) = 1.0;  // RIGHT
      m.reward(s, 0) = bonus;
      m.reward(s, 1) = 0.0;
    }
  }
  m.reward(id(L - 1, L - 1), 1) = 1.0;  // treasure on the final RIGHT
  m.transition[0](terminal, terminal) = 1.0;
  m.transition[1](terminal, terminal) = 1.0;
  m.validate();

  env.per_step_shift = bonus;
  env.episode_length = L;
  return env;
}

TabularMdp random_mdp(int n_states, int n_actions, double gamma,
                      std::uint64_t seed, double rho_min_floor) {
  if (n_states < 1 || n_actions < 1) {
    throw ValidationError("random_mdp: sizes must be positive");
  }
  if (rho_min_floor < 0.0 || rho_min_floor * n_states > 1.0) {
    throw ValidationError("random_mdp: rho_min_floor * n_states must be <= 1");
  }
  TabularMdp m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.gamma = gamma;
  m.reward.resize(n_states, n_actions);
  m.transition.assign(n_actions, Eigen::MatrixXd::Zero(n_states, n_states));

  SplitMix64 g = substream(seed, 0);
  for (int a = 0; a < n_actions; ++a) {
    for (int s = 0; s < n_states; ++s) {
      double total = 0.0;
      for (int t = 0; t < n_states; ++t) {
        const double e = -std::log(1.0 - uniform01(g));  // Exp(1)
        m.transition[a](s, t) = e;
        total += e;
      }
      m.transition[a].row(s) /= total;
      m.reward(s, a) = uniform01(g);
    }
  }
  Eigen::VectorXd dir(n_states);
  double total = 0.0;
  for (int s = 0; s < n_states; ++s) {
    dir[s] = -std::log(1.0 - uniform01(g));
    total += dir[s];
  }
  dir /= total;
  m.rho = Eigen::VectorXd::Constant(n_states, rho_min_floor) +
          (1.0 - rho_min_floor * n_states) * dir;
  m.validate();
  return m;
}

TabularMdp parse_env(const std::string& tag, double gamma) {
  const auto colon = tag.find(':');
  const std::string kind = tag.substr(0, colon);
  const std::string args =
      colon == std::string::npos ? std::string() : tag.substr(colon + 1);
  const auto split = [](const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    return parts;
  };
  try {
    if (kind == "bandit") {
      const auto parts = split(args);
      if (parts.size() < 2) {
        throw ValidationError("bandit tag needs at least two rewards");
      }
      Eigen::VectorXd r(parts.size());
      for (size_t i = 0; i < parts.size(); ++i) r[i] = std::stod(parts[i]);
      return bandit(r, gamma);
    }
    if (kind == "nchain") return nchain(std::stoi(args), gamma);
    if (kind == "deepsea") return deepsea(std::stoi(args), gamma).mdp;
    if (kind == "random") {
      const auto parts = split(args);
      if (parts.size() != 3) {
        throw ValidationError("random tag is random:<S>,<A>,<seed>");
      }
      return random_mdp(std::stoi(parts[0]), std::stoi(parts[1]), gamma,
                        std::stoull(parts[2]), 0.0);
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const std::invalid_argument&) {
    throw ValidationError("could not parse env tag '" + tag + "'");
  } catch (const std::out_of_range&) {
    throw ValidationError("could not parse env tag '" + tag + "'");
  }
  throw ValidationError("unknown env tag '" + tag + "'");
}

}  // namespace fpg
