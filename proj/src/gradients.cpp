#include "fpg/gradients.hpp"

#include <cmath>

namespace fpg {

StateCache make_cache(const RegularizedProblem& prob, const Policy& pi) {
  const int ns = prob.mdp.n_states;
  const int na = prob.mdp.n_actions;
  StateCache c;
  c.pi = pi;
  c.weights.resize(ns, na);
  c.fprime_ratio.resize(ns, na);
  c.s_sum.resize(ns);
  c.y_sum.resize(ns);
  c.div_ref.resize(ns);
  for (int s = 0; s < ns; ++s) {
    double ssum = 0.0, ysum = 0.0;
    for (int a = 0; a < na; ++a) {
      const double ref = prob.pi_ref.pi(s, a);
      const double u = pi.pi(s, a) / ref;
      const double fpp = prob.gen.f_second(u);
      c.weights(s, a) = ref / fpp;
      c.fprime_ratio(s, a) = prob.gen.f_prime(u);
      ssum += c.weights(s, a);
      ysum += ref * std::abs(c.fprime_ratio(s, a)) / fpp;
    }
    c.s_sum[s] = ssum;
    c.y_sum[s] = ysum;
    c.weights.row(s) /= ssum;
    c.div_ref[s] = divergence(prob.gen, pi.pi.row(s).transpose(),
                              prob.pi_ref.pi.row(s).transpose());
  }
  return c;
}

LogitsEval policy_from_logits(const RegularizedProblem& prob,
                              const Logits& theta, Exec exec) {
  const int ns = prob.mdp.n_states;
  if (theta.rows() != ns || theta.cols() != prob.mdp.n_actions) {
    throw ValidationError("logits shape does not match the problem");
  }
  LogitsEval ev;
  ev.pi.pi.resize(ns, prob.mdp.n_actions);
  ev.mu.resize(ns);
  parallel_for(
      ns,
      [&](int s) {
        const SoftArgmaxResult r =
            softargmax(prob.gen, theta.row(s).transpose(),
                       prob.pi_ref.pi.row(s).transpose());
        ev.pi.pi.row(s) = r.probs.transpose();
        ev.mu[s] = r.mu;
      },
      exec);
  return ev;
}

ExactGradient exact_gradient_detail(const RegularizedProblem& prob,
                                    const StateCache& cache,
                                    const Logits& theta) {
  ExactGradient out;
  out.v = evaluate_regularized(prob, cache.pi);
  out.q = q_function(prob, out.v);
  out.occ = occupancy(prob.mdp, cache.pi, prob.mdp.rho);

  const int ns = prob.mdp.n_states;
  const int na = prob.mdp.n_actions;
  const Eigen::VectorXd d = out.occ.discounted();
  out.grad.resize(ns, na);
  for (int s = 0; s < ns; ++s) {
    // H(w) [q - lambda theta] = w .* z - (w.z) w, computed row-wise.
    Eigen::VectorXd z =
        out.q.row(s).transpose() - prob.lambda * theta.row(s).transpose();
    const Eigen::VectorXd w = cache.weights.row(s).transpose();
    const double wz = w.dot(z);
    out.grad.row(s) =
        (cache.s_sum[s] * d[s]) * (w.array() * (z.array() - wz)).matrix();
  }
  return out;
}

Eigen::MatrixXd exact_gradient(const RegularizedProblem& prob,
                               const Logits& theta) {
  const LogitsEval ev = policy_from_logits(prob, theta);
  const StateCache cache = make_cache(prob, ev.pi);
  return exact_gradient_detail(prob, cache, theta).grad;
}

SparseScoreRow log_policy_gradient(const RegularizedProblem& prob,
                                   const StateCache& cache, int s, int a) {
  (void)prob;
  SparseScoreRow r;
  r.state = s;
  const Eigen::VectorXd w = cache.weights.row(s).transpose();
  r.row = -(cache.s_sum[s] * w[a] / cache.pi.pi(s, a)) * w;
  r.row[a] += cache.s_sum[s] * w[a] / cache.pi.pi(s, a);
  return r;
}

SparseScoreRow reinforce_correction(const RegularizedProblem& prob,
                                    const StateCache& cache, int s) {
  (void)prob;
  SparseScoreRow r;
  r.state = s;
  const Eigen::VectorXd w = cache.weights.row(s).transpose();
  const Eigen::VectorXd fp = cache.fprime_ratio.row(s).transpose();
  const double centred = w.dot(fp);
  r.row = cache.s_sum[s] * (w.array() * (fp.array() - centred)).matrix();
  return r;
}

TrajectoryBatch sample_batch(const TabularMdp& mdp, const Policy& pi, int B,
                             int H, std::uint64_t seed, Exec exec) {
  if (B < 1 || H < 1) throw ValidationError("sample_batch: B, H must be >= 1");
  if (static_cast<long long>(B) * H > 10'000'000LL) {
    throw ValidationError("sample_batch: B*H exceeds the 1e7 guard");
  }
  TrajectoryBatch batch;
  batch.batch_size = B;
  batch.horizon = H;
  batch.seed = seed;
  batch.states.resize(B, H);
  batch.actions.resize(B, H);
  const int na = mdp.n_actions;
  parallel_for(
      B,
      [&](int b) {
        SplitMix64 g = substream(seed, static_cast<std::uint64_t>(b));
        int s = categorical(g, mdp.rho.data(), mdp.n_states);
        for (int h = 0; h < H; ++h) {
          batch.states(b, h) = s;
          // Rows of column-major matrices are strided; walk them in place.
          double u = uniform01(g);
          double acc = 0.0;
          int a = na - 1;
          for (int c = 0; c < na; ++c) {
            acc += pi.pi(s, c);
            if (u < acc) {
              a = c;
              break;
            }
          }
          batch.actions(b, h) = a;
          u = uniform01(g);
          acc = 0.0;
          int next = mdp.n_states - 1;
          for (int t = 0; t < mdp.n_states; ++t) {
            acc += mdp.transition[a](s, t);
            if (u < acc) {
              next = t;
              break;
            }
          }
          s = next;
        }
      },
      exec, /*grain=*/4);
  return batch;
}

Eigen::MatrixXd stochastic_gradient(const RegularizedProblem& prob,
                                    const StateCache& cache,
                                    const TrajectoryBatch& batch, Exec exec) {
  const int ns = prob.mdp.n_states;
  const int na = prob.mdp.n_actions;
  const int B = batch.batch_size;
  const int H = batch.horizon;
  const double gamma = prob.mdp.gamma;
  const double lambda = prob.lambda;

  // Trajectories accumulate into fixed 64-trajectory chunks; chunks are
  // summed serially in order, so the result does not depend on the worker
  // count while the accumulator memory stays at chunks * S * A.
  constexpr int kChunk = 64;
  const int n_chunks = (B + kChunk - 1) / kChunk;
  std::vector<Eigen::MatrixXd> contrib(
      n_chunks, Eigen::MatrixXd::Zero(ns, na));

  Eigen::VectorXd gamma_pow(H);
  gamma_pow[0] = 1.0;
  for (int h = 1; h < H; ++h) gamma_pow[h] = gamma_pow[h - 1] * gamma;

  const auto add_trajectory = [&](int b, Eigen::MatrixXd& g) {
    // Suffix sums R(l) = sum_{h>=l} gamma^h r_h and
    // DD(l) = sum_{h>=l} gamma^h D(s_h); DD enters shifted by one step.
    Eigen::VectorXd reward_suffix(H + 1);
    Eigen::VectorXd div_suffix(H + 1);
    reward_suffix[H] = 0.0;
    div_suffix[H] = 0.0;
    for (int h = H - 1; h >= 0; --h) {
      const int s = batch.states(b, h);
      reward_suffix[h] = reward_suffix[h + 1] +
                         gamma_pow[h] * prob.mdp.reward(s, batch.actions(b, h));
      div_suffix[h] = div_suffix[h + 1] + gamma_pow[h] * cache.div_ref[s];
    }
    for (int l = 0; l < H; ++l) {
      const int s = batch.states(b, l);
      const int a = batch.actions(b, l);
      const double coef = reward_suffix[l] - lambda * div_suffix[l + 1];
      if (coef != 0.0) {
        const double scale =
            cache.s_sum[s] * cache.weights(s, a) / cache.pi.pi(s, a);
        for (int c = 0; c < na; ++c) {
          g(s, c) -= coef * scale * cache.weights(s, c);
        }
        g(s, a) += coef * scale;
      }
    }
    if (lambda != 0.0) {
      for (int h = 0; h < H; ++h) {
        const int s = batch.states(b, h);
        const double wfp = cache.weights.row(s).dot(cache.fprime_ratio.row(s));
        for (int c = 0; c < na; ++c) {
          g(s, c) -= lambda * gamma_pow[h] * cache.s_sum[s] *
                     cache.weights(s, c) * (cache.fprime_ratio(s, c) - wfp);
        }
      }
    }
  };

  parallel_for(
      n_chunks,
      [&](int c) {
        const int end = std::min(B, (c + 1) * kChunk);
        for (int b = c * kChunk; b < end; ++b) {
          add_trajectory(b, contrib[c]);
        }
      },
      exec, /*grain=*/2);

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(ns, na);
  for (const Eigen::MatrixXd& part : contrib) sum += part;
  return sum / static_cast<double>(B);
}

}  // namespace fpg
