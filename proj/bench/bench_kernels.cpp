// Wall-clock comparison of the OpenMP kernels against their serial
// reference paths. The outputs are bit-identical by construction (slot
// writes plus serial reductions); this target just reports the speedup.

#include <chrono>
#include <cstdio>

#include "fpg/constants.hpp"
#include "fpg/envs.hpp"
#include "fpg/gradients.hpp"
#include "fpg/parallel.hpp"

using namespace fpg;

namespace {

template <typename F>
double time_best_of(int reps, F&& fn) {
  double best = 1e308;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n",
              name, serial * 1e3, parallel * 1e3, serial / parallel);
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", hardware_threads());

  // Per-state softargmax sweep on a large random problem.
  {
    auto mdp = random_mdp(3000, 8, 0.95, 4, 1e-5);
    RegularizedProblem prob{std::move(mdp),
                            GeneratorSpec::tsallis(0.5, 1.0 / 8),
                            0.3,
                            Policy::uniform(3000, 8)};
    SplitMix64 rng(1);
    Logits theta(3000, 8);
    for (int s = 0; s < 3000; ++s) {
      for (int a = 0; a < 8; ++a) theta(s, a) = 2.0 * normal01(rng);
    }
    Eigen::MatrixXd sink;
    const double ts = time_best_of(3, [&] {
      sink = policy_from_logits(prob, theta, Exec::Serial).pi.pi;
    });
    const double tp = time_best_of(3, [&] {
      sink = policy_from_logits(prob, theta, Exec::Parallel).pi.pi;
    });
    report("policy_from_logits (S=3000)", ts, tp);

    const LogitsEval ev = policy_from_logits(prob, theta);
    const StateCache cache = make_cache(prob, ev.pi);
    Eigen::MatrixXd grad;
    const double gs = time_best_of(3, [&] {
      const TrajectoryBatch batch =
          sample_batch(prob.mdp, cache.pi, 4000, 200, 9, Exec::Serial);
      grad = stochastic_gradient(prob, cache, batch, Exec::Serial);
    });
    const double gp = time_best_of(3, [&] {
      const TrajectoryBatch batch =
          sample_batch(prob.mdp, cache.pi, 4000, 200, 9, Exec::Parallel);
      grad = stochastic_gradient(prob, cache, batch, Exec::Parallel);
    });
    report("sample+estimate (B=4k,H=200)", gs, gp);
  }

  // Sampling-heavy workload at a moderate state count (dense categorical
  // draws are O(S) per step).
  {
    auto mdp = random_mdp(300, 6, 0.97, 11, 1e-4);
    RegularizedProblem prob{std::move(mdp), GeneratorSpec::kl(1.0 / 6), 0.1,
                            Policy::uniform(300, 6)};
    const StateCache cache = make_cache(prob, prob.pi_ref);
    TrajectoryBatch batch;
    const double bs = time_best_of(3, [&] {
      batch = sample_batch(prob.mdp, cache.pi, 20000, 100, 9, Exec::Serial);
    });
    const double bp = time_best_of(3, [&] {
      batch = sample_batch(prob.mdp, cache.pi, 20000, 100, 9, Exec::Parallel);
    });
    report("sample_batch (B=20k, H=100)", bs, bp);

    Eigen::MatrixXd grad;
    const double es = time_best_of(3, [&] {
      grad = stochastic_gradient(prob, cache, batch, Exec::Serial);
    });
    const double ep = time_best_of(3, [&] {
      grad = stochastic_gradient(prob, cache, batch, Exec::Parallel);
    });
    report("stochastic_gradient", es, ep);
  }

  // Soft value iteration on a mid-sized model.
  {
    auto prob = RegularizedProblem{deepsea(20, 0.99).mdp,
                                   GeneratorSpec::tsallis(0.5, 0.5), 0.05,
                                   Policy::uniform(401, 2)};
    SoftViResult out;
    const double vs = time_best_of(2, [&] {
      out = soft_value_iteration(prob, 1e-8, -1, Exec::Serial);
    });
    const double vp = time_best_of(2, [&] {
      out = soft_value_iteration(prob, 1e-8, -1, Exec::Parallel);
    });
    report("soft_value_iteration", vs, vp);
    std::printf("  (deepsea-20, %d sweeps to 1e-8)\n", out.iterations);
  }
  return 0;
}
