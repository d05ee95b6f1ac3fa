#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "fpg/constants.hpp"
#include "fpg/envs.hpp"
#include "fpg/gradients.hpp"
#include "test_util.hpp"

using namespace fpg;

TEST_CASE("policy_from_logits basics") {
  Eigen::VectorXd r(2);
  r << 0.0, 1.0;
  auto prob = testutil::uniform_problem(bandit(r, 0.0), "kl", 1.0);

  CHECK((policy_from_logits(prob, Logits::Zero(1, 2)).pi.pi -
         prob.pi_ref.pi)
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  Logits theta(1, 2);
  theta << 0.0, std::log(3.0);
  const LogitsEval ev = policy_from_logits(prob, theta);
  CHECK(ev.pi.pi(0, 0) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(ev.pi.pi(0, 1) == doctest::Approx(0.75).epsilon(1e-10));

  // Constant rows reproduce the reference for every generator.
  fpg::SplitMix64 rng(1);
  for (const auto& tag : testutil::generator_tags()) {
    auto p = testutil::uniform_problem(random_mdp(3, 3, 0.8, 7, 0.05), tag,
                                       0.5);
    Logits c = Logits::Zero(3, 3);
    for (int s = 0; s < 3; ++s) {
      c.row(s).setConstant(4.0 * (uniform01(rng) - 0.5));
    }
    CHECK((policy_from_logits(p, c).pi.pi - p.pi_ref.pi)
              .cwiseAbs()
              .maxCoeff() < 1e-9);
  }
}

TEST_CASE("serial and parallel logits evaluation agree bitwise") {
  auto prob = testutil::uniform_problem(random_mdp(40, 4, 0.9, 21, 0.01),
                                        "tsallis:0.7", 0.4);
  fpg::SplitMix64 rng(5);
  const Logits theta = testutil::random_logits(rng, 40, 4, 2.0);
  const LogitsEval a = policy_from_logits(prob, theta, Exec::Parallel);
  const LogitsEval b = policy_from_logits(prob, theta, Exec::Serial);
  CHECK(a.pi.pi == b.pi.pi);
  CHECK(a.mu == b.mu);
}

TEST_CASE("exact gradient on the bandit") {
  Eigen::VectorXd r(2);
  r << 0.0, 1.0;
  auto prob = testutil::uniform_problem(bandit(r, 0.0), "kl", 1.0);
  const Eigen::MatrixXd g = exact_gradient(prob, Logits::Zero(1, 2));
  CHECK(g(0, 0) == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(g(0, 1) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("gradient vanishes at the soft optimum") {
  for (const auto& tag : {"kl", "tsallis:0.5"}) {
    auto prob = testutil::uniform_problem(random_mdp(4, 3, 0.8, 3, 0.05), tag,
                                          0.5);
    const SoftViResult res = soft_value_iteration(prob, 1e-13);
    const Eigen::MatrixXd q = q_function(prob, res.v);
    const Eigen::MatrixXd g = exact_gradient(prob, q / prob.lambda);
    CHECK(g.cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("exact gradient matches finite differences") {
  fpg::SplitMix64 rng(77);
  const auto tags = testutil::generator_tags();
  for (int trial = 0; trial < 10; ++trial) {
    const int ns = 2 + trial % 4, na = 2 + trial % 3;
    auto prob = testutil::uniform_problem(
        random_mdp(ns, na, trial % 2 == 0 ? 0.5 : 0.9, 6000 + trial, 0.02),
        tags[trial % tags.size()], trial % 2 == 0 ? 0.1 : 1.0);
    const Logits theta = testutil::random_logits(rng, ns, na);
    const Eigen::MatrixXd g = exact_gradient(prob, theta);
    const Eigen::MatrixXd fd = testutil::finite_difference(
        [&](const Logits& t) {
          return evaluate_regularized(prob, policy_from_logits(prob, t).pi)
              .dot(prob.mdp.rho);
        },
        theta);
    const double rel = (fd - g).cwiseAbs().maxCoeff() /
                       std::max(1e-8, g.cwiseAbs().maxCoeff());
    CHECK(rel < 1e-5);
    // Rows orthogonal to the all-ones direction.
    CHECK(g.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("KL gradient equals the classical softmax-entropy formula") {
  fpg::SplitMix64 rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const int ns = 2 + trial % 3, na = 2 + trial % 3;
    auto prob = testutil::uniform_problem(
        random_mdp(ns, na, 0.8, 9000 + trial, 0.02), "kl",
        0.2 + uniform01(rng));
    const Logits theta = testutil::random_logits(rng, ns, na, 1.5);

    // Independent route: closed-form softmax + the standard formula.
    Policy pi;
    pi.pi.resize(ns, na);
    for (int s = 0; s < ns; ++s) {
      Eigen::VectorXd row =
          prob.pi_ref.pi.row(s).transpose().array() *
          (theta.row(s).transpose().array() -
           theta.row(s).maxCoeff()).exp();
      pi.pi.row(s) = (row / row.sum()).transpose();
    }
    const Eigen::VectorXd v = evaluate_regularized(prob, pi);
    const Eigen::MatrixXd q = q_function(prob, v);
    const Eigen::VectorXd d =
        occupancy(prob.mdp, pi, prob.mdp.rho).discounted();
    Eigen::MatrixXd classical(ns, na);
    for (int s = 0; s < ns; ++s) {
      const Eigen::VectorXd adv =
          q.row(s).transpose() - prob.lambda * theta.row(s).transpose();
      const double mean = pi.pi.row(s) * adv;
      for (int a = 0; a < na; ++a) {
        classical(s, a) = d[s] * pi.pi(s, a) * (adv[a] - mean);
      }
    }
    CHECK((exact_gradient(prob, theta) - classical).cwiseAbs().maxCoeff() <
          1e-10);
  }
}

TEST_CASE("log policy gradient") {
  auto prob = testutil::uniform_problem(random_mdp(3, 3, 0.7, 4, 0.05),
                                        "tsallis:0.3", 0.5);
  fpg::SplitMix64 rng(31);
  const Logits theta = testutil::random_logits(rng, 3, 3);
  const LogitsEval ev = policy_from_logits(prob, theta);
  const StateCache cache = make_cache(prob, ev.pi);

  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 3; ++a) {
      const SparseScoreRow score = log_policy_gradient(prob, cache, s, a);
      CHECK(score.state == s);
      // Row contraction with the ones vector vanishes (weights sum to one).
      CHECK(std::abs(score.row.sum()) < 1e-10);
      // Finite differences of log pi.
      for (int b = 0; b < 3; ++b) {
        const double h = 1e-6;
        Logits up = theta, dn = theta;
        up(s, b) += h;
        dn(s, b) -= h;
        const double fd =
            (std::log(policy_from_logits(prob, up).pi.pi(s, a)) -
             std::log(policy_from_logits(prob, dn).pi.pi(s, a))) /
            (2 * h);
        CHECK(std::abs(fd - score.row[b]) < 1e-5);
      }
    }
  }

  // KL case: the classical score 1{b=a} - pi(b|s).
  auto klp = testutil::uniform_problem(random_mdp(2, 3, 0.7, 8, 0.05), "kl",
                                       1.0);
  const Logits kltheta = testutil::random_logits(rng, 2, 3);
  const StateCache klcache =
      make_cache(klp, policy_from_logits(klp, kltheta).pi);
  const SparseScoreRow sc = log_policy_gradient(klp, klcache, 1, 2);
  for (int b = 0; b < 3; ++b) {
    const double expected = (b == 2 ? 1.0 : 0.0) - klcache.pi.pi(1, b);
    CHECK(std::abs(sc.row[b] - expected) < 1e-9);
  }
}

TEST_CASE("reinforce correction") {
  auto prob = testutil::uniform_problem(random_mdp(3, 2, 0.7, 14, 0.05),
                                        "tsallis:0.5", 0.5);
  // At theta = 0 the policy is the reference and the correction vanishes.
  const StateCache at_ref =
      make_cache(prob, policy_from_logits(prob, Logits::Zero(3, 2)).pi);
  for (int s = 0; s < 3; ++s) {
    CHECK(reinforce_correction(prob, at_ref, s).row.cwiseAbs().maxCoeff() <
          1e-10);
  }
  // Centering identity: sum_b w(b) delta(b) = 0.
  fpg::SplitMix64 rng(3);
  const StateCache cache = make_cache(
      prob, policy_from_logits(prob, testutil::random_logits(rng, 3, 2)).pi);
  for (int s = 0; s < 3; ++s) {
    const SparseScoreRow m = reinforce_correction(prob, cache, s);
    CHECK(std::abs(m.row.dot(Eigen::VectorXd::Ones(2)) -
                   cache.s_sum[s] * 0.0) < 1e-12);
  }

  // KL bandit numeric check: delta(b) = log ratio minus its pi-average.
  Eigen::VectorXd r(2);
  r << 0.0, 1.0;
  auto bp = testutil::uniform_problem(bandit(r, 0.0), "kl", 1.0);
  Policy pi;
  pi.pi.resize(1, 2);
  pi.pi << 0.25, 0.75;
  const StateCache bcache = make_cache(bp, pi);
  const SparseScoreRow m = reinforce_correction(bp, bcache, 0);
  const double l0 = std::log(0.25 / 0.5), l1 = std::log(0.75 / 0.5);
  const double avg = 0.25 * l0 + 0.75 * l1;
  CHECK(m.row[0] == doctest::Approx(0.25 * (l0 - avg)).epsilon(1e-10));
  CHECK(m.row[1] == doctest::Approx(0.75 * (l1 - avg)).epsilon(1e-10));
}

TEST_CASE("sample_batch determinism and distribution") {
  const TabularMdp chain = nchain(4, 0.9);
  Policy forward;
  forward.pi = Eigen::MatrixXd::Constant(5, 2, 1e-12);
  forward.pi.col(0).setConstant(1.0 - 1e-12);

  // Deterministic environment + (numerically) deterministic policy.
  const TrajectoryBatch path = sample_batch(chain, forward, 1, 5, 7);
  CHECK(path.states(0, 0) == 0);
  CHECK(path.states(0, 1) == 1);
  CHECK(path.states(0, 2) == 2);
  CHECK(path.states(0, 3) == 3);
  CHECK(path.states(0, 4) == 4);  // absorbed

  const TrajectoryBatch a = sample_batch(chain, forward, 64, 20, 99);
  const TrajectoryBatch b = sample_batch(chain, forward, 64, 20, 99);
  CHECK(a.states == b.states);
  CHECK(a.actions == b.actions);
  const TrajectoryBatch c =
      sample_batch(chain, forward, 64, 20, 99, Exec::Serial);
  CHECK(a.states == c.states);
  CHECK(a.actions == c.actions);

  // Initial states follow rho (multinomial check, 3 sigma).
  const TabularMdp mdp = random_mdp(4, 2, 0.9, 5, 0.05);
  fpg::SplitMix64 rng(2);
  const Policy pi = testutil::random_policy(rng, 4, 2, 0.05);
  const int n = 100000;
  const TrajectoryBatch batch = sample_batch(mdp, pi, n, 2, 31);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(4);
  for (int i = 0; i < n; ++i) counts[batch.states(i, 0)] += 1.0;
  for (int s = 0; s < 4; ++s) {
    const double p = mdp.rho[s];
    const double sigma = std::sqrt(p * (1.0 - p) * n);
    CHECK(std::abs(counts[s] - p * n) < 3.0 * sigma + 3.0);
  }

  CHECK_THROWS_AS(sample_batch(mdp, pi, 100000, 200, 1), ValidationError);
}

TEST_CASE("single-step REINFORCE reduction") {
  // lambda = 0, H = 1, B = 1: the estimator is dlog pi(a0|s0) r(s0, a0).
  auto prob = testutil::uniform_problem(random_mdp(3, 2, 0.9, 16, 0.05),
                                        "tsallis:0.5", 0.0);
  fpg::SplitMix64 rng(6);
  const Logits theta = testutil::random_logits(rng, 3, 2);
  const StateCache cache =
      make_cache(prob, policy_from_logits(prob, theta).pi);
  const TrajectoryBatch batch = sample_batch(prob.mdp, cache.pi, 1, 1, 123);
  const Eigen::MatrixXd g = stochastic_gradient(prob, cache, batch);
  const int s0 = batch.states(0, 0), a0 = batch.actions(0, 0);
  const SparseScoreRow score = log_policy_gradient(prob, cache, s0, a0);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 2);
  expected.row(s0) = prob.mdp.reward(s0, a0) * score.row.transpose();
  CHECK((g - expected).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("estimator mean matches the truncated-gradient oracle") {
  auto prob = testutil::uniform_problem(random_mdp(3, 2, 0.6, 19, 0.1),
                                        "tsallis:0.5", 0.4);
  fpg::SplitMix64 rng(9);
  const Logits theta = testutil::random_logits(rng, 3, 2, 0.7);
  const StateCache cache =
      make_cache(prob, policy_from_logits(prob, theta).pi);
  const int H = 8;
  const Eigen::MatrixXd oracle =
      testutil::truncated_gradient_oracle(prob, cache, H);

  const int n = 200000;
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(3, 2);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(3, 2);
  for (int i = 0; i < n; ++i) {
    const TrajectoryBatch batch =
        sample_batch(prob.mdp, cache.pi, 1, H, substream(1000, i).state,
                     Exec::Serial);
    const Eigen::MatrixXd u =
        stochastic_gradient(prob, cache, batch, Exec::Serial);
    mean += u;
    m2 += u.cwiseProduct(u);
  }
  mean /= n;
  m2 /= n;
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 2; ++a) {
      const double se = std::sqrt(
          std::max(0.0, m2(s, a) - mean(s, a) * mean(s, a)) / n);
      CHECK(std::abs(mean(s, a) - oracle(s, a)) < 4.0 * se + 1e-8);
    }
  }

  // And the oracle itself converges to the exact gradient as H grows.
  const Eigen::MatrixXd g = exact_gradient_detail(prob, cache, theta).grad;
  const Eigen::MatrixXd deep =
      testutil::truncated_gradient_oracle(prob, cache, 80);
  CHECK((deep - g).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("stochastic gradient is deterministic across exec modes") {
  auto prob = testutil::uniform_problem(random_mdp(4, 3, 0.8, 23, 0.05),
                                        "js", 0.3);
  fpg::SplitMix64 rng(12);
  const StateCache cache = make_cache(
      prob, policy_from_logits(prob, testutil::random_logits(rng, 4, 3)).pi);
  const TrajectoryBatch batch = sample_batch(prob.mdp, cache.pi, 32, 25, 5);
  const Eigen::MatrixXd a =
      stochastic_gradient(prob, cache, batch, Exec::Parallel);
  const Eigen::MatrixXd b =
      stochastic_gradient(prob, cache, batch, Exec::Serial);
  CHECK(a == b);
}
