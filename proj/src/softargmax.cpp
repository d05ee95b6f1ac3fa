#include "fpg/softargmax.hpp"

#include <cmath>

namespace fpg {

namespace {

constexpr double kProbFloor = 1e-300;

double constraint_residual(const GeneratorSpec& g, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& q, double mu) {
  double s = 0.0;
  for (Eigen::Index a = 0; a < x.size(); ++a) {
    s += q[a] * g.inverse_fprime(x[a] - mu);
  }
  return s - 1.0;
}

}  // namespace

SoftArgmaxResult softargmax(const GeneratorSpec& g, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& q) {
  const Eigen::Index n = x.size();
  if (n == 0 || q.size() != n) {
    throw ValidationError("softargmax: x and q must be non-empty and match");
  }
  if (!x.allFinite()) throw ValidationError("softargmax: x must be finite");
  if (!(q.minCoeff() > 0.0)) {
    throw ValidationError("softargmax: reference q must be strictly positive");
  }

  const double xmax = x.maxCoeff();
  double hi = xmax - g.f_prime(1.0);
  double lo = xmax - g.fprime_domain_max();
  if (g.kind() == GeneratorKind::Tsallis) {
    // Keep every x(a) - mu inside the Tsallis domain 1+(alpha-1)y > 0.
    lo = std::max(lo, xmax - 1.0 / (1.0 - g.alpha()) + 1e-12);
  }

  // F(lo) > 0 (the argmax term alone reaches q(a)/floor >= 1), F(hi) <= 0.
  // Width stop is relative to |mu| so a bracket at large magnitude, whose
  // ULP exceeds the absolute target, still terminates cleanly.
  double mu = 0.5 * (lo + hi);
  double resid = constraint_residual(g, x, q, mu);
  bool resolved = false;
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(resid) < 1e-13 ||
        hi - lo < 1e-14 * std::max(1.0, std::abs(mu))) {
      resolved = true;
      break;
    }
    if (resid > 0.0) {
      lo = mu;
    } else {
      hi = mu;
    }
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) {  // bracket fully resolved in double
      mu = mid;
      resid = constraint_residual(g, x, q, mu);
      resolved = true;
      break;
    }
    mu = mid;
    resid = constraint_residual(g, x, q, mu);
  }
  if (!resolved && std::abs(resid) >= 1e-13) {
    throw NumericError("softargmax bisection did not converge", resid);
  }

  SoftArgmaxResult r;
  r.mu = mu;
  r.probs.resize(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    r.probs[a] = std::max(q[a] * g.inverse_fprime(x[a] - mu), kProbFloor);
  }
  r.probs /= r.probs.sum();

  r.weights.resize(n);
  r.y_sum = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    const double u = r.probs[a] / q[a];
    const double fpp = g.f_second(u);
    r.weights[a] = q[a] / fpp;
    r.y_sum += q[a] * std::abs(g.f_prime(u)) / fpp;
  }
  r.s_sum = r.weights.sum();
  r.weights /= r.s_sum;
  return r;
}

double softmax_value(const GeneratorSpec& g, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& q) {
  const SoftArgmaxResult r = softargmax(g, x, q);
  return r.probs.dot(x) - divergence(g, r.probs, q);
}

Eigen::MatrixXd softargmax_jacobian(const GeneratorSpec& g,
                                    const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& q) {
  const SoftArgmaxResult r = softargmax(g, x, q);
  Eigen::MatrixXd j = -r.weights * r.weights.transpose();
  j.diagonal() += r.weights;
  return r.s_sum * j;
}

}  // namespace fpg
