#pragma once

#include <Eigen/Dense>

#include "fpg/generator.hpp"

namespace fpg {

struct SoftArgmaxResult {
  Eigen::VectorXd probs;    // strictly positive, sums to 1
  double mu = 0.0;          // normalizer (root of the simplex constraint)
  Eigen::VectorXd weights;  // curvature weights w(a), sum to 1
  double s_sum = 0.0;       // S = sum_a q(a) / f''(probs(a)/q(a))
  double y_sum = 0.0;       // sum_a q(a) |f'(u_a)| / f''(u_a)
};

/// argmax over the simplex of <nu, x> - D_f(nu || q).
///
/// Solved through the representation probs(a) = q(a) [f']^{-1}(x(a) - mu)
/// where mu is the unique root of F(mu) = sum_a q(a)[f']^{-1}(x(a)-mu) - 1
/// inside (max_a x(a) - f'(1/floor), max_a x(a) - f'(1)]. F is strictly
/// decreasing, so plain bisection is used: stop at |F| < 1e-13 or bracket
/// width < 1e-14, cap 200 iterations, NumericError with the residual beyond
/// that. Output entries below 1e-300 are flushed up to 1e-300 (numeric, not
/// semantic, floor) and the row is renormalized.
SoftArgmaxResult softargmax(const GeneratorSpec& g, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& q);

/// max over the simplex of <nu, x> - D_f(nu || q), evaluated at softargmax.
double softmax_value(const GeneratorSpec& g, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& q);

/// J[a,b] = S (1{a=b} w(a) - w(a) w(b)); symmetric, rows sum to 0.
Eigen::MatrixXd softargmax_jacobian(const GeneratorSpec& g,
                                    const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& q);

}  // namespace fpg
