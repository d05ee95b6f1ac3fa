#pragma once

#include <Eigen/Dense>
#include <string>

#include "fpg/errors.hpp"

namespace fpg {

enum class GeneratorKind { KL, Tsallis, JensenShannon };

/// A divergence generator f together with its derivative stack and the
/// regularity constants used by the theory calculator:
///
///   omega  — bound on 1/(u f''(u)) over (0, 1/pi_ref_floor]
///   kappa  — bound on |f'''(u)| / f''(u)^2 over the same interval
///   iota   — f'' is decreasing on (0, iota] and f''(iota) >= f''(u) beyond
///
/// Generators:
///   KL             f(u) = u log u
///   Tsallis(alpha) f(u) = (u^a - a u + a - 1) / (a (a - 1)),  a in (0,1)
///   JensenShannon  f(u) = (u log u - (u+1) log((u+1)/2)) / 2
///
/// KL and Tsallis constants are closed-form; Jensen-Shannon's omega/kappa are
/// grid maxima over (1e-8, 1/pi_ref_floor] (1e5 log-spaced points) cached at
/// construction.
class GeneratorSpec {
 public:
  static GeneratorSpec kl(double pi_ref_floor);
  static GeneratorSpec tsallis(double alpha, double pi_ref_floor);
  static GeneratorSpec jensen_shannon(double pi_ref_floor);
  // Tags: "kl", "tsallis:<alpha>", "js".
  static GeneratorSpec from_tag(const std::string& tag, double pi_ref_floor);

  GeneratorKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double omega() const { return omega_; }
  double kappa() const { return kappa_; }
  double iota() const { return iota_; }
  double pi_ref_floor() const { return pi_ref_floor_; }
  /// Hard-coded analytic limit f(0+); used for divergence boundary terms.
  double f_zero() const { return f_zero_; }
  std::string tag() const;

  double f_value(double u) const;
  double f_prime(double u) const;
  double f_second(double u) const;
  double f_third(double u) const;

  /// Inverse of f'. Domain: (-inf, f'(1/pi_ref_floor)] intersected with the
  /// generator's own constraint (Tsallis: 1 + (alpha-1) y > 0; JS:
  /// exp(2y) < 2). Violations raise DomainError naming the bound.
  double inverse_fprime(double y) const;

  /// (f*)''(y) = 1 / f''([f']^{-1}(y)), via per-generator closed forms.
  double conjugate_second(double y) const;

  /// f'(1 / pi_ref_floor): upper end of the domain of inverse_fprime.
  double fprime_domain_max() const { return fprime_domain_max_; }

 private:
  GeneratorSpec(GeneratorKind kind, double alpha, double pi_ref_floor);

  GeneratorKind kind_;
  double alpha_ = 0.0;  // Tsallis only
  double pi_ref_floor_;
  double omega_, kappa_, iota_, f_zero_, fprime_domain_max_;
};

/// D_f(p || q) = sum_a q(a) f(p(a)/q(a)), with the q(a) f(0+) convention when
/// p(a) = 0. Requires q > 0 everywhere and both inputs normalized to 1e-12.
double divergence(const GeneratorSpec& g, const Eigen::VectorXd& p,
                  const Eigen::VectorXd& q);

}  // namespace fpg
