#include "fpg/generator.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace fpg {

namespace {

void require_positive(double u) {
  if (!(u > 0.0)) {
    throw DomainError("generator derivative stack requires u > 0, got " +
                      std::to_string(u));
  }
}

}  // namespace

GeneratorSpec::GeneratorSpec(GeneratorKind kind, double alpha,
                             double pi_ref_floor)
    : kind_(kind), alpha_(alpha), pi_ref_floor_(pi_ref_floor) {
  if (!(pi_ref_floor > 0.0) || pi_ref_floor > 1.0) {
    throw ValidationError("pi_ref_floor must lie in (0, 1]");
  }
  switch (kind_) {
    case GeneratorKind::KL:
      omega_ = 1.0;
      kappa_ = 1.0;
      iota_ = 1.0;
      f_zero_ = 0.0;
      break;
    case GeneratorKind::Tsallis:
      if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("Tsallis alpha must lie in (0, 1)");
      }
      omega_ = std::pow(pi_ref_floor, alpha - 1.0);
      kappa_ = 2.0 * omega_;
      iota_ = 1.0;
      f_zero_ = 1.0 / alpha;
      break;
    case GeneratorKind::JensenShannon: {
      // No tabulated constants for JS; take grid maxima of 1/(u f'') and
      // |f'''|/f''^2 over (1e-8, 1/floor], 1e5 log-spaced points.
      const int n = 100000;
      const double lo = std::log(1e-8), hi = std::log(1.0 / pi_ref_floor);
      double w = 0.0, k = 0.0;
      for (int i = 0; i < n; ++i) {
        const double u = std::exp(lo + (hi - lo) * (i + 1) / n);
        const double fpp = 0.5 / (u * (u + 1.0));
        const double fppp = -0.5 * (2.0 * u + 1.0) /
                            ((u * (u + 1.0)) * (u * (u + 1.0)));
        w = std::max(w, 1.0 / (u * fpp));
        k = std::max(k, std::abs(fppp) / (fpp * fpp));
      }
      omega_ = w;
      kappa_ = k;
      iota_ = 1.0;  // f'' strictly decreasing everywhere
      f_zero_ = 0.5 * std::log(2.0);
      break;
    }
  }
  fprime_domain_max_ = f_prime(1.0 / pi_ref_floor_);
}

GeneratorSpec GeneratorSpec::kl(double pi_ref_floor) {
  return GeneratorSpec(GeneratorKind::KL, 0.0, pi_ref_floor);
}

GeneratorSpec GeneratorSpec::tsallis(double alpha, double pi_ref_floor) {
  return GeneratorSpec(GeneratorKind::Tsallis, alpha, pi_ref_floor);
}

GeneratorSpec GeneratorSpec::jensen_shannon(double pi_ref_floor) {
  return GeneratorSpec(GeneratorKind::JensenShannon, 0.0, pi_ref_floor);
}

GeneratorSpec GeneratorSpec::from_tag(const std::string& tag,
                                      double pi_ref_floor) {
  if (tag == "kl") return kl(pi_ref_floor);
  if (tag == "js") return jensen_shannon(pi_ref_floor);
  if (tag.rfind("tsallis:", 0) == 0) {
    double a = 0.0;
    try {
      a = std::stod(tag.substr(8));
    } catch (const std::exception&) {
      throw ValidationError("could not parse alpha in generator tag '" + tag +
                            "'");
    }
    return tsallis(a, pi_ref_floor);
  }
  throw ValidationError("unknown generator tag '" + tag +
                        "' (expected kl, tsallis:<alpha>, js)");
}

std::string GeneratorSpec::tag() const {
  switch (kind_) {
    case GeneratorKind::KL:
      return "kl";
    case GeneratorKind::Tsallis: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "tsallis:%g", alpha_);
      return buf;
    }
    case GeneratorKind::JensenShannon:
      return "js";
  }
  return "?";
}

double GeneratorSpec::f_value(double u) const {
  require_positive(u);
  switch (kind_) {
    case GeneratorKind::KL:
      return u * std::log(u);
    case GeneratorKind::Tsallis:
      return (std::pow(u, alpha_) - alpha_ * u + alpha_ - 1.0) /
             (alpha_ * (alpha_ - 1.0));
    case GeneratorKind::JensenShannon:
      return 0.5 * (u * std::log(u) - (u + 1.0) * std::log(0.5 * (u + 1.0)));
  }
  return 0.0;
}

double GeneratorSpec::f_prime(double u) const {
  require_positive(u);
  switch (kind_) {
    case GeneratorKind::KL:
      return std::log(u) + 1.0;
    case GeneratorKind::Tsallis:
      return (std::pow(u, alpha_ - 1.0) - 1.0) / (alpha_ - 1.0);
    case GeneratorKind::JensenShannon:
      return 0.5 * std::log(2.0 * u / (u + 1.0));
  }
  return 0.0;
}

double GeneratorSpec::f_second(double u) const {
  require_positive(u);
  switch (kind_) {
    case GeneratorKind::KL:
      return 1.0 / u;
    case GeneratorKind::Tsallis:
      if (alpha_ == 0.5) return 1.0 / (u * std::sqrt(u));
      return std::pow(u, alpha_ - 2.0);
    case GeneratorKind::JensenShannon:
      return 0.5 / (u * (u + 1.0));
  }
  return 0.0;
}

double GeneratorSpec::f_third(double u) const {
  require_positive(u);
  switch (kind_) {
    case GeneratorKind::KL:
      return -1.0 / (u * u);
    case GeneratorKind::Tsallis:
      return (alpha_ - 2.0) * std::pow(u, alpha_ - 3.0);
    case GeneratorKind::JensenShannon: {
      const double s = u * (u + 1.0);
      return -0.5 * (2.0 * u + 1.0) / (s * s);
    }
  }
  return 0.0;
}

double GeneratorSpec::inverse_fprime(double y) const {
  switch (kind_) {
    case GeneratorKind::KL:
      return std::exp(y - 1.0);
    case GeneratorKind::Tsallis: {
      const double t = 1.0 + (alpha_ - 1.0) * y;
      if (!(t > 0.0)) {
        throw DomainError("Tsallis inverse_fprime requires 1+(alpha-1)y > 0, "
                          "got y = " +
                          std::to_string(y));
      }
      if (alpha_ == 0.5) return 1.0 / (t * t);
      return std::pow(t, 1.0 / (alpha_ - 1.0));
    }
    case GeneratorKind::JensenShannon: {
      const double e = std::exp(2.0 * y);
      if (!(e < 2.0)) {
        throw DomainError("JS inverse_fprime requires exp(2y) < 2, got y = " +
                          std::to_string(y));
      }
      return e / (2.0 - e);
    }
  }
  return 0.0;
}

double GeneratorSpec::conjugate_second(double y) const {
  switch (kind_) {
    case GeneratorKind::KL:
      return std::exp(y - 1.0);
    case GeneratorKind::Tsallis: {
      // (f*)''(y) = exp_a(y)^{2-alpha} with exp_a(y) = [1+(a-1)y]^{1/(a-1)}.
      const double u = inverse_fprime(y);
      return std::pow(u, 2.0 - alpha_);
    }
    case GeneratorKind::JensenShannon: {
      const double u = inverse_fprime(y);
      return 2.0 * u * (u + 1.0);
    }
  }
  return 0.0;
}

double divergence(const GeneratorSpec& g, const Eigen::VectorXd& p,
                  const Eigen::VectorXd& q) {
  if (p.size() != q.size()) {
    throw ValidationError("divergence: p and q must have equal length");
  }
  if (std::abs(p.sum() - 1.0) > 1e-12 || std::abs(q.sum() - 1.0) > 1e-12) {
    throw ValidationError("divergence: inputs must sum to 1 within 1e-12");
  }
  double acc = 0.0;
  for (Eigen::Index a = 0; a < q.size(); ++a) {
    if (!(q[a] > 0.0)) {
      throw DomainError("divergence: q must be strictly positive");
    }
    if (p[a] < 0.0) throw ValidationError("divergence: p has negative entry");
    acc += p[a] == 0.0 ? q[a] * g.f_zero() : q[a] * g.f_value(p[a] / q[a]);
  }
  return acc;
}

}  // namespace fpg
