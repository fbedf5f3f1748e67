#include "qtomo/chi2.hpp"

#include <cmath>
#include <limits>

#include "qtomo/error.hpp"

namespace qtomo {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxTerms = 10000;

// Series expansion, converges quickly for x < a + 1.
double lower_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxTerms; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q (modified Lentz), converges for x >= a + 1.
double upper_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0) || std::isnan(x)) throw DomainError("incomplete gamma: need a > 0 and x >= 0");
}

void check_chi2_args(double x, double dof) {
  if (!(dof > 0.0) || std::isinf(dof)) throw DomainError("chi-squared: degrees of freedom must be positive");
  if (!(x >= 0.0)) throw DomainError("chi-squared: argument must be non-negative");
}

}  // namespace

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a + 1.0 ? lower_series(a, x) : 1.0 - upper_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? 1.0 - lower_series(a, x) : upper_fraction(a, x);
}

double chi2_cdf(double x, double dof) {
  check_chi2_args(x, dof);
  return gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_survival(double x, double dof) {
  check_chi2_args(x, dof);
  return gamma_q(0.5 * dof, 0.5 * x);
}

double chi2_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("chi2_quantile: probability must lie in (0, 1)");
  if (!(dof > 0.0) || std::isinf(dof)) throw DomainError("chi2_quantile: degrees of freedom must be positive");

  // Residual in whichever tail is smaller, so upper quantiles keep precision.
  const bool upper = p > 0.5;
  auto residual = [&](double x) {
    return upper ? (1.0 - p) - chi2_survival(x, dof) : chi2_cdf(x, dof) - p;
  };

  // Bracket: residual is increasing in x in both branches.
  double lo = 0.0;
  double hi = std::max(1.0, dof);
  while (residual(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw ConvergenceError("chi2_quantile: failed to bracket");
  }

  // Wilson-Hilferty start, then safeguarded Newton on the density.
  const double z_guess = [&] {
    // Acklam-free rough normal quantile is enough for a starting point.
    const double t = std::sqrt(-2.0 * std::log(upper ? 1.0 - p : p));
    const double z = t - (2.515517 + 0.802853 * t + 0.010328 * t * t) /
                             (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
    return upper ? z : -z;
  }();
  const double h = 2.0 / (9.0 * dof);
  double x = dof * std::pow(std::max(1.0 - h + z_guess * std::sqrt(h), 1e-3), 3.0);
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);

  const double half = 0.5 * dof;
  const double log_norm = -half * std::log(2.0) - std::lgamma(half);
  for (int iter = 0; iter < 200; ++iter) {
    const double r = residual(x);
    if (r < 0.0) lo = x; else hi = x;
    if (std::abs(r) < 1e-15 || hi - lo < 1e-14 * std::max(1.0, x)) break;
    const double density = std::exp(log_norm + (half - 1.0) * std::log(x) - 0.5 * x);
    double next = x - r / density;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

}  // namespace qtomo
