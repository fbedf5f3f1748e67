#pragma once

namespace qtomo {

/// Regularised lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularised upper incomplete gamma Q(a, x) = 1 - P(a, x), evaluated
/// directly (no cancellation) where it is small.
double gamma_q(double a, double x);

/// Chi-squared distribution with `dof` > 0 degrees of freedom.
double chi2_cdf(double x, double dof);
double chi2_survival(double x, double dof);
/// Inverse of chi2_cdf for 0 < p < 1; accurate to 1e-12 in probability.
double chi2_quantile(double p, double dof);

}  // namespace qtomo
