#pragma once

namespace homtest {

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Standard normal CDF and its inverse.
double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace homtest
