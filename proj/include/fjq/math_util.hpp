#pragma once

#include <cstdint>

namespace fjq {

/// Poisson pmf (mu*t)^n e^{-mu*t} / n!, evaluated in log space so large n or
/// mu*t cannot overflow. t = 0 gives 1 for n = 0 and 0 otherwise.
double poisson_pmf(double rate, int n, double t);

/// P(Erlang(stages, rate) <= t) = 1 - sum_{n<stages} poisson_pmf(rate, n, t).
/// stages >= 1. Equals the regularized lower incomplete gamma at integer shape.
double erlang_cdf(int stages, double rate, double t);

/// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x),
/// series/continued-fraction evaluation (used for chi-square tail areas).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Binomial coefficient as double; exact for the small n used here.
double binomial(int n, int k);

}  // namespace fjq
