#include "fjq/math_util.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fjq {

double poisson_pmf(double rate, int n, double t) {
    assert(rate > 0.0 && t >= 0.0 && n >= 0);
    const double x = rate * t;
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    if (n == 0) return std::exp(-x);
    return std::exp(n * std::log(x) - x - std::lgamma(n + 1.0));
}

double erlang_cdf(int stages, double rate, double t) {
    assert(stages >= 1);
    if (t <= 0.0) return 0.0;
    // Complement of the Poisson partial sum; the partial sum is computed with
    // a running term to avoid re-exponentiating per n.
    const double x = rate * t;
    double term = std::exp(-x);
    double sum = term;
    for (int n = 1; n < stages; ++n) {
        term *= x / n;
        sum += term;
    }
    return sum >= 1.0 ? 0.0 : 1.0 - sum;
}

namespace {

// Series expansion of P(a,x), converges fast for x < a+1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a,x), converges fast for x >= a+1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_p: bad arguments");
    if (x == 0.0) return 0.0;
    return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_cf(a, x);
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) {
        r *= static_cast<double>(n - k + i);
        r /= static_cast<double>(i);
    }
    return r;
}

}  // namespace fjq
