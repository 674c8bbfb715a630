#include "fjq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fjq/math_util.hpp"

namespace fjq {

EmpiricalCdf::EmpiricalCdf(const std::vector<double>& samples)
    : n_total_(samples.size()) {
    if (samples.empty())
        throw std::invalid_argument("EmpiricalCdf: empty sample set");
    sorted_.reserve(samples.size());
    for (double s : samples)
        if (s == s && s != std::numeric_limits<double>::infinity())
            sorted_.push_back(s);
    std::sort(sorted_.begin(), sorted_.end());
    finite_mass_ =
        static_cast<double>(sorted_.size()) / static_cast<double>(n_total_);
}

double EmpiricalCdf::operator()(double t) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
    return static_cast<double>(it - sorted_.begin()) /
           static_cast<double>(n_total_);
}

double EmpiricalCdf::percentile(double level) const {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("percentile: level must be in (0,1)");
    if (finite_mass_ < level) return std::numeric_limits<double>::infinity();
    const auto k = static_cast<size_t>(
        std::ceil(level * static_cast<double>(n_total_)));
    return sorted_[std::min(k == 0 ? 0 : k - 1, sorted_.size() - 1)];
}

double ks_distance(const EmpiricalCdf& emp, const GridDistribution& ref) {
    // sup over the union of breakpoints: at each sample both one-sided
    // empirical limits, plus the mass gap at the right edge
    double d = std::fabs(emp.finite_mass() - ref.total_mass());
    const auto& xs = emp.sorted();
    const double n = static_cast<double>(emp.total_count());
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i > 0 && xs[i] == xs[i - 1]) continue;
        size_t j = i;
        while (j + 1 < xs.size() && xs[j + 1] == xs[i]) ++j;
        const double r = ref.cdf_at(xs[i]);
        d = std::max(d, std::fabs(static_cast<double>(j + 1) / n - r));
        d = std::max(d, std::fabs(static_cast<double>(i) / n - r));
    }
    // grid nodes between samples add nothing new for a step function vs a
    // nondecreasing reference beyond the sample-side evaluations above
    return d;
}

double ks_distance(const GridDistribution& a, const GridDistribution& b) {
    if (std::fabs(a.grid_step() - b.grid_step()) >
        1e-12 * std::max(a.grid_step(), b.grid_step()))
        throw std::invalid_argument("ks_distance: mismatched grid steps");
    const size_t n = std::max(a.cells(), b.cells());
    double d = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double av = i < a.cells() ? a.cdf()[i] : a.total_mass();
        const double bv = i < b.cells() ? b.cdf()[i] : b.total_mass();
        d = std::max(d, std::fabs(av - bv));
    }
    return d;
}

double percentile(const GridDistribution& g, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("percentile: level must be in (0,1)");
    if (g.total_mass() < level) return std::numeric_limits<double>::infinity();
    const auto& cdf = g.cdf();
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), level);
    const auto i = static_cast<size_t>(it - cdf.begin());
    const double right = cdf[i];
    const double left = i == 0 ? 0.0 : cdf[i - 1];
    const double t0 = g.grid_step() * static_cast<double>(i);
    if (right <= left) return t0 + g.grid_step();
    return t0 + g.grid_step() * (level - left) / (right - left);
}

double chi_square_pvalue(const std::vector<std::int64_t>& counts,
                         const std::vector<double>& probs,
                         int dof_reduction) {
    if (counts.size() != probs.size() || counts.size() < 2)
        throw std::invalid_argument("chi_square_pvalue: bad bins");
    std::int64_t n = 0;
    for (auto c : counts) n += c;
    double stat = 0.0;
    for (size_t i = 0; i < counts.size(); ++i) {
        const double expd = probs[i] * static_cast<double>(n);
        if (expd <= 0.0)
            throw std::invalid_argument("chi_square_pvalue: zero expected bin");
        const double diff = static_cast<double>(counts[i]) - expd;
        stat += diff * diff / expd;
    }
    const int dof = static_cast<int>(counts.size()) - 1 - dof_reduction;
    if (dof < 1) throw std::invalid_argument("chi_square_pvalue: dof < 1");
    return gamma_q(0.5 * dof, 0.5 * stat);
}

}  // namespace fjq
