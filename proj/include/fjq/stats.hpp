#pragma once

#include <map>
#include <vector>

#include "fjq/grid.hpp"

namespace fjq {

/// Right-continuous step CDF over the finite samples of a possibly censored
/// sample set: infinite (or NaN) entries contribute only to 1 - finite_mass.
class EmpiricalCdf {
  public:
    /// Samples may contain +inf or NaN for "never happened".
    explicit EmpiricalCdf(const std::vector<double>& samples);

    double operator()(double t) const;
    double finite_mass() const { return finite_mass_; }
    std::size_t total_count() const { return n_total_; }
    const std::vector<double>& sorted() const { return sorted_; }

    /// Smallest sample t with CDF(t) >= level, +inf when finite mass < level.
    double percentile(double level) const;

  private:
    std::vector<double> sorted_;
    std::size_t n_total_ = 0;
    double finite_mass_ = 0.0;
};

/// Two-sided sup distance between an empirical CDF and a reference
/// (sub-)CDF, both treated as improper CDFs including their limit masses.
double ks_distance(const EmpiricalCdf& emp, const GridDistribution& ref);

/// Sup distance of two grid laws over shared nodes (steps must match).
double ks_distance(const GridDistribution& a, const GridDistribution& b);

/// Smallest t with CDF(t) >= level on the grid (linear within the cell);
/// +inf when the total mass never reaches the level.
double percentile(const GridDistribution& g, double level);

/// Chi-square goodness-of-fit p-value for observed bin counts against
/// expected bin probabilities (upper tail; dof = bins - 1 - dof_reduction).
double chi_square_pvalue(const std::vector<std::int64_t>& counts,
                         const std::vector<double>& probs,
                         int dof_reduction = 0);

/// Distribution artifacts of one engine run, ready for CSV export.
struct MetricSummary {
    double success_prob = 0.0;
    GridDistribution latency_cdf;
    GridDistribution paoi_cdf;                // may be empty
    std::map<double, double> percentiles;     // level -> seconds (inf allowed)
};

}  // namespace fjq
