#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace fjq {

/// A sub-probability law on a uniform time grid over (0, t_max].
/// Cell i covers (i*h, (i+1)*h]; pdf[i] is the mean density over the cell and
/// cdf[i] the CDF at the cell's right edge, so h * sum(pdf) == cdf.back() ==
/// total_mass holds by construction. total_mass < 1 encodes the probability
/// of never delivering (drop or erasure mass at +infinity).
class GridDistribution {
  public:
    GridDistribution() = default;

    /// Builds from a density evaluated with two-point Gauss-Legendre
    /// quadrature per cell. The density may jump at cell edges (never inside
    /// a cell), which is why the quadrature nodes are interior.
    static GridDistribution from_density(const std::function<double(double)>& f,
                                         double grid_step, std::size_t n_cells);

    /// Builds from exact CDF values at the cell right edges; cdf_nodes[i] is
    /// the CDF at (i+1)*grid_step.
    static GridDistribution from_cdf_nodes(std::vector<double> cdf_nodes,
                                           double grid_step);

    static GridDistribution from_cell_masses(const std::vector<double>& masses,
                                             double grid_step);

    double grid_step() const { return h_; }
    double t_max() const { return h_ * static_cast<double>(cdf_.size()); }
    std::size_t cells() const { return cdf_.size(); }
    double total_mass() const { return cdf_.empty() ? 0.0 : cdf_.back(); }

    const std::vector<double>& pdf() const { return pdf_; }
    const std::vector<double>& cdf() const { return cdf_; }

    /// CDF at arbitrary t: 0 for t <= 0, total_mass for t >= t_max, linear
    /// interpolation between edge values otherwise (our CDFs are continuous).
    double cdf_at(double t) const;

    /// Mean density of the cell containing t (right-limit convention).
    double pdf_at(double t) const;

    /// this += scale * other. Grids must share the step; the support is
    /// extended as needed. other's cells may be shifted right by
    /// `shift_cells` whole cells first.
    void add_scaled(const GridDistribution& other, double scale,
                    std::size_t shift_cells = 0);

    /// Drops all cells beyond n_cells (CDF flattens at the new edge).
    void truncate(std::size_t n_cells);

    /// Monotone CDF, nonnegative pdf, pdf/cdf consistency, mass <= 1 + tol.
    bool self_consistent(double tol = 1e-9) const;

  private:
    double h_ = 0.0;
    std::vector<double> pdf_;
    std::vector<double> cdf_;
};

}  // namespace fjq
