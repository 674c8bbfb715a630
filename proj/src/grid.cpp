#include "fjq/grid.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace fjq {

namespace {
// Gauss-Legendre 2-point abscissae on (0,1).
constexpr double kGaussLo = 0.5 - 0.28867513459481288225;  // 0.5 - 1/(2*sqrt(3))
constexpr double kGaussHi = 0.5 + 0.28867513459481288225;
}  // namespace

GridDistribution GridDistribution::from_density(
    const std::function<double(double)>& f, double grid_step,
    std::size_t n_cells) {
    if (!(grid_step > 0.0)) throw std::invalid_argument("grid_step must be > 0");
    GridDistribution g;
    g.h_ = grid_step;
    g.pdf_.resize(n_cells);
    g.cdf_.resize(n_cells);
    double acc = 0.0;
    for (std::size_t i = 0; i < n_cells; ++i) {
        const double a = grid_step * static_cast<double>(i);
        const double mass =
            0.5 * grid_step *
            (f(a + kGaussLo * grid_step) + f(a + kGaussHi * grid_step));
        acc += mass;
        g.pdf_[i] = mass / grid_step;
        g.cdf_[i] = acc;
    }
    return g;
}

GridDistribution GridDistribution::from_cdf_nodes(std::vector<double> cdf_nodes,
                                                  double grid_step) {
    if (!(grid_step > 0.0)) throw std::invalid_argument("grid_step must be > 0");
    GridDistribution g;
    g.h_ = grid_step;
    g.pdf_.resize(cdf_nodes.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < cdf_nodes.size(); ++i) {
        g.pdf_[i] = (cdf_nodes[i] - prev) / grid_step;
        prev = cdf_nodes[i];
    }
    g.cdf_ = std::move(cdf_nodes);
    return g;
}

GridDistribution GridDistribution::from_cell_masses(
    const std::vector<double>& masses, double grid_step) {
    if (!(grid_step > 0.0)) throw std::invalid_argument("grid_step must be > 0");
    GridDistribution g;
    g.h_ = grid_step;
    g.pdf_.resize(masses.size());
    g.cdf_.resize(masses.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        acc += masses[i];
        g.pdf_[i] = masses[i] / grid_step;
        g.cdf_[i] = acc;
    }
    return g;
}

double GridDistribution::cdf_at(double t) const {
    if (cdf_.empty() || t <= 0.0) return 0.0;
    const double x = t / h_;
    if (x >= static_cast<double>(cdf_.size())) return total_mass();
    const auto cell = static_cast<std::size_t>(x);
    const double left = cell == 0 ? 0.0 : cdf_[cell - 1];
    const double frac = x - static_cast<double>(cell);
    return left + frac * (cdf_[cell] - left);
}

double GridDistribution::pdf_at(double t) const {
    if (cdf_.empty() || t < 0.0) return 0.0;
    const auto cell = static_cast<std::size_t>(t / h_);
    if (cell >= pdf_.size()) return 0.0;
    return pdf_[cell];
}

void GridDistribution::add_scaled(const GridDistribution& other, double scale,
                                  std::size_t shift_cells) {
    if (h_ == 0.0) h_ = other.h_;
    if (std::fabs(h_ - other.h_) > 1e-12 * h_)
        throw std::invalid_argument("add_scaled: mismatched grid steps");
    const std::size_t need = other.pdf_.size() + shift_cells;
    if (pdf_.size() < need) {
        const double tail = total_mass();
        pdf_.resize(need, 0.0);
        cdf_.resize(need, tail);
    }
    for (std::size_t i = 0; i < other.pdf_.size(); ++i)
        pdf_[i + shift_cells] += scale * other.pdf_[i];
    // rebuild the running CDF from the affected point on
    double acc = shift_cells == 0 ? 0.0 : cdf_[shift_cells - 1];
    for (std::size_t i = shift_cells; i < pdf_.size(); ++i) {
        acc += pdf_[i] * h_;
        cdf_[i] = acc;
    }
}

void GridDistribution::truncate(std::size_t n_cells) {
    if (n_cells < pdf_.size()) {
        pdf_.resize(n_cells);
        cdf_.resize(n_cells);
    }
}

bool GridDistribution::self_consistent(double tol) const {
    double prev = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < cdf_.size(); ++i) {
        if (pdf_[i] < -tol) return false;
        if (cdf_[i] < prev - tol) return false;
        acc += pdf_[i] * h_;
        prev = cdf_[i];
    }
    if (!cdf_.empty() && std::fabs(acc - total_mass()) > 1e-6) return false;
    return total_mass() <= 1.0 + 1e-6;
}

}  // namespace fjq
