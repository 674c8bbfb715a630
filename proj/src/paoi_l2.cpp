#include <cmath>
#include <stdexcept>

#include "fjq/block_analysis.hpp"
#include "fjq/math_util.hpp"

namespace fjq {

namespace {

constexpr double kGaussOff = 0.28867513459481288225;

// Cap-2 pre-arrival occupancy lumps to a binary state q in {0,1}: the rows of
// the three-state chain coincide for occupancy 1 and 2, so the lumped chain
// is Markov with the emptying probability 1 - e^{-mu tau}(1 + mu tau q).
struct BinaryPath {
    double mu = 0.0;
    double eps = 0.0;
    double t_empty[2];   // T(0 | q)
    double t_stay[2];    // T(1 | q)
    double serve2 = 0.0;  // P(served in the second period | not served in first)
    double init[2];       // state after a delivered packet
};

BinaryPath make_binary_path(double mu, double eps, double tau) {
    BinaryPath bp;
    bp.mu = mu;
    bp.eps = eps;
    const double e = std::exp(-mu * tau);
    bp.t_empty[0] = 1.0 - e;
    bp.t_empty[1] = 1.0 - e * (1.0 + mu * tau);
    bp.t_stay[0] = 1.0 - bp.t_empty[0];
    bp.t_stay[1] = 1.0 - bp.t_empty[1];
    bp.serve2 = 1.0 - e;

    // state seen by the next arrival given the reference packet was served;
    // service within the first period empties the queue, otherwise the
    // packet heads the queue through the second period
    PathModel pm = PathModel::finite(mu, eps, tau, 2);
    const auto& w = pm.position_weights();
    double a0 = 0.0, a1 = 0.0;
    for (int q = 0; q < 2; ++q) {
        a0 += w[static_cast<size_t>(q)] * bp.t_empty[q];
        a1 += w[static_cast<size_t>(q)] * bp.t_stay[q] * bp.serve2;
    }
    const double norm = a0 + a1;  // = 1 - p_drop
    bp.init[0] = a0 / norm;
    bp.init[1] = a1 / norm;
    return bp;
}

// Delivery law of one packet given its own pre-arrival state `q` and the
// state `next` seen by the following arrival. next = 0 pins service inside
// the packet's first period (Erlang over the queue ahead, renormalized);
// next = 1 means it survived into the second period and either finishes
// there or is pushed out at its end.
double pair_pdf(const BinaryPath& bp, int q, int next, double tau, double t) {
    if (next == 0) {
        if (t <= 0.0 || t > tau) return 0.0;
        return (1.0 - bp.eps) * bp.mu * poisson_pmf(bp.mu, q, t) /
               bp.t_empty[q];
    }
    if (t <= tau || t > 2.0 * tau) return 0.0;
    return (1.0 - bp.eps) * bp.mu * std::exp(-bp.mu * (t - tau));
}

double pair_cdf(const BinaryPath& bp, int q, int next, double tau, double t) {
    if (t <= 0.0) return 0.0;
    if (next == 0) {
        return (1.0 - bp.eps) *
               erlang_cdf(q + 1, bp.mu, std::min(t, tau)) / bp.t_empty[q];
    }
    if (t <= tau) return 0.0;
    return (1.0 - bp.eps) *
           (1.0 - std::exp(-bp.mu * (std::min(t, 2.0 * tau) - tau)));
}

double pair_mass(const BinaryPath& bp, int next) {
    return (1.0 - bp.eps) * (next == 0 ? 1.0 : bp.serve2);
}

}  // namespace

PaoiL2Result paoi_L2_smallinstance(const SystemConfig& cfg, int ell_max,
                                   double grid_step) {
    validate_config(cfg);
    if (cfg.unbounded() || cfg.cap() != 2)
        throw std::invalid_argument("paoi_L2_smallinstance: cap must be 2");
    if (cfg.n_paths >= 2 * cfg.k_data)
        throw std::invalid_argument(
            "paoi_L2_smallinstance: needs N < 2K (in-order decoding)");
    if (ell_max < 1 || cfg.n_paths * (ell_max + 1) > 20)
        throw std::invalid_argument(
            "paoi_L2_smallinstance: instance-size guard violated");

    const int n = cfg.n_paths;
    const double tau = cfg.inter_arrival;
    const auto cpt = static_cast<std::size_t>(std::llround(tau / grid_step));
    const std::size_t omega_cells = 2 * cpt;  // block delivery within (0, 2tau]

    std::vector<BinaryPath> paths;
    for (int j = 0; j < n; ++j)
        paths.push_back(make_binary_path(cfg.service_rates[static_cast<size_t>(j)],
                                         cfg.erasure_probs[static_cast<size_t>(j)],
                                         tau));

    // per-path pdf/cdf at the quadrature points for the four (q, next) pairs
    const std::size_t n_pts = 2 * omega_cells;
    std::vector<double> pts(n_pts);
    for (std::size_t i = 0; i < omega_cells; ++i) {
        const double a = grid_step * static_cast<double>(i);
        pts[2 * i] = a + (0.5 - kGaussOff) * grid_step;
        pts[2 * i + 1] = a + (0.5 + kGaussOff) * grid_step;
    }
    // index: ((j * 2 + q) * 2 + next) * n_pts + point
    std::vector<double> pdf_tab(static_cast<std::size_t>(n) * 4 * n_pts);
    std::vector<double> cdf_tab(static_cast<std::size_t>(n) * 4 * n_pts);
    for (int j = 0; j < n; ++j) {
        for (int q = 0; q < 2; ++q) {
            for (int nx = 0; nx < 2; ++nx) {
                const std::size_t base =
                    ((static_cast<std::size_t>(j) * 2 + static_cast<std::size_t>(q)) * 2 +
                     static_cast<std::size_t>(nx)) * n_pts;
                for (std::size_t p = 0; p < n_pts; ++p) {
                    pdf_tab[base + p] =
                        pair_pdf(paths[static_cast<size_t>(j)], q, nx, tau, pts[p]);
                    cdf_tab[base + p] =
                        pair_cdf(paths[static_cast<size_t>(j)], q, nx, tau, pts[p]);
                }
            }
        }
    }

    const std::size_t n_states = static_cast<std::size_t>(1) << n;
    std::vector<double> alpha(n_states, 0.0);
    for (std::size_t s = 0; s < n_states; ++s) {
        double w = 1.0;
        for (int j = 0; j < n; ++j)
            w *= paths[static_cast<size_t>(j)].init[(s >> j) & 1];
        alpha[s] = w;
    }

    std::vector<double> masses(
        (static_cast<std::size_t>(ell_max) + 2) * cpt, 0.0);
    std::vector<double> pvals(static_cast<size_t>(n));
    std::vector<double> cvals(static_cast<size_t>(n));
    std::vector<double> rho(static_cast<size_t>(n));

    for (int ell = 1; ell <= ell_max; ++ell) {
        // final transition: block i+ell decodes at omega given the state pair
        const std::size_t off = static_cast<std::size_t>(ell) * cpt;
        for (std::size_t s = 0; s < n_states; ++s) {
            if (alpha[s] == 0.0) continue;
            for (std::size_t s2 = 0; s2 < n_states; ++s2) {
                double w = alpha[s];
                for (int j = 0; j < n; ++j)
                    w *= ((s2 >> j) & 1)
                             ? paths[static_cast<size_t>(j)].t_stay[(s >> j) & 1]
                             : paths[static_cast<size_t>(j)].t_empty[(s >> j) & 1];
                if (w < 1e-16) continue;
                for (std::size_t i = 0; i < omega_cells; ++i) {
                    double cell = 0.0;
                    for (std::size_t g = 0; g < 2; ++g) {
                        const std::size_t p = 2 * i + g;
                        for (int j = 0; j < n; ++j) {
                            const std::size_t base =
                                ((static_cast<std::size_t>(j) * 2 + ((s >> j) & 1)) * 2 +
                                 ((s2 >> j) & 1)) * n_pts;
                            pvals[static_cast<size_t>(j)] = pdf_tab[base + p];
                            cvals[static_cast<size_t>(j)] = cdf_tab[base + p];
                        }
                        cell += block_pdf_from_values(pvals, cvals, cfg.k_data);
                    }
                    const std::size_t cellidx = off + i;
                    if (cellidx < masses.size())
                        masses[cellidx] += w * 0.5 * grid_step * cell;
                }
            }
        }
        if (ell == ell_max) break;

        // advance one round: block i+ell must fail outright
        std::vector<double> next_alpha(n_states, 0.0);
        for (std::size_t s = 0; s < n_states; ++s) {
            if (alpha[s] == 0.0) continue;
            for (std::size_t s2 = 0; s2 < n_states; ++s2) {
                double w = alpha[s];
                for (int j = 0; j < n; ++j) {
                    const int q = (s >> j) & 1;
                    const int nx = (s2 >> j) & 1;
                    w *= nx ? paths[static_cast<size_t>(j)].t_stay[q]
                            : paths[static_cast<size_t>(j)].t_empty[q];
                    rho[static_cast<size_t>(j)] =
                        pair_mass(paths[static_cast<size_t>(j)], nx);
                }
                if (w == 0.0) continue;
                next_alpha[s2] +=
                    w * (1.0 - poisson_binomial_tail(rho, cfg.k_data));
            }
        }
        alpha.swap(next_alpha);
    }

    PaoiL2Result out;
    GridDistribution full =
        GridDistribution::from_cell_masses(masses, grid_step);
    full.truncate((static_cast<std::size_t>(ell_max) + 1) * cpt);
    out.tail_mass = 1.0 - full.total_mass();
    out.paoi = std::move(full);
    return out;
}

}  // namespace fjq
