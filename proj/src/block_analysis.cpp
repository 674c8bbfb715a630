#include "fjq/block_analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "fjq/subsets.hpp"

namespace fjq {

double block_pdf_from_values(const std::vector<double>& pdfs,
                             const std::vector<double>& cdfs, int k_data) {
    const int n = static_cast<int>(pdfs.size());
    std::vector<char> in_set(static_cast<size_t>(n), 0);
    double total = 0.0;
    SubsetFamily(n, k_data - 1).for_each([&](const std::vector<int>& chosen) {
        std::fill(in_set.begin(), in_set.end(), 0);
        double done = 1.0;
        for (int j : chosen) {
            in_set[static_cast<size_t>(j)] = 1;
            done *= cdfs[static_cast<size_t>(j)];
        }
        if (done == 0.0) return;
        double finisher = 0.0;
        for (int l = 0; l < n; ++l) {
            if (in_set[static_cast<size_t>(l)]) continue;
            double prod = pdfs[static_cast<size_t>(l)];
            for (int m = 0; m < n && prod != 0.0; ++m) {
                if (m == l || in_set[static_cast<size_t>(m)]) continue;
                prod *= 1.0 - cdfs[static_cast<size_t>(m)];
            }
            finisher += prod;
        }
        total += done * finisher;
    });
    return total;
}

double poisson_binomial_tail(const std::vector<double>& probs, int k) {
    const size_t n = probs.size();
    std::vector<double> dp(n + 1, 0.0);
    dp[0] = 1.0;
    for (size_t j = 0; j < n; ++j) {
        const double p = probs[j];
        for (size_t c = j + 1; c-- > 0;) {
            dp[c + 1] += dp[c] * p;
            dp[c] *= 1.0 - p;
        }
    }
    double tail = 0.0;
    for (size_t c = static_cast<size_t>(std::max(k, 0)); c <= n; ++c)
        tail += dp[c];
    return std::min(tail, 1.0);
}

double success_prob_infinite(const SystemConfig& cfg) {
    validate_config(cfg);
    double p = 0.0;
    for (int m = cfg.k_data; m <= cfg.n_paths; ++m) {
        SubsetFamily(cfg.n_paths, m).for_each([&](const std::vector<int>& set) {
            std::vector<char> in_set(static_cast<size_t>(cfg.n_paths), 0);
            double term = 1.0;
            for (int j : set) {
                in_set[static_cast<size_t>(j)] = 1;
                term *= 1.0 - cfg.erasure_probs[static_cast<size_t>(j)];
            }
            for (int j = 0; j < cfg.n_paths; ++j)
                if (!in_set[static_cast<size_t>(j)])
                    term *= cfg.erasure_probs[static_cast<size_t>(j)];
            p += term;
        });
    }
    return p;
}

namespace {

constexpr double kGaussOff = 0.28867513459481288225;  // 1/(2*sqrt(3))

// Integrates the block density over `cells` cells of width h with two-point
// Gauss quadrature; `value_at` must fill pdfs/cdfs for all paths at time t.
template <typename Fill>
GridDistribution integrate_block(int n_paths, int k_data, double h,
                                 std::size_t cells, const Fill& value_at) {
    std::vector<double> pdfs(static_cast<size_t>(n_paths));
    std::vector<double> cdfs(static_cast<size_t>(n_paths));
    std::vector<double> masses(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        const double a = h * static_cast<double>(i);
        double m = 0.0;
        for (const double frac : {0.5 - kGaussOff, 0.5 + kGaussOff}) {
            value_at(a + frac * h, pdfs, cdfs);
            m += block_pdf_from_values(pdfs, cdfs, k_data);
        }
        masses[i] = 0.5 * h * m;
    }
    return GridDistribution::from_cell_masses(masses, h);
}

std::size_t cells_per_period(double tau, double h) {
    return static_cast<std::size_t>(std::llround(tau / h));
}

}  // namespace

GridDistribution block_latency_conditional(const SystemConfig& cfg,
                                           const std::vector<int>& q,
                                           double grid_step) {
    validate_config(cfg);
    if (cfg.unbounded())
        throw std::invalid_argument(
            "block_latency_conditional: finite capacity only");
    if (q.size() != static_cast<size_t>(cfg.n_paths))
        throw std::invalid_argument("block_latency_conditional: bad q length");
    for (int v : q)
        if (v < 0 || v > cfg.cap() - 1)
            throw std::invalid_argument(
                "block_latency_conditional: state out of range");

    std::vector<PathModel> pm;
    pm.reserve(static_cast<size_t>(cfg.n_paths));
    for (int j = 0; j < cfg.n_paths; ++j) pm.push_back(build_path_model(cfg, j));

    const auto cells =
        static_cast<std::size_t>(cfg.cap()) *
        cells_per_period(cfg.inter_arrival, grid_step);
    return integrate_block(
        cfg.n_paths, cfg.k_data, grid_step, cells,
        [&](double t, std::vector<double>& pdfs, std::vector<double>& cdfs) {
            for (int j = 0; j < cfg.n_paths; ++j) {
                pdfs[static_cast<size_t>(j)] =
                    pm[static_cast<size_t>(j)].cond_pdf(q[static_cast<size_t>(j)], t);
                cdfs[static_cast<size_t>(j)] =
                    pm[static_cast<size_t>(j)].cond_cdf(q[static_cast<size_t>(j)], t);
            }
        });
}

namespace {

GridDistribution paoi_geometric_L1(const GridDistribution& block,
                                   double success, double tau) {
    if (!(success > 0.0))
        throw std::domain_error("paoi_L1: no block is ever delivered");
    const double h = block.grid_step();
    const std::size_t cpt = cells_per_period(tau, h);
    const double fail = 1.0 - success;
    const int rounds =
        fail <= 0.0
            ? 1
            : std::max<int>(1, static_cast<int>(std::ceil(
                                   std::log(1e-9) / std::log(fail))));
    std::vector<double> masses(static_cast<std::size_t>(rounds + 1) * cpt, 0.0);
    double w = 1.0;
    for (int m = 1; m <= rounds; ++m) {
        for (std::size_t i = 0; i < cpt && i < block.cells(); ++i)
            masses[static_cast<std::size_t>(m) * cpt + i] =
                w * block.pdf()[i] * h;
        w *= fail;
    }
    return GridDistribution::from_cell_masses(masses, h);
}

GridDistribution paoi_geometric_shifted(const GridDistribution& block,
                                        double success, double tau) {
    if (!(success > 0.0))
        throw std::domain_error("paoi_infinite: no block is ever delivered");
    const double h = block.grid_step();
    const std::size_t cpt = cells_per_period(tau, h);
    const double fail = 1.0 - success;
    const int e_max =
        fail <= 0.0 ? 0
                    : static_cast<int>(std::ceil(std::log(1e-9) / std::log(fail)));
    std::vector<double> masses(
        block.cells() + static_cast<std::size_t>(e_max + 1) * cpt, 0.0);
    double w = 1.0;
    for (int e = 0; e <= e_max; ++e) {
        const std::size_t off = static_cast<std::size_t>(e + 1) * cpt;
        for (std::size_t i = 0; i < block.cells(); ++i)
            masses[off + i] += w * block.pdf()[i] * h;
        w *= fail;
    }
    return GridDistribution::from_cell_masses(masses, h);
}

BlockAnalysis block_latency_impl(const SystemConfig& cfg, double grid_step,
                                 bool with_paoi) {
    validate_config(cfg);
    std::vector<PathModel> pm;
    pm.reserve(static_cast<size_t>(cfg.n_paths));
    for (int j = 0; j < cfg.n_paths; ++j) pm.push_back(build_path_model(cfg, j));

    BlockAnalysis out;
    const std::size_t cpt = cells_per_period(cfg.inter_arrival, grid_step);
    std::size_t cells;
    if (cfg.unbounded()) {
        cells = cells_per_period(infinite_horizon(cfg), grid_step);
        out.success_prob = success_prob_infinite(cfg);
    } else {
        cells = static_cast<std::size_t>(cfg.cap() + 1) * cpt;
        std::vector<double> masses(static_cast<size_t>(cfg.n_paths));
        for (int j = 0; j < cfg.n_paths; ++j)
            masses[static_cast<size_t>(j)] = pm[static_cast<size_t>(j)].mass();
        out.success_prob = poisson_binomial_tail(masses, cfg.k_data);
    }

    out.latency = integrate_block(
        cfg.n_paths, cfg.k_data, grid_step, cells,
        [&](double t, std::vector<double>& pdfs, std::vector<double>& cdfs) {
            for (int j = 0; j < cfg.n_paths; ++j) {
                pdfs[static_cast<size_t>(j)] = pm[static_cast<size_t>(j)].pdf(t);
                cdfs[static_cast<size_t>(j)] = pm[static_cast<size_t>(j)].cdf(t);
            }
        });

    if (with_paoi) {
        if (!cfg.unbounded() && cfg.cap() == 1)
            out.paoi = paoi_geometric_L1(out.latency, out.success_prob,
                                         cfg.inter_arrival);
        else if (cfg.unbounded())
            out.paoi = paoi_geometric_shifted(out.latency, out.success_prob,
                                              cfg.inter_arrival);
        // finite cap >= 2: simulation only (see paoi_L2_smallinstance for the
        // guarded cap-2 enumeration)
    }
    return out;
}

}  // namespace

BlockAnalysis block_latency(const SystemConfig& cfg, double grid_step) {
    return block_latency_impl(cfg, grid_step, true);
}

double block_latency_cdf_L1_closed(const SystemConfig& cfg, double t) {
    validate_config(cfg);
    if (cfg.unbounded() || cfg.cap() != 1)
        throw std::invalid_argument("block_latency_cdf_L1_closed: cap must be 1");
    if (t <= 0.0) return 0.0;
    const double u = std::min(t, cfg.inter_arrival);  // flat beyond one period
    const int n = cfg.n_paths;
    const auto& mu = cfg.service_rates;
    const auto& eps = cfg.erasure_probs;

    double total = 0.0;
    SubsetFamily(n, cfg.k_data - 1).for_each([&](const std::vector<int>& dset) {
        std::vector<char> in_d(static_cast<size_t>(n), 0);
        for (int j : dset) in_d[static_cast<size_t>(j)] = 1;
        std::vector<int> rest;
        for (int j = 0; j < n; ++j)
            if (!in_d[static_cast<size_t>(j)]) rest.push_back(j);

        for (size_t li = 0; li < rest.size(); ++li) {
            const int l = rest[li];
            std::vector<int> others;  // rest minus the finisher
            for (size_t x = 0; x < rest.size(); ++x)
                if (x != li) others.push_back(rest[x]);

            const auto g_count = static_cast<uint32_t>(1u << others.size());
            const auto m_count = static_cast<uint32_t>(1u << dset.size());
            for (uint32_t gmask = 0; gmask < g_count; ++gmask) {
                double eps_out = 1.0;   // erased-and-undelivered paths
                double ok_in = 1.0;     // (1-eps) over dset, G and l
                double rate_g = 0.0;
                for (size_t x = 0; x < others.size(); ++x) {
                    const auto j = static_cast<size_t>(others[x]);
                    if (gmask & (1u << x)) {
                        ok_in *= 1.0 - eps[j];
                        rate_g += mu[j];
                    } else {
                        eps_out *= eps[j];
                    }
                }
                for (int j : dset) ok_in *= 1.0 - eps[static_cast<size_t>(j)];
                ok_in *= 1.0 - eps[static_cast<size_t>(l)];

                for (uint32_t mmask = 0; mmask < m_count; ++mmask) {
                    double rate = mu[static_cast<size_t>(l)] + rate_g;
                    int sign = 1;
                    for (size_t x = 0; x < dset.size(); ++x) {
                        if (mmask & (1u << x)) {
                            rate += mu[static_cast<size_t>(dset[x])];
                            sign = -sign;
                        }
                    }
                    total += eps_out * ok_in * sign *
                             mu[static_cast<size_t>(l)] *
                             (1.0 - std::exp(-u * rate)) / rate;
                }
            }
        }
    });
    return total;
}

GridDistribution paoi_L1(const SystemConfig& cfg, double grid_step) {
    validate_config(cfg);
    if (cfg.unbounded() || cfg.cap() != 1)
        throw std::invalid_argument("paoi_L1: cap must be 1");
    BlockAnalysis ba = block_latency_impl(cfg, grid_step, false);
    return paoi_geometric_L1(ba.latency, ba.success_prob, cfg.inter_arrival);
}

GridDistribution paoi_infinite(const SystemConfig& cfg, double grid_step) {
    validate_config(cfg);
    if (!cfg.unbounded())
        throw std::invalid_argument("paoi_infinite: unbounded queues only");
    BlockAnalysis ba = block_latency_impl(cfg, grid_step, false);
    return paoi_geometric_shifted(ba.latency, ba.success_prob,
                                  cfg.inter_arrival);
}

}  // namespace fjq
