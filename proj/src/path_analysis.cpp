#include "fjq/path_analysis.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "fjq/math_util.hpp"

namespace fjq {

Matrix transition_matrix(double mu, double tau, int cap) {
    if (cap < 1) throw std::invalid_argument("transition_matrix: cap >= 1");
    const auto n = static_cast<size_t>(cap) + 1;
    Matrix m(n, std::vector<double>(n, 0.0));
    for (size_t s = 0; s < n; ++s) {
        const int present = std::min<int>(1 + static_cast<int>(s), cap);
        double served_all = 1.0;
        // state s' = present - d for d < present departures
        for (int d = 0; d < present; ++d) {
            const double p = poisson_pmf(mu, d, tau);
            m[s][static_cast<size_t>(present - d)] = p;
            served_all -= p;
        }
        m[s][0] = std::max(served_all, 0.0);
    }
    return m;
}

QueueStateLaw steady_state(const Matrix& m) {
    const size_t n = m.size();
    if (n == 0) throw std::invalid_argument("steady_state: empty matrix");
    // Solve (M^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (size_t r = 0; r < n; ++r) {
        for (size_t c = 0; c < n; ++c) a[r][c] = m[c][r] - (r == c ? 1.0 : 0.0);
    }
    for (size_t c = 0; c < n; ++c) a[n - 1][c] = 1.0;
    a[n - 1][n] = 1.0;

    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        std::swap(a[piv], a[col]);
        if (a[col][col] == 0.0)
            throw std::runtime_error("steady_state: singular transition matrix");
        for (size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (size_t c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
        }
    }
    QueueStateLaw law;
    law.probs.resize(n);
    for (size_t i = 0; i < n; ++i) law.probs[i] = a[i][n] / a[i][i];
    for (double& p : law.probs) p = std::max(p, 0.0);

    // verify pi * M = pi
    double resid = 0.0;
    double total = 0.0;
    for (size_t c = 0; c < n; ++c) {
        double v = 0.0;
        for (size_t r = 0; r < n; ++r) v += law.probs[r] * m[r][c];
        resid = std::max(resid, std::fabs(v - law.probs[c]));
        total += law.probs[c];
    }
    if (resid > 1e-12 || std::fabs(total - 1.0) > 1e-12)
        throw std::runtime_error("steady_state: solve did not converge");
    return law;
}

std::vector<double> queue_position_weights(const QueueStateLaw& pi, int cap) {
    if (static_cast<int>(pi.probs.size()) != cap + 1)
        throw std::invalid_argument("queue_position_weights: size mismatch");
    std::vector<double> w(pi.probs.begin(), pi.probs.end() - 1);
    w.back() += pi.probs.back();
    return w;
}

// ---------------------------------------------------------------------------
// PiecewiseErlang

double PiecewiseErlang::pdf(double t) const {
    if (t < 0.0) return 0.0;
    const auto m = static_cast<int>(std::floor(t / tau_));
    if (m >= intervals()) return 0.0;
    const double u = t - m * tau_;
    const auto& c = coeff_[static_cast<size_t>(m)];
    double v = 0.0;
    for (size_t k = 0; k < c.size(); ++k)
        if (c[k] != 0.0) v += c[k] * mu_ * poisson_pmf(mu_, static_cast<int>(k), u);
    return v;
}

double PiecewiseErlang::cdf(double t) const {
    if (t <= 0.0) return 0.0;
    auto m = static_cast<int>(std::floor(t / tau_));
    if (m >= intervals()) return mass();
    const double u = t - m * tau_;
    const auto& c = coeff_[static_cast<size_t>(m)];
    double v = cdf_base_[static_cast<size_t>(m)];
    for (size_t k = 0; k < c.size(); ++k)
        if (c[k] != 0.0)
            v += c[k] * erlang_cdf(static_cast<int>(k) + 1, mu_, u);
    return v;
}

// ---------------------------------------------------------------------------
// PathRecursion

PathRecursion::PathRecursion(double mu, double tau) : mu_(mu), tau_(tau) {
    if (!(mu > 0.0) || !(tau > 0.0))
        throw std::invalid_argument("PathRecursion: mu and tau must be > 0");
}

double PathRecursion::pmf_tau(int d) {
    while (static_cast<int>(pmf_tau_.size()) <= d)
        pmf_tau_.push_back(
            poisson_pmf(mu_, static_cast<int>(pmf_tau_.size()), tau_));
    return pmf_tau_[static_cast<size_t>(d)];
}

double PathRecursion::drop_prob(int cap, int q) {
    if (cap == 0) return 1.0;  // capacity exhausted: pushed out
    if (q < 0 || q > cap - 1)
        throw std::invalid_argument("drop_prob: need 0 <= q <= cap-1");
    const auto key = std::make_pair(cap, q);
    if (auto it = drop_memo_.find(key); it != drop_memo_.end())
        return it->second;
    double p = 0.0;
    if (q < cap - 1) {
        for (int d = 0; d <= q; ++d) p += pmf_tau(d) * drop_prob(cap - 1, q - d);
    } else {
        for (int d = 0; d <= q; ++d) {
            const int next_q = q - std::max(d, 1);
            p += pmf_tau(d) * (next_q < 0 ? 1.0 : drop_prob(cap - 1, next_q));
        }
    }
    drop_memo_.emplace(key, p);
    return p;
}

const PiecewiseErlang& PathRecursion::conditional_law(int cap, int q) {
    if (cap < 1 || q < 0 || q > cap - 1)
        throw std::invalid_argument("conditional_law: need 0 <= q <= cap-1");
    const auto key = std::make_pair(cap, q);
    if (auto it = law_memo_.find(key); it != law_memo_.end())
        return *it->second;

    auto law = std::make_unique<PiecewiseErlang>();
    law->mu_ = mu_;
    law->tau_ = tau_;
    law->coeff_.resize(static_cast<size_t>(cap));
    law->coeff_[0].assign(static_cast<size_t>(q) + 1, 0.0);
    law->coeff_[0][static_cast<size_t>(q)] = 1.0;

    // Interval m of the cap-law is the period-shifted mix of interval m-1 of
    // the (cap-1)-laws reached after one more arrival; the head-drop branch
    // applies when the packet filled the queue (q = cap-1).
    for (int m = 1; m < cap; ++m) {
        std::vector<double>& dst = law->coeff_[static_cast<size_t>(m)];
        dst.assign(static_cast<size_t>(q) + 1, 0.0);
        for (int d = 0; d <= q; ++d) {
            const int next_q = (q < cap - 1) ? q - d : q - std::max(d, 1);
            if (next_q < 0) continue;  // only q = 0 = cap-1, already dropped
            const PiecewiseErlang& child = conditional_law(cap - 1, next_q);
            if (m - 1 >= child.intervals()) continue;
            const auto& src = child.coeff_[static_cast<size_t>(m - 1)];
            const double w = pmf_tau(d);
            for (size_t k = 0; k < src.size(); ++k) dst[k] += w * src[k];
        }
    }

    // accumulate interval masses: integral of mu*pmf(k, u) over (0, tau]
    // is the Erlang(k+1) CDF at tau
    law->cdf_base_.assign(static_cast<size_t>(cap) + 1, 0.0);
    for (int m = 0; m < cap; ++m) {
        double seg = 0.0;
        const auto& c = law->coeff_[static_cast<size_t>(m)];
        for (size_t k = 0; k < c.size(); ++k)
            if (c[k] != 0.0)
                seg += c[k] * erlang_cdf(static_cast<int>(k) + 1, mu_, tau_);
        law->cdf_base_[static_cast<size_t>(m) + 1] =
            law->cdf_base_[static_cast<size_t>(m)] + seg;
    }

    const PiecewiseErlang& ref = *law;
    law_memo_.emplace(key, std::move(law));
    return ref;
}

// ---------------------------------------------------------------------------

double sigma_root(double mu, double tau, bool printed_exponent) {
    const double c = (printed_exponent ? 2.0 : 1.0) * mu * tau;
    if (!(c > 1.0))
        throw std::domain_error("sigma_root: no root in (0,1), mu*tau <= 1");
    const auto f = [c](double x) { return x - std::exp(-c * (1.0 - x)); };
    double lo = 0.0, hi = 1.0 - 1e-12;
    if (!(f(lo) < 0.0) || !(f(hi) > 0.0))
        throw std::domain_error("sigma_root: bracketing failed");
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    const double x = 0.5 * (lo + hi);
    if (std::fabs(f(x)) > 1e-12)
        throw std::runtime_error("sigma_root: bisection stalled");
    return x;
}

// ---------------------------------------------------------------------------
// PathModel

PathModel PathModel::finite(double mu, double eps, double tau, int cap) {
    PathModel pm;
    pm.mu_ = mu;
    pm.eps_ = eps;
    pm.tau_ = tau;
    pm.cap_ = cap;
    pm.recursion_ = std::make_shared<PathRecursion>(mu, tau);
    pm.steady_ = steady_state(transition_matrix(mu, tau, cap));
    pm.weights_ = queue_position_weights(pm.steady_, cap);
    pm.drops_.resize(static_cast<size_t>(cap));
    pm.laws_.resize(static_cast<size_t>(cap));
    pm.drop_prob_ = 0.0;
    for (int q = 0; q < cap; ++q) {
        pm.drops_[static_cast<size_t>(q)] = pm.recursion_->drop_prob(cap, q);
        pm.laws_[static_cast<size_t>(q)] = &pm.recursion_->conditional_law(cap, q);
        pm.drop_prob_ +=
            pm.weights_[static_cast<size_t>(q)] * pm.drops_[static_cast<size_t>(q)];
    }
    return pm;
}

PathModel PathModel::infinite(double mu, double eps, double tau) {
    PathModel pm;
    pm.mu_ = mu;
    pm.eps_ = eps;
    pm.tau_ = tau;
    pm.cap_ = 0;
    pm.sigma_ = sigma_root(mu, tau);
    pm.exp_rate_ = mu * (1.0 - pm.sigma_);
    pm.steady_.sigma = pm.sigma_;
    // truncated geometric expansion, tail below 1e-12
    const int n = std::max(
        1, static_cast<int>(std::ceil(std::log(1e-12) / std::log(pm.sigma_))));
    pm.steady_.probs.resize(static_cast<size_t>(n));
    double g = 1.0 - pm.sigma_;
    for (int i = 0; i < n; ++i) {
        pm.steady_.probs[static_cast<size_t>(i)] = g;
        g *= pm.sigma_;
    }
    return pm;
}

double PathModel::pdf(double t) const {
    if (unbounded())
        return t < 0.0 ? 0.0
                       : (1.0 - eps_) * exp_rate_ * std::exp(-exp_rate_ * t);
    double v = 0.0;
    for (int q = 0; q < cap_; ++q)
        v += weights_[static_cast<size_t>(q)] *
             laws_[static_cast<size_t>(q)]->pdf(t);
    return (1.0 - eps_) * v;
}

double PathModel::cdf(double t) const {
    if (t <= 0.0) return 0.0;
    if (unbounded()) return (1.0 - eps_) * (1.0 - std::exp(-exp_rate_ * t));
    double v = 0.0;
    for (int q = 0; q < cap_; ++q)
        v += weights_[static_cast<size_t>(q)] *
             laws_[static_cast<size_t>(q)]->cdf(t);
    return (1.0 - eps_) * v;
}

double PathModel::mass() const { return (1.0 - eps_) * (1.0 - drop_prob_); }

double PathModel::cond_pdf(int q, double t) const {
    assert(!unbounded());
    return (1.0 - eps_) * laws_[static_cast<size_t>(q)]->pdf(t);
}

double PathModel::cond_cdf(int q, double t) const {
    assert(!unbounded());
    return (1.0 - eps_) * laws_[static_cast<size_t>(q)]->cdf(t);
}

double PathModel::cond_mass(int q) const {
    assert(!unbounded());
    return (1.0 - eps_) * (1.0 - drops_[static_cast<size_t>(q)]);
}

PathModel build_path_model(const SystemConfig& cfg, int j) {
    const auto ij = static_cast<size_t>(j);
    if (cfg.unbounded())
        return PathModel::infinite(cfg.service_rates[ij], cfg.erasure_probs[ij],
                                   cfg.inter_arrival);
    return PathModel::finite(cfg.service_rates[ij], cfg.erasure_probs[ij],
                             cfg.inter_arrival, cfg.cap());
}

double infinite_horizon(const SystemConfig& cfg) {
    double t = 0.0;
    for (int j = 0; j < cfg.n_paths; ++j) {
        const auto ij = static_cast<size_t>(j);
        const double rate =
            cfg.service_rates[ij] *
            (1.0 - sigma_root(cfg.service_rates[ij], cfg.inter_arrival));
        t = std::max(t, std::log(1e8 * cfg.n_paths) / rate);
    }
    const double tau = cfg.inter_arrival;
    return tau * std::ceil(t / tau);
}

GridDistribution path_law_grid(const PathModel& pm, double grid_step,
                               double t_max) {
    if (pm.unbounded() && !(t_max > 0.0))
        throw std::invalid_argument("path_law_grid: t_max needed for unbounded");
    const double span = pm.unbounded() ? t_max : pm.cap() * pm.tau();
    const auto n = static_cast<size_t>(std::llround(span / grid_step));
    std::vector<double> nodes(n);
    for (size_t i = 0; i < n; ++i)
        nodes[i] = pm.cdf(grid_step * static_cast<double>(i + 1));
    return GridDistribution::from_cdf_nodes(std::move(nodes), grid_step);
}

PathAnalysis analyze_path(const SystemConfig& cfg, int j, double grid_step) {
    PathModel pm = build_path_model(cfg, j);
    PathAnalysis pa;
    pa.path_index = j;
    pa.steady_state = pm.steady();
    pa.drop_prob_by_state = pm.drop_prob_by_state();
    pa.drop_prob = pm.drop_prob();
    const double t_max = pm.unbounded() ? infinite_horizon(cfg) : 0.0;
    pa.latency = path_law_grid(pm, grid_step, t_max);
    if (!pm.unbounded()) {
        const auto n =
            static_cast<size_t>(std::llround(pm.cap() * pm.tau() / grid_step));
        for (int q = 0; q < pm.cap(); ++q) {
            std::vector<double> nodes(n);
            for (size_t i = 0; i < n; ++i)
                nodes[i] =
                    pm.cond_cdf(q, grid_step * static_cast<double>(i + 1));
            pa.latency_by_state.push_back(
                GridDistribution::from_cdf_nodes(std::move(nodes), grid_step));
        }
    }
    return pa;
}

}  // namespace fjq
