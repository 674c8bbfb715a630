#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fjq/path_analysis.hpp"
#include "fjq/simulator.hpp"
#include "fjq/stats.hpp"

using namespace fjq;

namespace {

bool same_value(double a, double b) {
    return a == b || (std::isnan(a) && std::isnan(b));
}

SystemConfig mk(int k, int n, std::optional<int> cap, double tau, double mu,
                double eps) {
    SystemConfig c;
    c.k_data = k;
    c.n_paths = n;
    c.queue_cap = cap;
    c.inter_arrival = tau;
    c.service_rates.assign(static_cast<size_t>(n), mu);
    c.erasure_probs.assign(static_cast<size_t>(n), eps);
    return c;
}

// standard error of the overall mean from batch means; the pre-arrival
// sequences are autocorrelated, so the i.i.d. formula would undershoot
double batch_se(const std::vector<double>& xs, int n_batches = 50) {
    const size_t bs = xs.size() / static_cast<size_t>(n_batches);
    std::vector<double> means;
    for (int b = 0; b < n_batches; ++b) {
        double s = 0.0;
        for (size_t i = 0; i < bs; ++i) s += xs[static_cast<size_t>(b) * bs + i];
        means.push_back(s / static_cast<double>(bs));
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= static_cast<double>(n_batches);
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m);
    var /= static_cast<double>(n_batches - 1);
    return std::sqrt(var / static_cast<double>(n_batches));
}

}  // namespace

TEST_CASE("identical runs are bit-identical, different seeds differ") {
    const SystemConfig cfg = mk(4, 5, 2, 2.0, 1.0, 0.1);
    SimParams p;
    p.n_blocks = 20'000;
    p.rng_seed = 1234;
    const SimResult a = simulate_system(cfg, p);
    const SimResult b = simulate_system(cfg, p);
    for (std::int64_t i = 0; i < p.n_blocks; ++i) {
        const BlockRecord ra = a.record(i);
        const BlockRecord rb = b.record(i);
        REQUIRE(same_value(ra.decode_time, rb.decode_time));
        REQUIRE(ra.delivered() == rb.delivered());
        for (int j = 0; j < cfg.n_paths; ++j) {
            REQUIRE(ra.per_path[static_cast<size_t>(j)].kind ==
                    rb.per_path[static_cast<size_t>(j)].kind);
            REQUIRE(same_value(ra.per_path[static_cast<size_t>(j)].time,
                               rb.per_path[static_cast<size_t>(j)].time));
        }
    }
    p.rng_seed = 99;
    const SimResult c = simulate_system(cfg, p);
    bool any_diff = false;
    for (std::int64_t i = 0; i < p.n_blocks && !any_diff; ++i)
        any_diff = a.decode_time(i) != c.decode_time(i) &&
                   !(std::isnan(a.decode_time(i)) && std::isnan(c.decode_time(i)));
    CHECK(any_diff);
}

TEST_CASE("bit-identical decode comparison handles undelivered blocks") {
    const SystemConfig cfg = mk(4, 5, 1, 2.0, 1.0, 0.2);
    SimParams p;
    p.n_blocks = 5'000;
    p.rng_seed = 7;
    const SimResult a = simulate_system(cfg, p);
    const SimResult b = simulate_system(cfg, p);
    for (std::int64_t i = 0; i < p.n_blocks; ++i)
        REQUIRE(same_value(a.decode_time(i), b.decode_time(i)));
}

TEST_CASE("outcome conservation per path") {
    for (auto cap : {std::optional<int>(1), std::optional<int>(3),
                     std::optional<int>()}) {
        const SystemConfig cfg = mk(2, 3, cap, 1.5, 1.0, 0.15);
        SimParams p;
        p.n_blocks = 30'000;
        p.rng_seed = 5;
        const SimResult r = simulate_system(cfg, p);
        for (const PathTally& t : r.tallies()) {
            CHECK(t.delivered + t.dropped + t.erased == p.n_blocks);
            if (!cap) CHECK(t.dropped == 0);  // unbounded queues never drop
        }
    }
}

TEST_CASE("near-certain erasure kills every delivery") {
    SystemConfig cfg = mk(1, 2, 1, 1.0, 1.0, 0.0);
    cfg.erasure_probs[1] = 1.0 - 1e-12;
    SimParams p;
    p.n_blocks = 10'000;
    p.rng_seed = 31;
    const auto outcomes = simulate_path(cfg, 1, p);
    for (const PathOutcome& o : outcomes)
        CHECK(o.kind != PathOutcomeKind::Delivered);
}

TEST_CASE("simulate_path agrees with the system run substreams") {
    const SystemConfig cfg = mk(2, 3, 2, 2.0, 1.2, 0.1);
    SimParams p;
    p.n_blocks = 10'000;
    p.rng_seed = 77;
    const SimResult sys = simulate_system(cfg, p);
    for (int j = 0; j < cfg.n_paths; ++j) {
        const auto solo = simulate_path(cfg, j, p);
        for (std::int64_t i = 0; i < p.n_blocks; ++i) {
            const PathOutcome a = solo[static_cast<size_t>(i)];
            const PathOutcome b = sys.outcome(i, j);
            REQUIRE(a.kind == b.kind);
            if (a.kind == PathOutcomeKind::Delivered) REQUIRE(a.time == b.time);
        }
    }
}

TEST_CASE("preemptive single-slot drop rate matches the analytic value") {
    const SystemConfig cfg = mk(1, 1, 1, 2.0, 1.0, 0.0);
    SimParams p;
    p.n_blocks = 200'000;
    p.rng_seed = 11;
    const SimResult r = simulate_system(cfg, p);
    std::vector<double> dropped;
    for (std::int64_t i = p.warmup_blocks; i < p.n_blocks; ++i)
        dropped.push_back(
            r.outcome(i, 0).kind == PathOutcomeKind::Dropped ? 1.0 : 0.0);
    double freq = 0.0;
    for (double d : dropped) freq += d;
    freq /= static_cast<double>(dropped.size());
    const double expect = std::exp(-2.0);
    CHECK(std::fabs(freq - expect) < 3.0 * batch_se(dropped) + 1e-9);
}

TEST_CASE("pre-arrival occupancy matches the chain steady state (cap 3)") {
    const SystemConfig cfg = mk(1, 1, 3, 2.0, 1.0, 0.0);
    SimParams p;
    p.n_blocks = 200'000;
    p.rng_seed = 17;
    const SimResult r = simulate_system(cfg, p);
    const auto& counts = r.occupancy_counts()[0];
    const auto pi = steady_state(transition_matrix(1.0, 2.0, 3));
    const double n = static_cast<double>(p.n_blocks - p.warmup_blocks);
    for (size_t s = 0; s < pi.probs.size(); ++s) {
        const double freq = static_cast<double>(counts[s]) / n;
        // multinomial s.e. inflated for the chain's autocorrelation
        const double se =
            2.0 * std::sqrt(pi.probs[s] * (1.0 - pi.probs[s]) / n);
        CHECK(std::fabs(freq - pi.probs[s]) < 3.0 * se + 1e-6);
    }
}

TEST_CASE("unbounded queue: mean pre-arrival occupancy matches sigma") {
    const SystemConfig cfg = mk(1, 1, std::nullopt, 2.0, 1.0, 0.0);
    SimParams p;
    p.n_blocks = 200'000;
    p.rng_seed = 23;
    const SimResult r = simulate_system(cfg, p);
    const auto& counts = r.occupancy_counts()[0];
    double mean = 0.0;
    double n = 0.0;
    for (size_t s = 0; s < counts.size(); ++s) {
        mean += static_cast<double>(s) * static_cast<double>(counts[s]);
        n += static_cast<double>(counts[s]);
    }
    mean /= n;
    const double sigma = sigma_root(1.0, 2.0);
    const double expect = sigma / (1.0 - sigma);
    // geometric variance over n samples, inflated for autocorrelation
    const double se =
        2.0 * std::sqrt(sigma / ((1.0 - sigma) * (1.0 - sigma)) / n);
    CHECK(std::fabs(mean - expect) < 3.0 * se);
}

TEST_CASE("single path, no erasures: peak age is latency plus one period") {
    const SystemConfig cfg = mk(1, 1, std::nullopt, 2.0, 1.0, 0.0);
    SimParams p;
    p.n_blocks = 20'000;
    p.rng_seed = 3;
    const SimResult r = simulate_system(cfg, p);
    const auto& aoi = r.aoi();
    REQUIRE(!aoi.paoi.empty());
    for (size_t i = 0; i < aoi.paoi.size(); ++i) {
        const std::int64_t b = aoi.block_index[i];
        const double latency =
            r.decode_time(b) - static_cast<double>(b) * cfg.inter_arrival;
        REQUIRE(aoi.paoi[i] == latency + cfg.inter_arrival);
    }
}

TEST_CASE("per-block structure: order statistic and support bounds") {
    const SystemConfig cfg = mk(3, 5, 2, 1.5, 1.1, 0.2);
    SimParams p;
    p.n_blocks = 20'000;
    p.rng_seed = 41;
    const SimResult r = simulate_system(cfg, p);
    for (std::int64_t i = 0; i < p.n_blocks; ++i) {
        const BlockRecord rec = r.record(i);
        std::vector<double> ts;
        for (const PathOutcome& o : rec.per_path) {
            if (o.kind == PathOutcomeKind::Delivered) {
                const double lat = o.time - rec.gen_time;
                REQUIRE(lat > 0.0);
                REQUIRE(lat <= cfg.cap() * cfg.inter_arrival + 1e-12);
                ts.push_back(o.time);
            }
        }
        if (static_cast<int>(ts.size()) >= cfg.k_data) {
            std::sort(ts.begin(), ts.end());
            REQUIRE(rec.decode_time ==
                    ts[static_cast<size_t>(cfg.k_data - 1)]);
            REQUIRE(rec.latency > 0.0);
        } else {
            REQUIRE(!rec.delivered());
        }
    }
}

TEST_CASE("per-path delivery law matches the analytic unconditional law") {
    const SystemConfig cfg = mk(4, 6, 2, 2.0, 1.0, 0.1);
    SimParams p;
    p.n_blocks = 1'000'000;
    p.rng_seed = 2024;
    const auto outcomes = simulate_path(cfg, 0, p);
    std::vector<double> lats;
    lats.reserve(static_cast<size_t>(p.n_blocks));
    for (std::int64_t i = p.warmup_blocks; i < p.n_blocks; ++i) {
        const PathOutcome& o = outcomes[static_cast<size_t>(i)];
        lats.push_back(o.kind == PathOutcomeKind::Delivered
                           ? o.time - static_cast<double>(i) * cfg.inter_arrival
                           : std::numeric_limits<double>::quiet_NaN());
    }
    const EmpiricalCdf emp(lats);
    const PathModel pm = build_path_model(cfg, 0);
    const GridDistribution law = path_law_grid(pm, 2.0 / 400);
    CHECK(ks_distance(emp, law) < 0.005);
}
