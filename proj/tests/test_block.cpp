#include <doctest.h>

#include <cmath>
#include <vector>

#include "fjq/block_analysis.hpp"
#include "fjq/simulator.hpp"
#include "fjq/stats.hpp"

using namespace fjq;

namespace {

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

double step(const SystemConfig& c) { return c.inter_arrival / 400.0; }

}  // namespace

TEST_CASE("unbounded success probability closed forms") {
    // hand-evaluated binomial sums
    CHECK(success_prob_infinite(mk(4, 5, {}, 2, 1, 0.1)) ==
          doctest::Approx(0.91854).epsilon(1e-9));
    CHECK(success_prob_infinite(mk(4, 6, {}, 2, 1, 0.1)) ==
          doctest::Approx(0.98415).epsilon(1e-9));
    CHECK(success_prob_infinite(mk(4, 7, {}, 2, 1, 0.1)) ==
          doctest::Approx(0.9972729).epsilon(1e-6));
    CHECK(success_prob_infinite(mk(4, 5, {}, 2, 1, 0.2)) ==
          doctest::Approx(0.73728).epsilon(1e-9));

    // subset-sum route equals the dynamic-programming route
    for (int n = 4; n <= 7; ++n) {
        SystemConfig c = mk(4, n, {}, 2, 1, 0.1);
        for (int j = 0; j < n; ++j)
            c.erasure_probs[static_cast<size_t>(j)] = 0.05 + 0.03 * j;
        std::vector<double> ok;
        for (double e : c.erasure_probs) ok.push_back(1.0 - e);
        CHECK(success_prob_infinite(c) ==
              doctest::Approx(poisson_binomial_tail(ok, 4)).epsilon(1e-12));
    }
}

TEST_CASE("block latency mass equals the success probability") {
    for (int cap : {1, 2, 3}) {
        for (double eps : {0.1, 0.2}) {
            const SystemConfig c = mk(4, 5, cap, 2, 1, eps);
            const BlockAnalysis ba = block_latency(c, step(c));
            CHECK(ba.latency.total_mass() ==
                  doctest::Approx(ba.success_prob).epsilon(1e-8));
            CHECK(ba.latency.self_consistent());
        }
    }
    const SystemConfig c = mk(4, 6, {}, 2, 1, 0.1);
    const BlockAnalysis ba = block_latency(c, step(c));
    CHECK(ba.latency.total_mass() ==
          doctest::Approx(ba.success_prob).epsilon(1e-7));
}

TEST_CASE("error-free unbounded system delivers every block") {
    const SystemConfig c = mk(3, 4, {}, 2, 1, 0.0);
    const BlockAnalysis ba = block_latency(c, step(c));
    CHECK(ba.success_prob == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ba.latency.total_mass() == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("analytic success probabilities reproduce the reference bars") {
    // tau = 2, eps = 0.1, (4,5): the four queue-size columns
    const double expect[] = {0.6921, 0.88326, 0.91187, 0.91808};
    for (int i = 0; i < 3; ++i) {
        const SystemConfig c = mk(4, 5, i + 1, 2, 1, 0.1);
        const BlockAnalysis ba = block_latency(c, step(c));
        CHECK(std::fabs(ba.success_prob - expect[i]) < 5e-4);
    }
    const BlockAnalysis binf = block_latency(mk(4, 5, {}, 2, 1, 0.1), 2.0 / 400);
    CHECK(std::fabs(binf.success_prob - expect[3]) < 5e-4);
}

TEST_CASE("degenerate code reduces to the single path law") {
    const SystemConfig c = mk(1, 1, 2, 2, 1, 0.1);
    const BlockAnalysis ba = block_latency(c, step(c));
    const PathModel pm = build_path_model(c, 0);
    for (double t : {0.5, 1.5, 3.0}) {
        CHECK(ba.latency.cdf_at(t) == doctest::Approx(pm.cdf(t)).epsilon(1e-9));
    }
}

TEST_CASE("no-redundancy error-free block is the max order statistic") {
    SystemConfig c = mk(3, 3, 2, 2, 1, 0.0);
    c.service_rates = {0.8, 1.0, 1.3};
    const BlockAnalysis ba = block_latency(c, step(c));
    std::vector<PathModel> pm;
    for (int j = 0; j < 3; ++j) pm.push_back(build_path_model(c, j));
    for (double t : {0.4, 1.0, 2.3, 3.9}) {
        double prod = 1.0;
        for (const auto& m : pm) prod *= m.cdf(t);
        CHECK(ba.latency.cdf_at(t) == doctest::Approx(prod).epsilon(1e-8));
    }
    // the produced pdf is the derivative of the product within grid tolerance
    const double h = step(c);
    for (size_t cell : {100u, 400u, 900u}) {
        const double a = h * static_cast<double>(cell);
        double left = 1.0, right = 1.0;
        for (const auto& m : pm) {
            left *= m.cdf(a);
            right *= m.cdf(a + h);
        }
        CHECK(ba.latency.pdf()[cell] ==
              doctest::Approx((right - left) / h).epsilon(1e-7));
    }
}

TEST_CASE("grid law equals the independent binomial route pointwise") {
    const SystemConfig c = mk(4, 6, 2, 2, 1, 0.1);
    const BlockAnalysis ba = block_latency(c, step(c));
    std::vector<PathModel> pm;
    for (int j = 0; j < 6; ++j) pm.push_back(build_path_model(c, j));
    for (double t : {0.5, 1.2, 2.0, 3.1, 3.9}) {
        std::vector<double> cdfs;
        for (const auto& m : pm) cdfs.push_back(m.cdf(t));
        CHECK(ba.latency.cdf_at(t) ==
              doctest::Approx(poisson_binomial_tail(cdfs, 4)).epsilon(1e-8));
    }
}

TEST_CASE("unconditional law equals the product-state mixture (cap 2)") {
    const SystemConfig c = mk(2, 3, 2, 2, 1, 0.1);
    const double h = step(c);
    const BlockAnalysis ba = block_latency(c, h);

    std::vector<PathModel> pm;
    for (int j = 0; j < 3; ++j) pm.push_back(build_path_model(c, j));
    GridDistribution mix;
    for (int q0 = 0; q0 < 2; ++q0)
        for (int q1 = 0; q1 < 2; ++q1)
            for (int q2 = 0; q2 < 2; ++q2) {
                const double w = pm[0].position_weights()[static_cast<size_t>(q0)] *
                                 pm[1].position_weights()[static_cast<size_t>(q1)] *
                                 pm[2].position_weights()[static_cast<size_t>(q2)];
                mix.add_scaled(block_latency_conditional(c, {q0, q1, q2}, h), w);
            }
    for (size_t i = 0; i < mix.cells(); ++i) {
        CHECK(std::fabs(mix.cdf()[i] - ba.latency.cdf()[i]) < 1e-9);
    }
}

TEST_CASE("conditional block law validates its state vector") {
    const SystemConfig c = mk(2, 3, 2, 2, 1, 0.1);
    CHECK_THROWS(block_latency_conditional(c, {0, 0}, step(c)));
    CHECK_THROWS(block_latency_conditional(c, {0, 0, 2}, step(c)));
    CHECK_THROWS(block_latency_conditional(mk(2, 3, {}, 2, 1, 0.1), {0, 0, 0},
                                           step(c)));
}

TEST_CASE("empty-queue conditional law matches a cold-start Monte Carlo") {
    // every path pinned at q = 0 is exactly the first block of a fresh run
    const SystemConfig c = mk(4, 5, 2, 2.0, 1.0, 0.1);
    const GridDistribution law = block_latency_conditional(c, {0, 0, 0, 0, 0},
                                                           step(c));
    const int reps = 50'000;
    std::vector<double> lats;
    lats.reserve(static_cast<size_t>(reps));
    SimParams p;
    p.n_blocks = 3;  // block 0 resolves within two periods under cap 2
    p.warmup_blocks = 0;
    for (int r = 0; r < reps; ++r) {
        p.rng_seed = 1'000'000 + static_cast<std::uint64_t>(r);
        const SimResult res = simulate_system(c, p);
        lats.push_back(res.delivered(0)
                           ? res.decode_time(0)
                           : std::numeric_limits<double>::quiet_NaN());
    }
    const EmpiricalCdf emp(lats);
    CHECK(ks_distance(emp, law) < 0.01);
}

TEST_CASE("closed-form cap-1 CDF") {
    const SystemConfig c = mk(4, 5, 1, 2.0, 1.0, 0.2);
    CHECK(block_latency_cdf_L1_closed(c, 0.0) == 0.0);
    CHECK(block_latency_cdf_L1_closed(c, 2.0) ==
          doctest::Approx(0.51127).epsilon(2e-4));

    const BlockAnalysis ba = block_latency(c, step(c));
    // closed form is flat beyond tau and equals the total mass there
    CHECK(block_latency_cdf_L1_closed(c, 100.0) ==
          doctest::Approx(ba.success_prob).epsilon(1e-9));

    // sup distance to the numerically integrated pdf over [0, 4 tau]
    double sup = 0.0;
    for (int i = 0; i <= 1600; ++i) {
        const double t = 8.0 * i / 1600.0;
        sup = std::max(sup, std::fabs(block_latency_cdf_L1_closed(c, t) -
                                      ba.latency.cdf_at(t)));
    }
    CHECK(sup < 1e-6);
}

TEST_CASE("success probability is monotone in erasure and in code rate") {
    const SystemConfig base = mk(4, 6, 2, 2, 1, 0.1);
    const double ps = block_latency(base, step(base)).success_prob;

    SystemConfig worse = base;
    worse.erasure_probs[2] += 0.05;
    CHECK(block_latency(worse, step(worse)).success_prob <= ps + 1e-12);

    SystemConfig more_data = base;
    more_data.k_data = 5;
    CHECK(block_latency(more_data, step(more_data)).success_prob <= ps + 1e-12);
}

TEST_CASE("simulated block reliability matches the analytic value") {
    const SystemConfig c = mk(4, 5, 2, 2.0, 1.0, 0.1);
    SimParams p;
    p.n_blocks = 100'000;
    p.rng_seed = 8;
    const SimResult r = simulate_system(c, p);
    const double ps = static_cast<double>(r.delivered_blocks()) /
                      static_cast<double>(p.n_blocks - p.warmup_blocks);
    CHECK(std::fabs(ps - 0.88326) < 0.01);
}
