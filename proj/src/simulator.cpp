#include "fjq/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace fjq {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t path_substream_seed(std::uint64_t base, int path) {
    std::uint64_t s = base;
    std::uint64_t v = 0;
    for (int i = 0; i <= path; ++i) v = splitmix64(s);
    return v;
}

namespace {

// One SplitMix64 stream per path; draws consumed in event order (a service
// draw when a packet enters service, an erasure draw at its completion).
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}
    double uniform() {
        return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
    }
    double exponential(double rate) {
        return -std::log1p(-uniform()) / rate;
    }

  private:
    std::uint64_t state_;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PathRun {
    std::vector<PathOutcome> outcomes;
    std::vector<std::int64_t> occupancy;  // pre-arrival counts, post-warmup
    std::vector<std::uint8_t> states;     // pre-arrival occupancy per block
    PathTally tally;
};

PathRun run_path(const SystemConfig& cfg, int path, const SimParams& params) {
    const double mu = cfg.service_rates[static_cast<size_t>(path)];
    const double eps = cfg.erasure_probs[static_cast<size_t>(path)];
    const double tau = cfg.inter_arrival;
    const bool bounded = !cfg.unbounded();
    const std::int64_t cap = bounded ? cfg.cap() : -1;

    Stream rng(path_substream_seed(params.rng_seed, path));
    PathRun run;
    run.outcomes.resize(static_cast<size_t>(params.n_blocks));
    run.occupancy.assign(bounded ? static_cast<size_t>(cap) + 1 : 64, 0);
    run.states.resize(static_cast<size_t>(params.n_blocks));

    std::deque<std::int64_t> queue;  // block indices, front is in service
    double next_completion = kInf;

    auto finish_head = [&](double at) {
        const std::int64_t blk = queue.front();
        queue.pop_front();
        const bool erased = rng.uniform() < eps;
        if (blk < params.n_blocks) {
            PathOutcome& o = run.outcomes[static_cast<size_t>(blk)];
            if (erased) {
                o.kind = PathOutcomeKind::Erased;
                ++run.tally.erased;
            } else {
                o.kind = PathOutcomeKind::Delivered;
                o.time = at;
                ++run.tally.delivered;
            }
        }
        next_completion = queue.empty() ? kInf : at + rng.exponential(mu);
    };

    // The run is a window of an unbounded arrival process: once the last
    // tracked block has arrived, the clock keeps delivering untracked
    // arrivals so that late tracked packets are still preempted on schedule
    // (otherwise the window tail would show latencies beyond cap periods).
    std::int64_t tracked_in_queue = 0;
    for (std::int64_t i = 0;; ++i) {
        const bool tracked = i < params.n_blocks;
        if (!tracked && tracked_in_queue == 0) break;
        const double t_arr = static_cast<double>(i) * tau;
        // completions strictly up to the arrival; a dead-heat completion is
        // processed first so the arrival sees the post-departure state
        while (!queue.empty() && next_completion <= t_arr) {
            if (queue.front() < params.n_blocks) --tracked_in_queue;
            finish_head(next_completion);
        }
        if (!tracked && tracked_in_queue == 0) break;

        if (tracked) {
            run.states[static_cast<size_t>(i)] = static_cast<std::uint8_t>(
                std::min<std::size_t>(queue.size(), 255));
            if (i >= params.warmup_blocks) {
                const auto s = std::min(queue.size(), run.occupancy.size() - 1);
                ++run.occupancy[s];
            }
        }

        if (bounded && static_cast<std::int64_t>(queue.size()) == cap) {
            const std::int64_t victim = queue.front();
            queue.pop_front();
            if (victim < params.n_blocks) {
                run.outcomes[static_cast<size_t>(victim)].kind =
                    PathOutcomeKind::Dropped;
                ++run.tally.dropped;
                --tracked_in_queue;
            }
            // abandoned service; the next packet restarts fresh
            next_completion =
                queue.empty() ? kInf : t_arr + rng.exponential(mu);
        }

        queue.push_back(i);
        if (tracked) ++tracked_in_queue;
        if (queue.size() == 1) next_completion = t_arr + rng.exponential(mu);
    }
    return run;
}

}  // namespace

std::vector<PathOutcome> simulate_path(const SystemConfig& cfg, int path,
                                       const SimParams& params) {
    validate_config(cfg);
    if (path < 0 || path >= cfg.n_paths)
        throw std::invalid_argument("simulate_path: path out of range");
    if (params.n_blocks <= params.warmup_blocks)
        throw std::invalid_argument("simulate_path: n_blocks <= warmup_blocks");
    return run_path(cfg, path, params).outcomes;
}

BlockRecord SimResult::record(std::int64_t i) const {
    BlockRecord r;
    r.index = i;
    r.gen_time = static_cast<double>(i) * tau_;
    r.per_path.resize(static_cast<size_t>(n_paths_));
    for (int j = 0; j < n_paths_; ++j) r.per_path[static_cast<size_t>(j)] = outcome(i, j);
    r.decode_time = decode_[idx(i)];
    if (r.delivered()) r.latency = r.decode_time - r.gen_time;
    return r;
}

PathOutcome SimResult::outcome(std::int64_t block, int path) const {
    const auto k = idx(block) * static_cast<size_t>(n_paths_) +
                   static_cast<size_t>(path);
    PathOutcome o;
    o.kind = static_cast<PathOutcomeKind>(outcome_kind_[k]);
    o.time = delivery_time_[k];
    return o;
}

std::vector<double> SimResult::latency_samples() const {
    std::vector<double> v;
    v.reserve(static_cast<size_t>(n_blocks_ - warmup_));
    for (std::int64_t i = warmup_; i < n_blocks_; ++i) {
        const double d = decode_[idx(i)];
        v.push_back(d == d ? d - static_cast<double>(i) * tau_
                           : std::numeric_limits<double>::quiet_NaN());
    }
    return v;
}

std::vector<double> SimResult::path_latency_samples(int path) const {
    std::vector<double> v;
    v.reserve(static_cast<size_t>(n_blocks_ - warmup_));
    for (std::int64_t i = warmup_; i < n_blocks_; ++i) {
        const PathOutcome o = outcome(i, path);
        v.push_back(o.kind == PathOutcomeKind::Delivered
                        ? o.time - static_cast<double>(i) * tau_
                        : std::numeric_limits<double>::quiet_NaN());
    }
    return v;
}

std::int64_t SimResult::delivered_blocks() const {
    std::int64_t n = 0;
    for (std::int64_t i = warmup_; i < n_blocks_; ++i)
        if (delivered(i)) ++n;
    return n;
}

SimResult simulate_system(const SystemConfig& cfg, const SimParams& params) {
    validate_config(cfg);
    if (params.n_blocks <= params.warmup_blocks)
        throw std::invalid_argument("simulate_system: n_blocks <= warmup_blocks");

    SimResult res;
    res.n_blocks_ = params.n_blocks;
    res.warmup_ = params.warmup_blocks;
    res.n_paths_ = cfg.n_paths;
    res.tau_ = cfg.inter_arrival;
    const auto nb = static_cast<size_t>(params.n_blocks);
    const auto np = static_cast<size_t>(cfg.n_paths);
    res.delivery_time_.assign(nb * np,
                              std::numeric_limits<double>::quiet_NaN());
    res.outcome_kind_.assign(nb * np, 0);
    res.decode_.assign(nb, std::numeric_limits<double>::quiet_NaN());
    res.tallies_.resize(np);
    res.occupancy_.resize(np);
    res.states_.resize(np);

    for (int j = 0; j < cfg.n_paths; ++j) {
        PathRun run = run_path(cfg, j, params);
        res.tallies_[static_cast<size_t>(j)] = run.tally;
        res.occupancy_[static_cast<size_t>(j)] = std::move(run.occupancy);
        res.states_[static_cast<size_t>(j)] = std::move(run.states);
        for (std::int64_t i = 0; i < params.n_blocks; ++i) {
            const auto k = static_cast<size_t>(i) * np + static_cast<size_t>(j);
            const PathOutcome& o = run.outcomes[static_cast<size_t>(i)];
            res.outcome_kind_[k] = static_cast<std::uint8_t>(o.kind);
            res.delivery_time_[k] = o.time;
        }
    }

    // decode time = K-th smallest finite delivery of the block
    std::vector<double> times;
    times.reserve(np);
    for (std::int64_t i = 0; i < params.n_blocks; ++i) {
        times.clear();
        for (int j = 0; j < cfg.n_paths; ++j) {
            const double t =
                res.delivery_time_[static_cast<size_t>(i) * np +
                                   static_cast<size_t>(j)];
            if (t == t) times.push_back(t);
        }
        if (static_cast<int>(times.size()) >= cfg.k_data) {
            std::nth_element(times.begin(),
                             times.begin() + (cfg.k_data - 1), times.end());
            res.decode_[static_cast<size_t>(i)] =
                times[static_cast<size_t>(cfg.k_data - 1)];
        }
    }

    // per-block age samples: decode instant minus the previous delivered
    // block's generation time (the quantity the analytic peak-age laws
    // describe; identical to the process peaks when decoding is in order)
    double prev_gen = -cfg.inter_arrival;  // as if a block of age tau preceded
    for (std::int64_t i = 0; i < params.n_blocks; ++i) {
        if (!res.delivered(i)) continue;
        if (i >= params.warmup_blocks) {
            res.aoi_.block_index.push_back(i);
            res.aoi_.paoi.push_back(res.decode_[static_cast<size_t>(i)] -
                                    prev_gen);
        }
        prev_gen = static_cast<double>(i) * cfg.inter_arrival;
    }

    // exact theta(t) process over decode events in time order; freshness only
    // advances when a newer generation is decoded, and only those advances
    // are peaks of the sawtooth
    struct Decode {
        double time;
        double gen;
        std::int64_t index;
    };
    std::vector<Decode> events;
    for (std::int64_t i = 0; i < params.n_blocks; ++i) {
        if (res.delivered(i))
            events.push_back(
                {res.decode_[static_cast<size_t>(i)],
                 static_cast<double>(i) * cfg.inter_arrival, i});
    }
    std::sort(events.begin(), events.end(), [](const Decode& a, const Decode& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.gen < b.gen;
    });

    double freshest = -cfg.inter_arrival;
    for (size_t e = 0; e < events.size();) {
        size_t f = e;
        while (f < events.size() && events[f].time == events[e].time) ++f;
        double best = freshest;  // dead-heat decodes see the prior state
        for (size_t k = e; k < f; ++k) best = std::max(best, events[k].gen);
        if (best > freshest) {
            if (events[e].index >= params.warmup_blocks) {
                res.aoi_.peak_block.push_back(events[e].index);
                res.aoi_.peaks.push_back(events[e].time - freshest);
            }
            freshest = best;
            if (params.record_traces) {
                res.aoi_.reset_time.push_back(events[e].time);
                res.aoi_.reset_age.push_back(events[e].time - freshest);
            }
        }
        e = f;
    }
    return res;
}

}  // namespace fjq
