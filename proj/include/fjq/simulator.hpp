#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "fjq/config.hpp"

namespace fjq {

struct SimParams {
    std::int64_t n_blocks = 1'000'000;
    std::int64_t warmup_blocks = 1'000;  // discarded from all metrics
    std::uint64_t rng_seed = 1;
    bool record_traces = false;  // keep the piecewise age trace
};

enum class PathOutcomeKind : std::uint8_t { Delivered = 0, Dropped = 1, Erased = 2 };

struct PathOutcome {
    PathOutcomeKind kind = PathOutcomeKind::Dropped;
    double time = std::numeric_limits<double>::quiet_NaN();  // delivery instant
};

struct BlockRecord {
    std::int64_t index = 0;
    double gen_time = 0.0;
    std::vector<PathOutcome> per_path;
    double decode_time = std::numeric_limits<double>::quiet_NaN();
    double latency = std::numeric_limits<double>::quiet_NaN();

    bool delivered() const { return decode_time == decode_time; }
};

struct PathTally {
    std::int64_t delivered = 0;
    std::int64_t dropped = 0;
    std::int64_t erased = 0;
};

/// Age bookkeeping. `paoi` holds one sample per delivered block: the age
/// right before its decode measured against the previous delivered block's
/// generation — the per-packet quantity the analytic laws describe. When
/// decoding is in order these samples are exactly the peaks of the age
/// sawtooth; out-of-order decodes (possible with erasures, mostly for
/// unbounded queues) make the two differ, so the strict process peaks —
/// ages right before each freshness advance under the exact theta(t)
/// process — are kept separately in `peaks`.
struct AoiTrace {
    std::vector<std::int64_t> block_index;  // delivered block per paoi sample
    std::vector<double> paoi;
    std::vector<std::int64_t> peak_block;   // freshness-advancing decodes
    std::vector<double> peaks;
    std::vector<double> reset_time;         // theta(t) trace (record_traces)
    std::vector<double> reset_age;          // age right after each reset
};

/// Columnar simulation output; row views via record(i).
class SimResult {
  public:
    std::int64_t n_blocks() const { return n_blocks_; }
    int n_paths() const { return n_paths_; }
    double tau() const { return tau_; }
    std::int64_t warmup() const { return warmup_; }

    BlockRecord record(std::int64_t i) const;
    PathOutcome outcome(std::int64_t block, int path) const;
    double decode_time(std::int64_t block) const { return decode_[idx(block)]; }
    bool delivered(std::int64_t block) const {
        return decode_[idx(block)] == decode_[idx(block)];
    }

    /// Post-warmup block latencies, NaN for undelivered blocks.
    std::vector<double> latency_samples() const;
    const AoiTrace& aoi() const { return aoi_; }
    const std::vector<PathTally>& tallies() const { return tallies_; }  // full run

    /// Post-warmup per-path delivery latencies (time - gen), NaN when lost.
    std::vector<double> path_latency_samples(int path) const;

    /// Pre-arrival occupancy counts per path, post-warmup arrivals only;
    /// index is the occupancy (last bin aggregates deeper states).
    const std::vector<std::vector<std::int64_t>>& occupancy_counts() const {
        return occupancy_;
    }

    /// Pre-arrival occupancy per arrival (clamped at 255), one entry per
    /// block, including warmup; lets callers thin or batch the correlated
    /// state sequence themselves.
    const std::vector<std::uint8_t>& pre_arrival_states(int path) const {
        return states_[static_cast<std::size_t>(path)];
    }

    std::int64_t delivered_blocks() const;  // post-warmup

  private:
    friend SimResult simulate_system(const SystemConfig&, const SimParams&);
    std::size_t idx(std::int64_t block) const {
        return static_cast<std::size_t>(block);
    }
    std::int64_t n_blocks_ = 0;
    std::int64_t warmup_ = 0;
    int n_paths_ = 0;
    double tau_ = 0.0;
    std::vector<double> delivery_time_;      // n_blocks * n_paths
    std::vector<std::uint8_t> outcome_kind_;  // n_blocks * n_paths
    std::vector<double> decode_;              // n_blocks (NaN = undelivered)
    std::vector<PathTally> tallies_;
    std::vector<std::vector<std::int64_t>> occupancy_;
    std::vector<std::vector<std::uint8_t>> states_;
    AoiTrace aoi_;
};

/// Event-driven single queue: deterministic arrivals every tau, exponential
/// service, drop-oldest preemption at capacity, i.i.d. erasure on completion.
/// Outcome i is the fate of block i's packet on this path.
std::vector<PathOutcome> simulate_path(const SystemConfig& cfg, int path,
                                       const SimParams& params);

/// All paths with deterministically split substreams, block assembly, exact
/// out-of-order age bookkeeping.
SimResult simulate_system(const SystemConfig& cfg, const SimParams& params);

/// SplitMix64 step; used to derive per-path and per-grid-point substreams.
std::uint64_t splitmix64(std::uint64_t& state);

/// The substream seed for path j under a base seed (documented contract:
/// j+1 SplitMix64 steps from the base).
std::uint64_t path_substream_seed(std::uint64_t base, int path);

}  // namespace fjq
