#pragma once

#include <vector>

#include "fjq/config.hpp"
#include "fjq/grid.hpp"
#include "fjq/path_analysis.hpp"

namespace fjq {

/// Block-level analytic artifacts: delivery-latency law (mass = probability
/// the block is ever decoded), decoding success probability, and the peak-age
/// law where an analytic form exists (cap 1 and unbounded queues; empty
/// otherwise, the simulator covers those).
struct BlockAnalysis {
    GridDistribution latency;
    double success_prob = 0.0;
    GridDistribution paoi;
};

/// Block delivery density at one instant from per-path values: sum over the
/// K-1 paths already delivered, the path delivering the K-th packet, and the
/// survivors. Per-path pdfs/cdfs carry their erasure factor already; no
/// second (1-eps) is applied here.
double block_pdf_from_values(const std::vector<double>& pdfs,
                             const std::vector<double>& cdfs, int k_data);

/// P(at least k of the n independent per-path events) by dynamic programming
/// over the event probabilities.
double poisson_binomial_tail(const std::vector<double>& probs, int k);

/// Unbounded-queue success probability: no queue drops, so a block fails only
/// by erasures. Direct subset-sum form over delivery patterns.
double success_prob_infinite(const SystemConfig& cfg);

/// Conditional block law with every path pinned at q[j] packets ahead
/// (finite cap only); support (0, L*tau].
GridDistribution block_latency_conditional(const SystemConfig& cfg,
                                           const std::vector<int>& q,
                                           double grid_step);

/// Unconditional block analysis. Finite caps mix the per-path conditional
/// laws by the pre-arrival state law before combining (paths are independent,
/// so mixing per path first is exactly the product-state mixture); unbounded
/// queues use the closed-form exponential per-path laws and require
/// stability on every path.
BlockAnalysis block_latency(const SystemConfig& cfg, double grid_step);

/// Exact closed-form CDF of the cap-1 block latency (four-fold subset sum);
/// flat beyond tau where every pending packet has been preempted.
double block_latency_cdf_L1_closed(const SystemConfig& cfg, double t);

/// Peak-age law for cap 1: geometric retry mixture of the one-period block
/// law, supported on (tau, ...], grid-aligned to tau so the density jumps at
/// period multiples stay on cell edges. Total mass 1 up to a truncated
/// geometric tail < 1e-9.
GridDistribution paoi_L1(const SystemConfig& cfg, double grid_step);

/// Peak-age law for unbounded queues: sum over e >= 0 consecutive failed
/// blocks of (1-p_s)^e times the block law shifted by (e+1) periods.
GridDistribution paoi_infinite(const SystemConfig& cfg, double grid_step);

/// Small-instance peak-age law for cap 2 under in-order decoding (N < 2K),
/// by enumeration of the binary pre-arrival state sequences of every path
/// between consecutive successes. Truncated at ell_max failed-block rounds;
/// the law's support is cut at (ell_max+1)*tau and `tail_mass` reports the
/// truncated remainder.
struct PaoiL2Result {
    GridDistribution paoi;
    double tail_mass = 0.0;
};
PaoiL2Result paoi_L2_smallinstance(const SystemConfig& cfg, int ell_max,
                                   double grid_step);

}  // namespace fjq
