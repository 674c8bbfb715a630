#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fjq/config.hpp"

namespace fjq {

enum class Engine { Analytic, Simulate, Both };

/// One resolved grid point of a scenario: a full config plus its derived
/// substream seed. offered_traffic is set for redundancy scenarios.
struct GridPoint {
    int id = 0;
    SystemConfig cfg;
    std::uint64_t seed = 0;
    std::optional<double> offered_traffic;
};

struct Scenario {
    std::string name;
    Engine engine = Engine::Both;
    std::int64_t n_blocks = 1'000'000;
    std::int64_t warmup_blocks = 1'000;
    std::uint64_t seed = 1;
    std::optional<double> grid_step;  // absolute step hint; aligned per point
    bool compute_paoi = true;
    bool record_traces = false;
    std::vector<double> percentile_levels{0.95, 0.99};
    std::size_t analytic_cell_cap = 4'000'000;
    std::vector<GridPoint> points;
};

class ScenarioError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Scaled rates and offered traffic for a redundancy scenario: a payload of
/// size M split into K packets makes each packet size M/K, so service rates
/// scale as mu'_j = K mu_j / M, and G = M / (N tau min_j mu_j) is the load
/// of the slowest path at K = N.
struct RedundancyParams {
    std::vector<double> service_rates;
    double offered_traffic = 0.0;
};
RedundancyParams redundancy_params(double payload, int k, int n, double tau,
                                   const std::vector<double>& mu_base);

/// Parses scenario JSON text (schema in the README). Throws ScenarioError.
Scenario parse_scenario(const std::string& text);

/// Loads and parses a scenario file.
Scenario load_scenario(const std::string& path);

struct RunOptions {
    std::string out_dir;
    std::optional<Engine> engine;          // CLI override
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> blocks;
    std::optional<double> grid_step;
    int jobs = 0;                          // 0 = hardware concurrency
};

/// Runs every grid point and writes summary.csv, latency_cdf.csv,
/// paoi_cdf.csv, manifest.json (and per-point traces when enabled) under
/// opt.out_dir. Rows are ordered by point id regardless of worker timing;
/// reruns with identical inputs produce byte-identical files.
void run_scenario(const Scenario& scenario, const RunOptions& opt);

/// The effective per-point grid step: tau/400 by default, otherwise the
/// closest step to `hint` that divides tau exactly.
double aligned_grid_step(double tau, std::optional<double> hint);

/// Substream seed for a grid point (base advanced id+1 SplitMix64 steps).
std::uint64_t point_seed(std::uint64_t base, int point_id);

}  // namespace fjq
