#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fjq {

/// A D/M/(K,N)/L instance: N parallel M-service queues fed by a
/// deterministic block clock with period tau. A block of K data packets is
/// encoded into N packets, one per queue; any K correct deliveries decode it.
/// queue_cap empty means L = infinity (plain FCFS, no preemption).
struct SystemConfig {
    int n_paths = 0;                     // N
    int k_data = 0;                      // K
    std::optional<int> queue_cap;        // L; nullopt = unbounded
    double inter_arrival = 0.0;          // tau, seconds
    std::vector<double> service_rates;   // mu_j, 1/seconds
    std::vector<double> erasure_probs;   // eps_j in [0,1)

    bool unbounded() const { return !queue_cap.has_value(); }
    int cap() const { return *queue_cap; }
};

enum class ConfigErrorCode {
    KExceedsN,
    NonPositiveCount,
    LengthMismatch,
    NonPositiveRate,
    NonPositivePeriod,
    NonPositiveCap,
    ErasureOutOfRange,
};

class ConfigError : public std::invalid_argument {
  public:
    ConfigError(ConfigErrorCode code, const std::string& what)
        : std::invalid_argument(what), code_(code) {}
    ConfigErrorCode code() const { return code_; }

  private:
    ConfigErrorCode code_;
};

/// Returns cfg unchanged if all invariants hold, throws ConfigError otherwise.
const SystemConfig& validate_config(const SystemConfig& cfg);

/// True if every path satisfies the D/M/1 stability condition mu_j * tau > 1.
/// Only meaningful for unbounded queues; finite caps are always stable.
bool stable_unbounded(const SystemConfig& cfg);

}  // namespace fjq
