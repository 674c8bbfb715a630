#include "fjq/config.hpp"

#include <sstream>

namespace fjq {

const SystemConfig& validate_config(const SystemConfig& cfg) {
    if (cfg.n_paths <= 0 || cfg.k_data <= 0) {
        throw ConfigError(ConfigErrorCode::NonPositiveCount,
                          "N and K must be positive");
    }
    if (cfg.k_data > cfg.n_paths) {
        std::ostringstream os;
        os << "K=" << cfg.k_data << " exceeds N=" << cfg.n_paths;
        throw ConfigError(ConfigErrorCode::KExceedsN, os.str());
    }
    if (!cfg.unbounded() && cfg.cap() <= 0) {
        throw ConfigError(ConfigErrorCode::NonPositiveCap,
                          "queue capacity must be positive");
    }
    if (!(cfg.inter_arrival > 0.0)) {
        throw ConfigError(ConfigErrorCode::NonPositivePeriod,
                          "inter-arrival period must be positive");
    }
    const auto n = static_cast<size_t>(cfg.n_paths);
    if (cfg.service_rates.size() != n || cfg.erasure_probs.size() != n) {
        throw ConfigError(ConfigErrorCode::LengthMismatch,
                          "service_rates and erasure_probs must have length N");
    }
    for (double mu : cfg.service_rates) {
        if (!(mu > 0.0)) {
            throw ConfigError(ConfigErrorCode::NonPositiveRate,
                              "all service rates must be positive");
        }
    }
    for (double eps : cfg.erasure_probs) {
        if (!(eps >= 0.0 && eps < 1.0)) {
            throw ConfigError(ConfigErrorCode::ErasureOutOfRange,
                              "erasure probabilities must lie in [0,1)");
        }
    }
    return cfg;
}

bool stable_unbounded(const SystemConfig& cfg) {
    for (double mu : cfg.service_rates) {
        if (mu * cfg.inter_arrival <= 1.0) return false;
    }
    return true;
}

}  // namespace fjq
