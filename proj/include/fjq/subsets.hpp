#pragma once

#include <stdexcept>
#include <vector>

namespace fjq {

/// Enumerates all size-k subsets of {0, ..., n-1} in lexicographic order.
/// The paper-style index sets over paths; 0-based here, deterministic order
/// so analytic sums are reproducible term for term.
class SubsetFamily {
  public:
    SubsetFamily(int n, int k) : n_(n), k_(k) {
        if (k < 0 || n < 0 || k > n)
            throw std::invalid_argument("SubsetFamily: need 0 <= k <= n");
    }

    int universe() const { return n_; }
    int size() const { return k_; }

    /// Visits every subset exactly once as a const vector<int>&.
    template <typename Fn>
    void for_each(Fn&& fn) const {
        std::vector<int> idx(static_cast<size_t>(k_));
        for (int i = 0; i < k_; ++i) idx[static_cast<size_t>(i)] = i;
        if (k_ == 0) {
            fn(static_cast<const std::vector<int>&>(idx));
            return;
        }
        while (true) {
            fn(static_cast<const std::vector<int>&>(idx));
            // advance to next lexicographic combination
            int i = k_ - 1;
            while (i >= 0 && idx[static_cast<size_t>(i)] == n_ - k_ + i) --i;
            if (i < 0) break;
            ++idx[static_cast<size_t>(i)];
            for (int j = i + 1; j < k_; ++j)
                idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
        }
    }

    /// Materializes the family (small n only; used by tests).
    std::vector<std::vector<int>> to_vector() const {
        std::vector<std::vector<int>> out;
        for_each([&](const std::vector<int>& s) { out.push_back(s); });
        return out;
    }

  private:
    int n_;
    int k_;
};

}  // namespace fjq
