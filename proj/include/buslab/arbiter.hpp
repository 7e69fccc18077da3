// Round-robin arbitration, used by the TLM scheduler and the RTL arbiter
// executors alike so both levels grant in the same order.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace buslab {

// Picks the first requester strictly after `lastGrant` in cyclic master
// order; with no history the scan starts at index 0. Returns nullopt iff
// nobody requests. `requesting[i]` refers to the master with declaration
// index i.
inline std::optional<std::size_t> arbitrate_rr(const std::vector<bool>& requesting,
                                               std::optional<std::size_t> lastGrant) {
    const std::size_t n = requesting.size();
    if (n == 0) return std::nullopt;
    std::size_t start = lastGrant ? (*lastGrant + 1) % n : 0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t idx = (start + k) % n;
        if (requesting[idx]) return idx;
    }
    return std::nullopt;
}

}  // namespace buslab
