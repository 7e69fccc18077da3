// Address decoding shared by both abstraction levels.
#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "spec.hpp"
#include "types.hpp"

namespace buslab {

struct MapEntry {
    u32 base = 0;
    u32 size = 0;
    std::size_t targetId = 0;  // index into SystemSpec::slaves
    friend bool operator==(const MapEntry&, const MapEntry&) = default;
};

struct RouteTarget {
    std::size_t targetId = 0;
    u32 offset = 0;  // address - entry.base
    friend bool operator==(const RouteTarget&, const RouteTarget&) = default;
};

// Entries kept sorted by base; targetId preserves slave declaration order.
// Both the TLM kernel and the RTL fabric decode through this one table.
struct AddressMap {
    std::vector<MapEntry> entries;

    static AddressMap from_spec(const SystemSpec& spec) {
        AddressMap map;
        for (std::size_t i = 0; i < spec.slaves.size(); ++i)
            map.entries.push_back({spec.slaves[i].base, spec.slaves[i].size, i});
        std::sort(map.entries.begin(), map.entries.end(),
                  [](const MapEntry& a, const MapEntry& b) { return a.base < b.base; });
        return map;
    }

    friend bool operator==(const AddressMap&, const AddressMap&) = default;
};

// Binary search over the sorted disjoint ranges; nullopt means unmapped.
inline std::optional<RouteTarget> route(const AddressMap& map, u32 addr) {
    auto it = std::upper_bound(map.entries.begin(), map.entries.end(), addr,
                               [](u32 a, const MapEntry& e) { return a < e.base; });
    if (it == map.entries.begin()) return std::nullopt;
    --it;
    u64 end = static_cast<u64>(it->base) + it->size;
    if (addr < end) return RouteTarget{it->targetId, addr - it->base};
    return std::nullopt;
}

}  // namespace buslab
