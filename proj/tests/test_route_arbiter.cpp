// Address routing and round-robin arbitration against independent oracles
// written here in terms of first principles (linear scan, exhaustive cyclic
// scan) rather than the library's own algorithms.
#include <optional>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include <buslab/address_map.hpp>
#include <buslab/arbiter.hpp>

using namespace buslab;

namespace {

// Oracle: check every entry directly, no ordering assumptions.
std::optional<RouteTarget> route_oracle(const AddressMap& map, u32 addr) {
    for (const auto& e : map.entries) {
        u64 end = static_cast<u64>(e.base) + e.size;
        if (addr >= e.base && addr < end) return RouteTarget{e.targetId, addr - e.base};
    }
    return std::nullopt;
}

// Oracle: enumerate the cyclic order explicitly and take the first requester.
std::optional<std::size_t> rr_oracle(const std::vector<bool>& req,
                                     std::optional<std::size_t> lastGrant) {
    const std::size_t n = req.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t idx = lastGrant ? (*lastGrant + 1 + k) % n : k;
        if (req[idx]) return idx;
    }
    return std::nullopt;
}

AddressMap random_disjoint_map(std::mt19937& rng, std::size_t entries) {
    AddressMap map;
    u32 cursor = 0;
    for (std::size_t i = 0; i < entries; ++i) {
        u32 gap = (rng() % 64) * 4;
        u32 size = ((rng() % 256) + 1) * 4;
        cursor += gap;
        map.entries.push_back({cursor, size, i});
        cursor += size;
    }
    return map;
}

}  // namespace

TEST_CASE("route matches the linear-scan oracle on boundaries and random addresses") {
    std::mt19937 rng(0xB005u);
    for (std::size_t entries = 1; entries <= 8; ++entries) {
        AddressMap map = random_disjoint_map(rng, entries);

        // Boundary probes: +-4 around each edge of each range.
        for (const auto& e : map.entries) {
            for (long long probe :
                 {static_cast<long long>(e.base) - 4, static_cast<long long>(e.base),
                  static_cast<long long>(e.base) + e.size - 4,
                  static_cast<long long>(e.base) + e.size,
                  static_cast<long long>(e.base) + e.size + 4}) {
                if (probe < 0 || probe > 0xFFFFFFFFll) continue;
                u32 addr = static_cast<u32>(probe);
                CAPTURE(entries, addr);
                CHECK(route(map, addr) == route_oracle(map, addr));
            }
        }

        for (int i = 0; i < 1000; ++i) {
            u32 addr = (rng() % 0x40000) * 4;
            CAPTURE(entries, addr);
            CHECK(route(map, addr) == route_oracle(map, addr));
        }
    }
}

TEST_CASE("route reports offsets relative to the matched base") {
    AddressMap map;
    map.entries = {{0x1000, 0x100, 0}, {0x2000, 0x40, 1}};
    auto r = route(map, 0x1010);
    REQUIRE(r.has_value());
    CHECK(r->targetId == 0);
    CHECK(r->offset == 0x10);
    auto r2 = route(map, 0x203C);
    REQUIRE(r2.has_value());
    CHECK(r2->targetId == 1);
    CHECK(r2->offset == 0x3C);
    CHECK_FALSE(route(map, 0x2040).has_value());
    CHECK_FALSE(route(map, 0x0FFC).has_value());
}

TEST_CASE("address map built from a spec preserves declaration ids and sorts bases") {
    SystemSpec spec;
    spec.bus = BusKind::Avalon;
    spec.masters.push_back({"m1", 0, {}});
    spec.slaves.push_back({"high", 0x2000, 0x100, 1, 1});
    spec.slaves.push_back({"low", 0x0000, 0x100, 1, 1});
    AddressMap map = AddressMap::from_spec(spec);
    REQUIRE(map.entries.size() == 2);
    CHECK(map.entries[0].base == 0x0000);
    CHECK(map.entries[0].targetId == 1);  // declaration index of "low"
    CHECK(map.entries[1].base == 0x2000);
    CHECK(map.entries[1].targetId == 0);
}

TEST_CASE("arbitrate_rr matches the exhaustive oracle for every subset and pointer") {
    for (std::size_t n = 1; n <= 4; ++n) {
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            std::vector<bool> req(n);
            for (std::size_t i = 0; i < n; ++i) req[i] = (mask >> i) & 1;

            std::vector<std::optional<std::size_t>> pointers = {std::nullopt};
            for (std::size_t g = 0; g < n; ++g) pointers.push_back(g);

            for (auto lastGrant : pointers) {
                CAPTURE(n, mask, lastGrant.has_value() ? static_cast<int>(*lastGrant) : -1);
                CHECK(arbitrate_rr(req, lastGrant) == rr_oracle(req, lastGrant));
            }
        }
    }
    CHECK_FALSE(arbitrate_rr({}, std::nullopt).has_value());
}

TEST_CASE("arbitrate_rr is fair over a full-contention rotation") {
    std::vector<bool> all(4, true);
    std::optional<std::size_t> g;
    std::vector<std::size_t> grants;
    for (int i = 0; i < 12; ++i) {
        g = arbitrate_rr(all, g);
        REQUIRE(g.has_value());
        grants.push_back(*g);
    }
    CHECK(grants == std::vector<std::size_t>{0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3});
}
