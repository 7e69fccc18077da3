// Structural census of the generated cycle-accurate fabrics. The module
// inventory and the size formulas asserted here were derived by hand from
// the topology rules (per-master request logic and per-slave arbitration for
// Avalon; one shared decoder plus one round-robin arbiter for Wishbone) and
// are frozen as goldens: any change to the builders that alters the shape of
// the generated hardware must be deliberate.
#include <catch2/catch_amalgamated.hpp>

#include <buslab/fabric.hpp>
#include <buslab/metrics.hpp>
#include <buslab/spec.hpp>

using namespace buslab;

namespace {

// Masters run a program touching all four op kinds so every master module
// carries the full set of behaviour processes; the size formulas below are
// stated for that shape.
SystemSpec grid_spec(std::size_t masters, std::size_t slaves, BusKind bus) {
    SystemSpec spec;
    spec.bus = bus;
    spec.arbiter = ArbiterKind::RoundRobin;
    for (std::size_t m = 0; m < masters; ++m)
        spec.masters.push_back(
            {"m" + std::to_string(m + 1), 0,
             parse_program({"set r0 1", "add r1 r0 r0", "write 0x0 r1", "read 0x0 r2"})});
    for (std::size_t s = 0; s < slaves; ++s)
        spec.slaves.push_back(
            {"s" + std::to_string(s + 1), static_cast<u32>(s) * 0x1000u, 0x1000, 2, 1});
    validate_spec(spec);
    return spec;
}

}  // namespace

TEST_CASE("avalon fabric census: per-master request logic, per-slave arbitration") {
    for (std::size_t m = 1; m <= 4; ++m) {
        for (std::size_t s = 1; s <= 4; ++s) {
            Netlist nl = build_fabric(grid_spec(m, s, BusKind::Avalon), BusKind::Avalon);
            CAPTURE(m, s);
            CHECK(nl.level == NetlistLevel::Rtl);
            CHECK(nl.count_kind(ModuleKind::Master) == m);
            CHECK(nl.count_kind(ModuleKind::Slave) == s);
            CHECK(nl.count_kind(ModuleKind::LogicRequest) == m);
            CHECK(nl.count_kind(ModuleKind::LogicArbitrator) == s);
            CHECK(nl.count_kind(ModuleKind::Mux) == 5 * s + m);
            CHECK(nl.count_kind(ModuleKind::Clock) == 1);
            CHECK(nl.count_kind(ModuleKind::Decoder) == 0);
            CHECK(nl.count_kind(ModuleKind::RrArbiter) == 0);
            CHECK(nl.count_kind(ModuleKind::Arbiter) == 0);
            CHECK(check_portmap(nl).empty());
        }
    }
}

TEST_CASE("wishbone fabric census: one decoder, one round-robin arbiter") {
    for (std::size_t m = 1; m <= 4; ++m) {
        for (std::size_t s = 1; s <= 4; ++s) {
            Netlist nl = build_fabric(grid_spec(m, s, BusKind::Wishbone), BusKind::Wishbone);
            CAPTURE(m, s);
            CHECK(nl.count_kind(ModuleKind::Master) == m);
            CHECK(nl.count_kind(ModuleKind::Slave) == s);
            CHECK(nl.count_kind(ModuleKind::Decoder) == 1);
            CHECK(nl.count_kind(ModuleKind::RrArbiter) == 1);
            // Five shared-bus signal muxes appear only once two masters must
            // be merged; read-return muxes are always one per master.
            CHECK(nl.count_kind(ModuleKind::Mux) == (m >= 2 ? 5 + m : m));
            CHECK(nl.count_kind(ModuleKind::Clock) == 1);
            CHECK(nl.count_kind(ModuleKind::LogicRequest) == 0);
            CHECK(nl.count_kind(ModuleKind::LogicArbitrator) == 0);
            CHECK(check_portmap(nl).empty());
        }
    }
}

TEST_CASE("avalon fabric size follows the closed-form complexity model") {
    for (std::size_t m = 1; m <= 4; ++m) {
        for (std::size_t s = 1; s <= 4; ++s) {
            auto c = complexity(build_fabric(grid_spec(m, s, BusKind::Avalon), BusKind::Avalon));
            CAPTURE(m, s);
            CHECK(c.modules == 3 * m + 7 * s + 1);
            CHECK(c.ports == 17 * m + 20 * s + 17 * m * s + 1);
            CHECK(c.processes == 8 * m + 11 * s + 1);
            CHECK(c.connections == 9 * m + 13 * s + 14 * m * s);
            CHECK(c.total() == 37 * m + 51 * s + 31 * m * s + 3);
        }
    }
}

TEST_CASE("wishbone fabric size follows the closed-form complexity model") {
    for (std::size_t s = 1; s <= 4; ++s) {
        auto c1 = complexity(build_fabric(grid_spec(1, s, BusKind::Wishbone), BusKind::Wishbone));
        CAPTURE(s);
        CHECK(c1.modules == s + 5);
        CHECK(c1.ports == 14 * s + 24);
        CHECK(c1.processes == 4 * s + 12);
        CHECK(c1.connections == 11 * s + 11);
        CHECK(c1.total() == 30 * s + 52);

        for (std::size_t m = 2; m <= 4; ++m) {
            auto c = complexity(build_fabric(grid_spec(m, s, BusKind::Wishbone), BusKind::Wishbone));
            CAPTURE(m);
            CHECK(c.modules == 2 * m + s + 8);
            CHECK(c.ports == 27 * m + 12 * s + 2 * m * s + 19);
            CHECK(c.processes == 7 * m + 4 * s + 10);
            CHECK(c.connections == 17 * m + 9 * s + 2 * m * s + 10);
            CHECK(c.total() == 53 * m + 26 * s + 4 * m * s + 47);
        }
    }
}

TEST_CASE("point-to-point topology needs no interconnect logic") {
    for (BusKind bus : {BusKind::Wishbone, BusKind::Avalon}) {
        Netlist nl = build_fabric(tier_spec(2, bus), bus);
        CAPTURE(bus == BusKind::Avalon);
        CHECK(nl.modules.size() == 3);  // master, slave, clock
        CHECK(nl.count_kind(ModuleKind::Mux) == 0);
        CHECK(nl.count_kind(ModuleKind::Decoder) == 0);
        CHECK(nl.count_kind(ModuleKind::RrArbiter) == 0);
        CHECK(nl.count_kind(ModuleKind::LogicRequest) == 0);
        CHECK(nl.count_kind(ModuleKind::LogicArbitrator) == 0);
        CHECK(check_portmap(nl).empty());
    }
}

TEST_CASE("mux inventory plan matches the built fabrics") {
    auto p = mux_plan(3, 2, BusKind::Avalon);
    CHECK(p.perSlaveMuxes == 10);
    CHECK(p.masterReadMuxes == 3);
    CHECK(p.busSignalMuxes == 0);
    CHECK(p.total() == 13);
    CHECK(p.perSlaveKinds ==
          std::vector<std::string>{"address", "be_n", "write", "writedata", "read"});
    CHECK(p.slaveSideMuxWidth == 3);
    CHECK(p.masterReadMuxWidth == 2);

    auto w = mux_plan(3, 2, BusKind::Wishbone);
    CHECK(w.perSlaveMuxes == 0);
    CHECK(w.busSignalMuxes == 5);
    CHECK(w.masterReadMuxes == 3);
    CHECK(w.total() == 8);

    CHECK(mux_plan(1, 2, BusKind::Wishbone).busSignalMuxes == 0);
    CHECK(mux_plan(1, 1, BusKind::Avalon, /*arbitrated=*/false).total() == 0);

    for (std::size_t m = 1; m <= 4; ++m)
        for (std::size_t s = 1; s <= 4; ++s)
            for (BusKind bus : {BusKind::Avalon, BusKind::Wishbone}) {
                CAPTURE(m, s, bus == BusKind::Avalon);
                CHECK(build_fabric(grid_spec(m, s, bus), bus).count_kind(ModuleKind::Mux) ==
                      mux_plan(m, s, bus).total());
            }
}

TEST_CASE("fabric embeds the address map with declaration-order target ids") {
    Netlist nl = build_fabric(grid_spec(2, 3, BusKind::Avalon), BusKind::Avalon);
    REQUIRE(nl.map.entries.size() == 3);
    CHECK(nl.map.entries[0].base == 0x0000);
    CHECK(nl.map.entries[1].base == 0x1000);
    CHECK(nl.map.entries[2].base == 0x2000);
    CHECK(nl.map.entries[2].targetId == 2);
}
