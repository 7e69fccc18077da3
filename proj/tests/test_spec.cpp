// Spec validation, the canonical tier family, and the JSON document format.
#include <functional>

#include <catch2/catch_amalgamated.hpp>

#include <buslab/spec.hpp>
#include <buslab/spec_io.hpp>

using namespace buslab;

namespace {

SystemSpec minimal_spec() {
    SystemSpec s;
    s.bus = BusKind::Avalon;
    s.arbiter = ArbiterKind::RoundRobin;
    s.masters.push_back({"m1", 0, parse_program({"write 0x0 0x1"})});
    s.slaves.push_back({"s1", 0x0, 0x100, 1, 1});
    return s;
}

SpecErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const SpecError& e) {
        return e.kind;
    }
    FAIL("expected a SpecError");
    return SpecErrorKind::Syntax;
}

}  // namespace

TEST_CASE("canonical tiers have the documented shapes") {
    for (BusKind bus : {BusKind::Avalon, BusKind::Wishbone}) {
        SystemSpec t2 = tier_spec(2, bus);
        CHECK(t2.masters.size() == 1);
        CHECK(t2.slaves.size() == 1);
        CHECK(t2.arbiter == ArbiterKind::None);

        SystemSpec t3 = tier_spec(3, bus);
        CHECK(t3.masters.size() == 1);
        CHECK(t3.slaves.size() == 1);
        CHECK(t3.arbiter == ArbiterKind::RoundRobin);

        SystemSpec t4 = tier_spec(4, bus);
        CHECK(t4.masters.size() == 2);
        CHECK(t4.slaves.size() == 1);

        SystemSpec t5 = tier_spec(5, bus);
        CHECK(t5.masters.size() == 2);
        CHECK(t5.slaves.size() == 2);
        CHECK(t5.slaves[0].base == 0x0000);
        CHECK(t5.slaves[1].base == 0x1000);
        CHECK(t5.slaves[0].size == 0x1000);
        CHECK(t5.slaves[0].readLatency == 2);
        CHECK(t5.slaves[0].writeLatency == 1);
        // Master program regions stay disjoint so canonical runs are race-free.
        CHECK(t5.masters[0].startAddress == 0x0000);
        CHECK(t5.masters[1].startAddress == 0x1000);
        SystemSpec t4b = tier_spec(4, bus);
        CHECK(t4b.masters[0].startAddress == 0x000);
        CHECK(t4b.masters[1].startAddress == 0x800);
    }
    CHECK_THROWS_AS(tier_spec(1, BusKind::Avalon), SpecError);
    CHECK_THROWS_AS(tier_spec(6, BusKind::Avalon), SpecError);
}

TEST_CASE("validate_spec rejects structural violations with precise kinds") {
    CHECK(kind_of([] {
        SystemSpec s = minimal_spec();
        s.masters.clear();
        validate_spec(s);
    }) == SpecErrorKind::NoMasters);

    CHECK(kind_of([] {
        SystemSpec s = minimal_spec();
        s.slaves.clear();
        validate_spec(s);
    }) == SpecErrorKind::NoSlaves);

    CHECK(kind_of([] {
        SystemSpec s = minimal_spec();
        s.slaves.push_back({"s2", 0x80, 0x100, 1, 1});  // overlaps s1
        validate_spec(s);
    }) == SpecErrorKind::OverlappingMap);

    CHECK(kind_of([] {
        SystemSpec s = minimal_spec();
        s.slaves.push_back({"m1", 0x1000, 0x100, 1, 1});  // clashes with master name
        validate_spec(s);
    }) == SpecErrorKind::DuplicateName);

    CHECK(kind_of([] {
        SystemSpec s = minimal_spec();
        s.slaves[0].base = 0x2;  // not 4-aligned
        validate_spec(s);
    }) == SpecErrorKind::BadAlignment);

    CHECK(kind_of([] {
        SystemSpec s = minimal_spec();
        s.slaves[0].size = 6;  // not a multiple of 4
        validate_spec(s);
    }) == SpecErrorKind::BadValue);

    CHECK(kind_of([] {
        SystemSpec s = minimal_spec();
        s.slaves[0].readLatency = 0;
        validate_spec(s);
    }) == SpecErrorKind::BadValue);

    CHECK(kind_of([] {
        SystemSpec s = minimal_spec();
        s.arbiter = ArbiterKind::None;
        s.masters.push_back({"m2", 0, {}});
        validate_spec(s);
    }) == SpecErrorKind::BadTopology);

    SECTION("point-to-point with exactly one of each is fine") {
        SystemSpec s = minimal_spec();
        s.arbiter = ArbiterKind::None;
        CHECK_NOTHROW(validate_spec(s));
    }

    CHECK(kind_of([] {
        SystemSpec s = minimal_spec();
        SystemSpec cand = minimal_spec();
        cand.candidates.push_back(minimal_spec());  // nested candidate
        s.candidates.push_back(cand);
        validate_spec(s);
    }) == SpecErrorKind::BadValue);
}

TEST_CASE("spec json round-trips") {
    SystemSpec t5 = tier_spec(5, BusKind::Wishbone);
    t5.candidates.push_back(tier_spec(3, BusKind::Wishbone));
    std::string text = serialize_spec(t5);
    SystemSpec back = parse_spec(text);
    CHECK(back.bus == t5.bus);
    CHECK(back.arbiter == t5.arbiter);
    REQUIRE(back.masters.size() == t5.masters.size());
    REQUIRE(back.slaves.size() == t5.slaves.size());
    for (std::size_t i = 0; i < t5.masters.size(); ++i) {
        CHECK(back.masters[i].name == t5.masters[i].name);
        CHECK(serialize_program(back.masters[i].program) ==
              serialize_program(t5.masters[i].program));
    }
    for (std::size_t i = 0; i < t5.slaves.size(); ++i) {
        CHECK(back.slaves[i].name == t5.slaves[i].name);
        CHECK(back.slaves[i].base == t5.slaves[i].base);
        CHECK(back.slaves[i].size == t5.slaves[i].size);
        CHECK(back.slaves[i].readLatency == t5.slaves[i].readLatency);
        CHECK(back.slaves[i].writeLatency == t5.slaves[i].writeLatency);
    }
    REQUIRE(back.candidates.size() == 1);
    CHECK(back.candidates[0].masters.size() == 1);
}

TEST_CASE("spec json parsing reports errors") {
    SECTION("syntax errors carry line and column") {
        try {
            parse_spec("{\n  \"bus\": \"avalon\",\n  !\n}");
            FAIL("expected SpecError");
        } catch (const SpecError& e) {
            CHECK(e.kind == SpecErrorKind::Syntax);
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SECTION("unknown bus") {
        CHECK_THROWS_AS(parse_spec(R"({"bus":"axi","masters":[],"slaves":[]})"), SpecError);
    }
    SECTION("hex strings accepted for numeric fields") {
        SystemSpec s = parse_spec(R"({
            "bus": "avalon",
            "masters": [{"name": "m1", "program": ["write 0x10 7"]}],
            "slaves": [{"name": "s1", "base": "0x1000", "size": "0x100"}]
        })");
        CHECK(s.slaves[0].base == 0x1000);
        CHECK(s.slaves[0].size == 0x100);
        CHECK(s.slaves[0].readLatency == 1);  // defaulted
    }
    SECTION("validation runs on parsed documents") {
        CHECK_THROWS_AS(parse_spec(R"({
            "bus": "avalon",
            "masters": [{"name": "m1"}],
            "slaves": [{"name": "s1", "base": 0, "size": 64},
                       {"name": "s2", "base": 32, "size": 64}]
        })"),
                        SpecError);
    }
}
