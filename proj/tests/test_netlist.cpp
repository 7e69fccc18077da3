// Structural netlist model: port-map validation, canonical renaming and
// isomorphism checks used to compare independently constructed systems.
#include <algorithm>

#include <catch2/catch_amalgamated.hpp>

#include <buslab/netlist.hpp>

using namespace buslab;

namespace {

// in -> [stage] -> out with every input driven exactly once.
Netlist clean_pair() {
    Netlist nl;
    nl.level = NetlistLevel::Rtl;
    auto& src = nl.add_module("src", ModuleKind::Master);
    src.port("q", PortDir::Out, 32, PortTag::Common);
    auto& dst = nl.add_module("dst", ModuleKind::Slave);
    dst.port("d", PortDir::In, 32, PortTag::Common);
    nl.connect("src", "q", "dst", "d");
    return nl;
}

bool has_violation(const std::vector<PortmapViolation>& vs, ElabErrorKind kind,
                   const std::string& whereFragment, const std::string& detailFragment = "") {
    return std::any_of(vs.begin(), vs.end(), [&](const PortmapViolation& v) {
        return v.kind == kind && v.where.find(whereFragment) != std::string::npos &&
               v.detail.find(detailFragment) != std::string::npos;
    });
}

}  // namespace

TEST_CASE("a fully wired netlist validates cleanly") {
    CHECK(check_portmap(clean_pair()).empty());
}

TEST_CASE("duplicate module names are rejected") {
    Netlist nl = clean_pair();
    nl.add_module("src", ModuleKind::Clock);
    auto vs = check_portmap(nl);
    CHECK(has_violation(vs, ElabErrorKind::BadNetlist, "src", "duplicate module name"));
}

TEST_CASE("connections referencing unknown modules or ports are reported") {
    Netlist nl = clean_pair();
    nl.connect("ghost", "q", "dst", "d");
    nl.connect("src", "q", "phantom", "d");
    nl.connect("src", "nosuch", "dst", "d");
    nl.connect("src", "q", "dst", "nosuch");
    auto vs = check_portmap(nl);
    CHECK(has_violation(vs, ElabErrorKind::BadNetlist, "ghost.q", "unknown module 'ghost'"));
    CHECK(has_violation(vs, ElabErrorKind::BadNetlist, "phantom.d", "unknown module 'phantom'"));
    CHECK(has_violation(vs, ElabErrorKind::BadNetlist, "src.nosuch",
                        "unknown port 'src.nosuch'"));
    CHECK(has_violation(vs, ElabErrorKind::BadNetlist, "dst.nosuch",
                        "unknown port 'dst.nosuch'"));
}

TEST_CASE("connection direction is enforced at both ends") {
    Netlist nl;
    nl.add_module("a", ModuleKind::Master)
        .port("o", PortDir::Out, 1, PortTag::Common)
        .port("i", PortDir::In, 1, PortTag::Common);
    nl.add_module("b", ModuleKind::Slave)
        .port("o", PortDir::Out, 1, PortTag::Common)
        .port("i", PortDir::In, 1, PortTag::Common);
    nl.connect("a", "i", "b", "i");  // driver is an input
    nl.connect("a", "o", "b", "o");  // sink is an output
    nl.connect("b", "o", "a", "i");  // make a.i legal so only the two above remain
    auto vs = check_portmap(nl);
    CHECK(has_violation(vs, ElabErrorKind::BadNetlist, "a.i -> b.i", "driver is not an output"));
    CHECK(has_violation(vs, ElabErrorKind::BadNetlist, "a.o -> b.o", "sink is not an input"));
    // b.i never acquired a legal driver.
    CHECK(has_violation(vs, ElabErrorKind::UnconnectedPort, "b.i", "no driver"));
}

TEST_CASE("undriven inputs and multiply driven inputs are pinpointed") {
    Netlist nl = clean_pair();
    nl.find_module("dst")->port("extra", PortDir::In, 1, PortTag::Common);
    auto vs = check_portmap(nl);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].kind == ElabErrorKind::UnconnectedPort);
    CHECK(vs[0].where == "dst.extra");

    Netlist nl2 = clean_pair();
    nl2.add_module("src2", ModuleKind::Master).port("q2", PortDir::Out, 32, PortTag::Common);
    nl2.connect("src2", "q2", "dst", "d");
    auto vs2 = check_portmap(nl2);
    REQUIRE(vs2.size() == 1);
    CHECK(vs2[0].kind == ElabErrorKind::MultipleDrivers);
    CHECK(vs2[0].where == "dst.d");
    // The offending drivers are named in the message.
    CHECK(vs2[0].detail.find("src.q") != std::string::npos);
    CHECK(vs2[0].detail.find("src2.q2") != std::string::npos);
    CHECK(vs2[0].detail.find("2 outputs") != std::string::npos);

    // Fan-out from one output to many inputs stays legal.
    Netlist nl3 = clean_pair();
    nl3.find_module("dst")->port("d2", PortDir::In, 32, PortTag::Common);
    nl3.connect("src", "q", "dst", "d2");
    CHECK(check_portmap(nl3).empty());
}

TEST_CASE("canonical form is independent of user-visible names and declaration order") {
    auto build = [](const std::string& mName, const std::string& sName, bool slaveFirst) {
        Netlist nl;
        nl.level = NetlistLevel::Rtl;
        auto add_master = [&](Netlist& n) {
            n.add_module(mName, ModuleKind::Master).port("q", PortDir::Out, 32, PortTag::Common);
        };
        auto add_slave = [&](Netlist& n) {
            n.add_module(sName, ModuleKind::Slave).port("d", PortDir::In, 32, PortTag::Common);
        };
        if (slaveFirst) {
            add_slave(nl);
            add_master(nl);
        } else {
            add_master(nl);
            add_slave(nl);
        }
        nl.connect(mName, "q", sName, "d");
        return nl;
    };

    Netlist a = build("cpu", "ram", false);
    Netlist b = build("alpha", "beta", true);
    CHECK(isomorphic(a, b));
    CHECK_FALSE(first_structural_difference(a, b).has_value());

    std::string canon = canonical_dump(a);
    CHECK(canon.find("master#0") != std::string::npos);
    CHECK(canon.find("slave#0") != std::string::npos);
    CHECK(canon.find("cpu") == std::string::npos);
    CHECK(canon.find("connect master#0.q -> slave#0.d") != std::string::npos);
}

TEST_CASE("structural differences break isomorphism and are reported line-precisely") {
    Netlist a = clean_pair();
    Netlist b = clean_pair();
    CHECK(isomorphic(a, b));

    b.find_module("src")->port("debug", PortDir::Out, 1, PortTag::RtlOnly);
    CHECK_FALSE(isomorphic(a, b));
    auto diff = first_structural_difference(a, b);
    REQUIRE(diff.has_value());
    CHECK(diff->find("debug") != std::string::npos);

    // Width changes alone are structural.
    Netlist c = clean_pair();
    c.find_module("src")->ports[0].width = 8;
    CHECK_FALSE(isomorphic(a, c));
    auto wdiff = first_structural_difference(a, c);
    REQUIRE(wdiff.has_value());
    CHECK(wdiff->find("width=") != std::string::npos);

    // Level changes are structural too.
    Netlist d = clean_pair();
    d.level = NetlistLevel::Tlm;
    CHECK_FALSE(isomorphic(a, d));
}

TEST_CASE("construction-order dump lists the scaffold verbatim") {
    Netlist nl = clean_pair();
    std::string text = dump(nl);
    CHECK(text.find("netlist level=rtl modules=2 connections=1") != std::string::npos);
    CHECK(text.find("module src kind=master") != std::string::npos);
    CHECK(text.find("  port q out width=32 tag=common") != std::string::npos);
    CHECK(text.find("connect src.q -> dst.d") != std::string::npos);
}
