// Command-layer tests: artifact files, console output and the exit-code
// contract, all exercised in-process through the cmd_* entry points.
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include <buslab/cli.hpp>
#include <buslab/spec.hpp>
#include <buslab/spec_io.hpp>

using namespace buslab;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "buslab_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string write_spec(const std::string& name, const SystemSpec& spec) {
    fs::path p = test_dir() / name;
    std::ofstream f(p);
    f << serialize_spec(spec);
    return p.string();
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);) out.push_back(line);
    return out;
}

// Strips the final (wall-clock) column off every data row of a sweep CSV.
std::string strip_wall_column(const std::string& csv) {
    std::string out;
    for (const auto& line : lines_of(csv)) {
        auto cut = line.rfind(',');
        out += line.substr(0, cut) + "\n";
    }
    return out;
}

}  // namespace

TEST_CASE("run command writes trace, state and stats artifacts") {
    std::string spec = write_spec("t3_wb.json", tier_spec(3, BusKind::Wishbone));
    RunConfig cfg;
    cfg.specPath = spec;
    cfg.model = "tlm";
    cfg.tracePath = (test_dir() / "trace.csv").string();
    cfg.statePath = (test_dir() / "state.txt").string();
    cfg.statsPath = (test_dir() / "stats.json").string();

    std::ostringstream out, err;
    CHECK(cmd_run(cfg, out, err) == 0);
    CHECK(err.str().empty());
    CHECK(out.str().find("model: tlm\n") != std::string::npos);
    CHECK(out.str().find("bus: wishbone\n") != std::string::npos);
    CHECK(out.str().find("transactions: 9\n") != std::string::npos);

    auto trace = lines_of(read_file(cfg.tracePath));
    REQUIRE(trace.size() == 10);  // header + nine records
    CHECK(trace[0] == "seq,master,kind,address,data,status");
    CHECK(trace[1] == "0,m1,W,0x00000000,0x11221111,OK");
    CHECK(trace[9] == "8,m1,R,0x0000000c,0x11221166,OK");

    auto state = lines_of(read_file(cfg.statePath));
    REQUIRE(state.size() == 1 + 0x1000 / 4);
    CHECK(state[0] == "# slave s1 words 1024");
    CHECK(state[1] == "11221111");
    CHECK(state[2] == "11221166");

    auto stats = nlohmann::json::parse(read_file(cfg.statsPath));
    CHECK(stats["model"] == "tlm");
    CHECK(stats["bus"] == "wishbone");
    CHECK(stats["transactions"] == 9);
    CHECK(stats["waitEvents"] == 0);
}

TEST_CASE("run command drives the cycle-accurate model and dumps signals") {
    std::string spec = write_spec("t2_wb.json", tier_spec(2, BusKind::Wishbone));
    RunConfig cfg;
    cfg.specPath = spec;
    cfg.model = "rtl";
    cfg.signalDumpPath = (test_dir() / "signals.txt").string();

    std::ostringstream out, err;
    CHECK(cmd_run(cfg, out, err) == 0);
    CHECK(out.str().find("cycles: ") != std::string::npos);
    CHECK(out.str().find("transfers: 9\n") != std::string::npos);
    std::string dump = read_file(cfg.signalDumpPath);
    CHECK(dump.find("#0 sysclk.clk=0x1\n") != std::string::npos);
    CHECK(dump.find("m1.cyc=0x1") != std::string::npos);
    // File mode keeps the dump off the console.
    CHECK(out.str().find("sysclk.clk") == std::string::npos);

    // Console mode prints it instead.
    RunConfig cfg2;
    cfg2.specPath = spec;
    cfg2.model = "rtl";
    cfg2.dumpSignals = true;
    std::ostringstream out2, err2;
    CHECK(cmd_run(cfg2, out2, err2) == 0);
    CHECK(out2.str().find("#0 sysclk.clk=0x1\n") != std::string::npos);
}

TEST_CASE("run command honors the bus override") {
    std::string spec = write_spec("t5_wb.json", tier_spec(5, BusKind::Wishbone));
    RunConfig cfg;
    cfg.specPath = spec;
    cfg.model = "rtl";
    cfg.busOverride = "avalon";
    std::ostringstream out, err;
    CHECK(cmd_run(cfg, out, err) == 0);
    CHECK(out.str().find("bus: avalon\n") != std::string::npos);

    cfg.busOverride = "pci";
    std::ostringstream out2, err2;
    CHECK(cmd_run(cfg, out2, err2) == 2);
    CHECK(err2.str().find("unknown bus") != std::string::npos);
}

TEST_CASE("unreadable or invalid specs exit with code 2") {
    RunConfig cfg;
    cfg.specPath = (test_dir() / "missing.json").string();
    std::ostringstream out, err;
    CHECK(cmd_run(cfg, out, err) == 2);
    CHECK(err.str().find("cannot open spec file") != std::string::npos);

    fs::path bad = test_dir() / "bad.json";
    std::ofstream(bad) << "{ this is not json";
    RunConfig cfg2;
    cfg2.specPath = bad.string();
    std::ostringstream out2, err2;
    CHECK(cmd_run(cfg2, out2, err2) == 2);

    std::string spec = write_spec("t2_av.json", tier_spec(2, BusKind::Avalon));
    RunConfig cfg3;
    cfg3.specPath = spec;
    cfg3.model = "netlist";
    std::ostringstream out3, err3;
    CHECK(cmd_run(cfg3, out3, err3) == 2);
    CHECK(err3.str().find("unknown model") != std::string::npos);
}

TEST_CASE("exhausted simulation budgets exit with code 3") {
    std::string spec = write_spec("t3_av.json", tier_spec(3, BusKind::Avalon));

    RunConfig tlm;
    tlm.specPath = spec;
    tlm.model = "tlm";
    tlm.maxTransactions = 5;
    std::ostringstream out, err;
    CHECK(cmd_run(tlm, out, err) == 3);
    CHECK(err.str().find("transaction limit") != std::string::npos);

    RunConfig rtl;
    rtl.specPath = spec;
    rtl.model = "rtl";
    rtl.maxCycles = 5;
    std::ostringstream out2, err2;
    CHECK(cmd_run(rtl, out2, err2) == 3);
    CHECK(err2.str().find("cycle limit") != std::string::npos);
}

TEST_CASE("guarded() maps every library exception onto the exit-code contract") {
    std::ostringstream err;
    CHECK(guarded(err, [] { return 0; }) == 0);
    CHECK(guarded(err, []() -> int {
              throw SpecError(SpecErrorKind::BadValue, "x");
          }) == 2);
    CHECK(guarded(err, []() -> int { throw SimLimitError("x"); }) == 3);
    CHECK(guarded(err, []() -> int {
              throw ElabError(ElabErrorKind::UnconnectedPort, "x");
          }) == 4);
    CHECK(guarded(err, []() -> int { throw RequirementsUnsatisfiable("x"); }) == 2);
    CHECK(guarded(err, []() -> int { throw BuslabError("x"); }) == 2);
    CHECK(err.str().find("error: x") != std::string::npos);
}

TEST_CASE("elaboration failures surface as exit code 4 end to end") {
    std::ostringstream err;
    int code = guarded(err, []() -> int {
        SystemSpec spec = tier_spec(2, BusKind::Wishbone);
        Netlist nl = build_fabric(spec, BusKind::Wishbone);
        nl.connections.pop_back();  // undrive one input
        RtlSystem sys(nl, spec);
        return 0;
    });
    CHECK(code == 4);
    CHECK(err.str().find("port-map validation") != std::string::npos);
}

TEST_CASE("compare command reports agreement with exit code 0") {
    std::string spec = write_spec("t4_av.json", tier_spec(4, BusKind::Avalon));
    CompareConfig cfg;
    cfg.specPath = spec;
    std::ostringstream out, err;
    CHECK(cmd_compare(cfg, out, err) == 0);
    std::string s = out.str();
    CHECK(s.find("bus: avalon\n") != std::string::npos);
    CHECK(s.find("alpha: 0.000000\n") != std::string::npos);
    CHECK(s.find("race: no\n") != std::string::npos);
    CHECK(s.find("complexity: tlm 42, rtl 190, te 4.523810\n") != std::string::npos);
    CHECK(s.find("record diff") == std::string::npos);
}

TEST_CASE("compare command reports divergence with exit code 1") {
    std::string spec = write_spec("t3_wb2.json", tier_spec(3, BusKind::Wishbone));
    CompareConfig cfg;
    cfg.specPath = spec;
    cfg.injectReadFault = true;
    std::ostringstream out, err;
    CHECK(cmd_compare(cfg, out, err) == 1);
    std::string s = out.str();
    CHECK(s.find("alpha: 0.111111\n") != std::string::npos);
    CHECK(s.find("  record diff: master m1 seq 2: tlm [R 0x00000000 0x11221111 OK] "
                 "rtl [R 0x00000000 0x11221110 OK]\n") != std::string::npos);
}

TEST_CASE("compare command flags races with exit code 5") {
    SystemSpec racing;
    racing.bus = BusKind::Wishbone;
    racing.arbiter = ArbiterKind::RoundRobin;
    racing.masters.push_back({"m1", 0, parse_program({"set r1 1", "write 0x0 r1"})});
    racing.masters.push_back({"m2", 0, parse_program({"set r1 2", "write 0x0 r1"})});
    racing.slaves.push_back({"s1", 0, 0x100, 2, 1});
    validate_spec(racing);
    std::string spec = write_spec("race.json", racing);

    CompareConfig cfg;
    cfg.specPath = spec;
    std::ostringstream out, err;
    CHECK(cmd_compare(cfg, out, err) == 5);
    CHECK(out.str().find("race: yes\n") != std::string::npos);
}

TEST_CASE("sweep command emits the CSV and gnuplot exports") {
    SweepConfig cfg;
    cfg.outDir = (test_dir() / "sweep_a").string();
    cfg.fromTier = 3;
    cfg.toTier = 5;
    std::ostringstream out, err;
    CHECK(cmd_sweep(cfg, out, err) == 0);
    CHECK(err.str().empty());

    std::string csv = read_file(fs::path(cfg.outDir) / "sweep.csv");
    CHECK(csv == out.str());
    auto rows = lines_of(csv);
    REQUIRE(rows.size() == 7);  // header + 3 tiers x 2 buses
    CHECK(rows[0] == sweep_csv_header());
    CHECK(rows[1].rfind("tier3,avalon,3,28,122,4.357143,0.000000,", 0) == 0);
    CHECK(rows[2].rfind("tier3,wishbone,3,28,82,2.928571,0.000000,", 0) == 0);
    CHECK(rows[3].rfind("tier4,avalon,4,", 0) == 0);
    CHECK(rows[6].rfind("tier5,wishbone,5,49,221,4.510204,0.000000,", 0) == 0);

    for (const char* name :
         {"complexity_tlm_avalon.dat", "complexity_rtl_avalon.dat", "te_avalon.dat",
          "complexity_tlm_wishbone.dat", "complexity_rtl_wishbone.dat", "te_wishbone.dat"})
        CHECK(fs::exists(fs::path(cfg.outDir) / name));

    CHECK(read_file(fs::path(cfg.outDir) / "te_avalon.dat") ==
          "3 4.357143\n4 4.523810\n5 6.183673\n");
    CHECK(read_file(fs::path(cfg.outDir) / "complexity_rtl_wishbone.dat") ==
          "3 82\n4 187\n5 221\n");
}

TEST_CASE("sweep output is reproducible apart from wall-clock columns") {
    SweepConfig a, b;
    a.outDir = (test_dir() / "sweep_b1").string();
    b.outDir = (test_dir() / "sweep_b2").string();
    std::ostringstream outA, outB, err;
    REQUIRE(cmd_sweep(a, outA, err) == 0);
    REQUIRE(cmd_sweep(b, outB, err) == 0);

    CHECK(strip_wall_column(outA.str()) == strip_wall_column(outB.str()));
    for (const char* name :
         {"complexity_tlm_avalon.dat", "complexity_rtl_avalon.dat", "te_avalon.dat",
          "complexity_tlm_wishbone.dat", "complexity_rtl_wishbone.dat", "te_wishbone.dat"})
        CHECK(read_file(fs::path(a.outDir) / name) == read_file(fs::path(b.outDir) / name));
}

TEST_CASE("sweep command rejects tier ranges outside 2..5") {
    SweepConfig cfg;
    cfg.outDir = (test_dir() / "sweep_bad").string();
    cfg.fromTier = 1;
    std::ostringstream out, err;
    CHECK(cmd_sweep(cfg, out, err) == 2);
    CHECK(err.str().find("tier range") != std::string::npos);
}

TEST_CASE("transform-report command narrates the five stages") {
    std::string spec = write_spec("t5_av.json", tier_spec(5, BusKind::Avalon));
    TransformReportConfig cfg;
    cfg.specPath = spec;
    std::ostringstream out, err;
    CHECK(cmd_transform_report(cfg, out, err) == 0);
    std::string s = out.str();
    CHECK(s.find("transformation report (avalon)\n") != std::string::npos);
    CHECK(s.find("stage 1 ports: +") != std::string::npos);
    CHECK(s.find("stage 2 processes: +") != std::string::npos);
    CHECK(s.find("stage 3 muxes: 12 (slave-side 10, bus-signal 0, read-return 2)\n") !=
          std::string::npos);
    CHECK(s.find("stage 4 arbiter: per-slave round-robin logic arbitrators\n") !=
          std::string::npos);
    CHECK(s.find("stage 5 port mappings: ") != std::string::npos);
    CHECK(s.find("  port added:      m1.address\n") != std::string::npos);
    CHECK(s.find("  port deleted:    m1.init\n") != std::string::npos);
    CHECK(s.find("result: ") != std::string::npos);

    TransformReportConfig quiet = cfg;
    quiet.listDetails = false;
    std::ostringstream out2, err2;
    CHECK(cmd_transform_report(quiet, out2, err2) == 0);
    CHECK(out2.str().find("port added:") == std::string::npos);
    CHECK(out2.str().find("stage 4 arbiter:") != std::string::npos);

    TransformReportConfig wb = cfg;
    wb.busOverride = "wishbone";
    std::ostringstream out3, err3;
    CHECK(cmd_transform_report(wb, out3, err3) == 0);
    CHECK(out3.str().find("stage 4 arbiter: shared round-robin arbiter with address decoder\n") !=
          std::string::npos);
}
