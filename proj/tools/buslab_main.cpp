// Command-line driver: run / compare / sweep / transform-report.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <buslab/buslab.hpp>

int main(int argc, char** argv) {
    CLI::App app{"dual-abstraction bus system simulator"};
    app.require_subcommand(1);

    const std::vector<std::string> busNames = {"avalon", "wishbone"};
    const std::vector<std::string> modelNames = {"tlm", "rtl"};

    buslab::RunConfig runCfg;
    CLI::App* run = app.add_subcommand("run", "simulate a spec at one abstraction level");
    run->add_option("spec", runCfg.specPath, "spec file (json)")->required();
    run->add_option("--model", runCfg.model, "abstraction level")
        ->check(CLI::IsMember(modelNames))
        ->capture_default_str();
    run->add_option("--bus", runCfg.busOverride, "override the spec's bus protocol")
        ->check(CLI::IsMember(busNames));
    run->add_option("--max-transactions", runCfg.maxTransactions, "transaction budget (tlm)")
        ->capture_default_str();
    run->add_option("--max-cycles", runCfg.maxCycles, "cycle budget (rtl)")->capture_default_str();
    run->add_option("--trace", runCfg.tracePath, "write the observation trace as csv");
    run->add_option("--state", runCfg.statePath, "write the final memory state");
    run->add_option("--stats", runCfg.statsPath, "write run statistics as json");
    run->add_flag("--dump-signals", runCfg.dumpSignals, "print signal changes (rtl)");
    run->add_option("--signal-dump", runCfg.signalDumpPath, "write signal changes to a file (rtl)");
    run->add_flag("--inject-read-fault", runCfg.injectReadFault)->group("");  // hidden

    buslab::CompareConfig cmpCfg;
    CLI::App* cmp = app.add_subcommand("compare", "run both levels and report divergence");
    cmp->add_option("spec", cmpCfg.specPath, "spec file (json)")->required();
    cmp->add_option("--bus", cmpCfg.busOverride, "override the spec's bus protocol")
        ->check(CLI::IsMember(busNames));
    cmp->add_option("--max-transactions", cmpCfg.maxTransactions, "transaction budget (tlm)")
        ->capture_default_str();
    cmp->add_option("--max-cycles", cmpCfg.maxCycles, "cycle budget (rtl)")->capture_default_str();
    cmp->add_flag("--inject-read-fault", cmpCfg.injectReadFault)->group("");  // hidden

    buslab::SweepConfig sweepCfg;
    CLI::App* sweep = app.add_subcommand("sweep", "compare canonical tiers and emit csv + plots");
    sweep->add_option("--out", sweepCfg.outDir, "output directory")->capture_default_str();
    sweep->add_option("--from", sweepCfg.fromTier, "first tier")->capture_default_str();
    sweep->add_option("--to", sweepCfg.toTier, "last tier")->capture_default_str();
    sweep->add_option("--max-transactions", sweepCfg.maxTransactions, "transaction budget (tlm)")
        ->capture_default_str();
    sweep->add_option("--max-cycles", sweepCfg.maxCycles, "cycle budget (rtl)")
        ->capture_default_str();

    buslab::TransformReportConfig trCfg;
    CLI::App* tr = app.add_subcommand("transform-report",
                                      "show the five-stage netlist transformation report");
    tr->add_option("spec", trCfg.specPath, "spec file (json)")->required();
    tr->add_option("--bus", trCfg.busOverride, "override the spec's bus protocol")
        ->check(CLI::IsMember(busNames));
    tr->add_flag("!--no-details", trCfg.listDetails, "suppress per-port/process listings");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return buslab::cmd_run(runCfg, std::cout, std::cerr);
    if (cmp->parsed()) return buslab::cmd_compare(cmpCfg, std::cout, std::cerr);
    if (sweep->parsed()) return buslab::cmd_sweep(sweepCfg, std::cout, std::cerr);
    return buslab::cmd_transform_report(trCfg, std::cout, std::cerr);
}
