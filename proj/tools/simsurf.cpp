#include "simsurf/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"simsurf: straightening Beltrami fields with glued polygons"};
    app.require_subcommand(1);
    std::string scenarioPath;
    simsurf::RunOptions opt;

    const char* names[] = {"discretize", "glue", "solve", "eval", "trace", "transport", "limits", "render", "verify"};
    const char* help[] = {"average the field over the grid",
                          "build the glued complex and its vertex cycles",
                          "solve the parameter problem",
                          "evaluate the straightening map at probe points",
                          "trace geodesics of the solved symbol",
                          "transport integrals along paths",
                          "limit tables: atoms, lambda expansion, transport limit",
                          "write the skeleton SVG",
                          "run the invariant battery"};
    for (int k = 0; k < 9; ++k) {
        auto* sub = app.add_subcommand(names[k], help[k]);
        sub->add_option("--scenario", scenarioPath, "scenario JSON")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.outDir, "output directory");
        sub->add_option("--threads", opt.threads, "worker threads (the pipeline is sequential)")
            ->check(CLI::PositiveNumber);
        sub->add_flag("--verbose", opt.verbose, "stage log on stderr");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : simsurf::kExitInput;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    simsurf::Scenario sc;
    try {
        sc = simsurf::load_scenario(scenarioPath);
    } catch (const simsurf::Error& e) {
        std::cerr << "simsurf: " << e.what() << "\n";
        return simsurf::kExitInput;
    }
    try {
        simsurf::RunReport rep = simsurf::run_command(cmd, sc, opt);
        for (const auto& e : rep.errors) std::cerr << "simsurf " << cmd << ": " << e << "\n";
        for (const auto& c : rep.checks)
            if (!c.passed) std::cerr << "simsurf " << cmd << ": check failed: " << c.name << "\n";
        if (opt.verbose)
            for (const auto& [stage, sec] : rep.timings) std::cerr << "  " << stage << " " << sec << " s\n";
        return simsurf::exit_code(rep);
    } catch (const simsurf::Error& e) {
        std::cerr << "simsurf " << cmd << ": " << e.what() << "\n";
        return e.code() == simsurf::ErrorCode::Io ? simsurf::kExitStage : simsurf::kExitInput;
    }
}
