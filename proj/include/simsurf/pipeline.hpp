#pragma once

#include "simsurf/fields.hpp"
#include "simsurf/io.hpp"
#include "simsurf/uniformize.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace simsurf {

struct Scenario {
    io::json raw;
    io::json field;             // {"kind": ..., parameters}
    std::string kind;
    GridSpec grid{2.0, 8, 0.0};
    SolverOptions solver;
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    std::string baseDir;        // relative field paths resolve here

    bool wants(const std::string& output) const;
    bool gridBased() const { return kind != "triangle"; }
    BeltramiField makeField() const;
    std::string fingerprint() const;  // canonical dump of the scenario
};

Scenario parse_scenario(const io::json& j, const std::string& baseDir = "");
Scenario load_scenario(const std::string& path);

struct RunOptions {
    std::string outDir = "out";
    bool verbose = false;
    int threads = 1;
};

struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
};

struct RunReport {
    std::string command;
    io::json scenario;
    std::vector<std::pair<std::string, double>> timings;  // seconds per stage
    std::vector<double> residualHistory;
    std::vector<Check> checks;
    std::vector<std::string> manifest;
    std::vector<std::string> errors;
    bool badInput = false;

    bool allPassed() const;
    // timings are kept out so that identical runs give identical bytes
    io::json to_json() const;
};

enum ExitCode : int { kExitOk = 0, kExitInvariant = 1, kExitInput = 2, kExitStage = 3 };
int exit_code(const RunReport& r);

RunReport cmd_discretize(const Scenario& sc, const RunOptions& opt);
RunReport cmd_glue(const Scenario& sc, const RunOptions& opt);
RunReport cmd_solve(const Scenario& sc, const RunOptions& opt);
RunReport cmd_eval(const Scenario& sc, const RunOptions& opt);
RunReport cmd_trace(const Scenario& sc, const RunOptions& opt);
RunReport cmd_transport(const Scenario& sc, const RunOptions& opt);
RunReport cmd_limits(const Scenario& sc, const RunOptions& opt);
RunReport cmd_render(const Scenario& sc, const RunOptions& opt);
RunReport cmd_verify(const Scenario& sc, const RunOptions& opt);

RunReport run_command(const std::string& name, const Scenario& sc, const RunOptions& opt);

}  // namespace simsurf
