#pragma once

#include <cstdint>
#include <string>

namespace assure::cli {

enum class Scenario { Drone, Clock };

struct RunSpec {
    Scenario scenario = Scenario::Drone;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool emit_heatmaps = false;
};

// Executes one scenario end to end: loads the config, runs the simulation,
// and writes trace.csv plus summary.txt into out_dir. Returns the process
// exit code: 0 on success, 2 when the run ends in an assurance abort or
// alert, 1 on a config or I/O error (diagnostic goes to stderr).
int run(const RunSpec& spec);

}  // namespace assure::cli
