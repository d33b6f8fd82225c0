#include "assure/run.hpp"
#include "assure/scenario_config.hpp"
#include "assure/trace_io.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Assurance-monitor scenario runner"};
    app.require_subcommand(1);

    std::string scenario = "drone";
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool heatmaps = false;

    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its trace");
    run_cmd->add_option("--scenario", scenario, "Scenario to run")
        ->required()
        ->check(CLI::IsMember({"drone", "clock"}));
    run_cmd->add_option("--config", config_path, "Path to a JSON scenario config")->required();
    run_cmd->add_option("--seed", seed, "Random seed for the run");
    run_cmd->add_option("--out", out_dir, "Directory for trace.csv and summary.txt")->required();
    run_cmd->add_flag("--heatmaps", heatmaps, "Also write belief/forecast PGM heatmaps");

    std::string trace_path;
    auto* table_cmd = app.add_subcommand("table", "Render a mission trace as a decision table");
    table_cmd->add_option("--trace", trace_path, "Path to a mission trace.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Usage problems share the config-error exit code; --help stays 0.
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (run_cmd->parsed()) {
        assure::cli::RunSpec spec;
        spec.scenario =
            scenario == "drone" ? assure::cli::Scenario::Drone : assure::cli::Scenario::Clock;
        spec.config_path = config_path;
        spec.seed = seed;
        spec.out_dir = out_dir;
        spec.emit_heatmaps = heatmaps;
        return assure::cli::run(spec);
    }

    try {
        const auto rows = assure::cli::parse_mission_trace_csv(assure::cli::load_file(trace_path));
        std::cout << assure::cli::render_decision_table(rows);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
