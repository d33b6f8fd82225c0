#include "assure/run.hpp"

#include "assure/clocksync.hpp"
#include "assure/drone_sim.hpp"
#include "assure/scenario_config.hpp"
#include "assure/trace_io.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace assure::cli {

namespace {

enum class LogLevel { Off = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
    const char* raw = std::getenv("ASSURE_LOG");
    if (raw == nullptr) return LogLevel::Off;
    const std::string value(raw);
    if (value == "info") return LogLevel::Info;
    if (value == "debug") return LogLevel::Debug;
    return LogLevel::Off;
}

void log(LogLevel level, LogLevel threshold, const std::string& message) {
    if (level >= threshold) {
        std::clog << "[assure] " << message << '\n';
    }
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
}

int run_drone(const RunSpec& spec, const std::string& config_text, LogLevel verbosity) {
    const drone::WorldConfig config = parse_drone_config(config_text);
    const std::filesystem::path out_dir(spec.out_dir);
    drone::StepSink sink;
    if (spec.emit_heatmaps) {
        sink = heatmap_sink(out_dir.string());
    }
    const drone::MissionTrace trace = drone::run_mission(config, spec.seed, sink);
    log(verbosity, LogLevel::Info,
        "drone mission finished: " + std::to_string(trace.rows.size()) + " trace rows");
    write_text(out_dir / "trace.csv", mission_trace_csv(trace.rows));

    std::ostringstream summary;
    if (!trace.rows.empty()) {
        summary << render_decision_table(trace.rows) << '\n';
    }
    if (trace.aborted) {
        summary << "Mission aborted: belief vanished, no consistent location remains.\n";
    } else if (trace.reached_target) {
        summary << "Mission complete: target reached with "
                << trace.rows.back().resources << " resource units left.\n";
    } else {
        summary << "Mission ended without reaching the target.\n";
    }
    write_text(out_dir / "summary.txt", summary.str());
    return trace.aborted ? 2 : 0;
}

int run_clock(const RunSpec& spec, const std::string& config_text, LogLevel verbosity) {
    const clock::ClockMonitorConfig config = parse_clock_config(config_text);
    const std::filesystem::path out_dir(spec.out_dir);
    const clock::ClockMonitorResult result = clock::run_clock_monitor(config, spec.seed);
    log(verbosity, LogLevel::Info,
        "clock monitor finished: " + std::to_string(result.rows.size()) + " trace rows");
    write_text(out_dir / "trace.csv", clock_trace_csv(result.rows));

    int syncs = 0;
    int estimates = 0;
    const clock::SyncRow* last_estimate = nullptr;
    for (const auto& row : result.rows) {
        if (row.event == clock::SyncEventKind::Sync) ++syncs;
        if (row.event == clock::SyncEventKind::Estimate) {
            ++estimates;
            last_estimate = &row;
        }
    }
    std::ostringstream summary;
    summary << "Clock monitor over " << result.rows.size() << " events: " << syncs
            << " syncs, " << estimates << " estimates.\n";
    if (last_estimate != nullptr && !std::isnan(last_estimate->slope_est)) {
        summary << "Final estimate: slope " << last_estimate->slope_est << ", sigma2 "
                << last_estimate->sigma2_est << ".\n";
    }
    if (result.alerted) {
        summary << "Alert: the sync budget ran out before the deadline could be met.\n";
    } else {
        summary << "Deviation bound held for the whole run.\n";
    }
    write_text(out_dir / "summary.txt", summary.str());
    return result.alerted ? 2 : 0;
}

}  // namespace

int run(const RunSpec& spec) {
    const LogLevel verbosity = log_level();
    try {
        log(verbosity, LogLevel::Debug, "loading config '" + spec.config_path + "'");
        const std::string config_text = load_file(spec.config_path);
        std::filesystem::create_directories(spec.out_dir);
        if (spec.scenario == Scenario::Drone) {
            return run_drone(spec, config_text, verbosity);
        }
        return run_clock(spec, config_text, verbosity);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace assure::cli
