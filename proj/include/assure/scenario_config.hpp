#pragma once

#include "assure/clocksync.hpp"
#include "assure/drone_sim.hpp"

#include <stdexcept>
#include <string>

namespace assure::cli {

// Schema tags embedded in every config document; parsing rejects others.
inline constexpr const char* kDroneSchema = "assure/drone-config/1";
inline constexpr const char* kClockSchema = "assure/clock-config/1";

// Malformed or missing configuration; what() carries a field or parse-site
// diagnostic suitable for the command line.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reads a whole file; ConfigError when it cannot be opened.
std::string load_file(const std::string& path);

// JSON round trip for the drone scenario. The cloud mask serializes as one
// string per row, '#' clouded and '.' clear; an empty array means clear
// skies. parse(serialize(config)) reproduces the config exactly.
std::string serialize_config(const drone::WorldConfig& config);
drone::WorldConfig parse_drone_config(const std::string& text);

// JSON round trip for the clock-monitor scenario.
std::string serialize_config(const clock::ClockMonitorConfig& config);
clock::ClockMonitorConfig parse_clock_config(const std::string& text);

}  // namespace assure::cli
