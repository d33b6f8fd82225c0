#pragma once

#include "assure/clocksync.hpp"
#include "assure/drone_sim.hpp"

#include <string>
#include <vector>

namespace assure::cli {

// CSV writers for the two scenario traces. Numbers are written with enough
// digits to round-trip exactly; NaN becomes an empty cell, infinities become
// "inf" / "-inf".
std::string mission_trace_csv(const std::vector<drone::MissionRow>& rows);
std::string clock_trace_csv(const std::vector<clock::SyncRow>& rows);

// Inverse of mission_trace_csv; throws std::runtime_error on a malformed
// header, row shape, or unparseable field.
std::vector<drone::MissionRow> parse_mission_trace_csv(const std::string& text);

// Human-readable table of the check-violation decisions in a mission trace.
// An escalated step shows as two rows sharing one time value. Throws
// std::runtime_error on an empty trace.
std::string render_decision_table(const std::vector<drone::MissionRow>& rows);

// Step observer that dumps each belief and forecast frame as a PGM image
// under out_dir (belief_t<T>.pgm, forecast_t<T>_n<N>.pgm).
drone::StepSink heatmap_sink(const std::string& out_dir);

}  // namespace assure::cli
