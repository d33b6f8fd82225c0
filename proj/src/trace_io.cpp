#include "assure/trace_io.hpp"

#include "assure/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace assure::cli {

namespace {

constexpr const char* kMissionHeader =
    "t,resources,agent,probability,signal,truth_x,truth_y,argmax_x,argmax_y,mean_x,mean_y";
constexpr const char* kClockHeader =
    "local_t,event,reference_T,slope_est,sigma2_est,deadline,budget";

// Shortest decimal form that parses back to the same double.
std::string format_double(double value) {
    if (std::isnan(value)) return "";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[40];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    return buf;
}

double parse_double(const std::string& field, const char* name) {
    if (field.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (field == "inf") return std::numeric_limits<double>::infinity();
    if (field == "-inf") return -std::numeric_limits<double>::infinity();
    const char* begin = field.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end != begin + field.size()) {
        throw std::runtime_error(std::string("bad ") + name + " value '" + field + "'");
    }
    return value;
}

int parse_int(const std::string& field, const char* name) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const long value = std::strtol(begin, &end, 10);
    if (field.empty() || end != begin + field.size()) {
        throw std::runtime_error(std::string("bad ") + name + " value '" + field + "'");
    }
    return static_cast<int>(value);
}

agent::CheckDecision parse_signal(const std::string& field) {
    if (field == "Continue") return agent::CheckDecision::Continue;
    if (field == "MoreData") return agent::CheckDecision::MoreData;
    if (field == "Change") return agent::CheckDecision::Change;
    throw std::runtime_error("bad signal value '" + field + "'");
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

std::string pad(const std::string& text, std::size_t width, bool right_align) {
    if (text.size() >= width) return text;
    const std::string fill(width - text.size(), ' ');
    return right_align ? fill + text : text + fill;
}

}  // namespace

std::string mission_trace_csv(const std::vector<drone::MissionRow>& rows) {
    std::ostringstream out;
    out << kMissionHeader << '\n';
    for (const auto& row : rows) {
        out << row.t << ',' << row.resources << ',' << row.agent << ','
            << format_double(row.probability) << ',' << agent::to_string(row.signal) << ','
            << format_double(row.truth.x) << ',' << format_double(row.truth.y) << ','
            << row.argmax.x << ',' << row.argmax.y << ','
            << format_double(row.mean.x) << ',' << format_double(row.mean.y) << '\n';
    }
    return out.str();
}

std::vector<drone::MissionRow> parse_mission_trace_csv(const std::string& text) {
    const auto lines = split_lines(text);
    if (lines.empty() || lines[0] != kMissionHeader) {
        throw std::runtime_error("not a mission trace: bad or missing header");
    }
    std::vector<drone::MissionRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_line(lines[i]);
        if (fields.size() != 11) {
            std::ostringstream msg;
            msg << "row " << i << ": expected 11 fields, got " << fields.size();
            throw std::runtime_error(msg.str());
        }
        drone::MissionRow row;
        row.t = parse_int(fields[0], "t");
        row.resources = parse_int(fields[1], "resources");
        row.agent = fields[2];
        row.probability = parse_double(fields[3], "probability");
        row.signal = parse_signal(fields[4]);
        row.truth.x = parse_double(fields[5], "truth_x");
        row.truth.y = parse_double(fields[6], "truth_y");
        row.argmax.x = parse_int(fields[7], "argmax_x");
        row.argmax.y = parse_int(fields[8], "argmax_y");
        row.mean.x = parse_double(fields[9], "mean_x");
        row.mean.y = parse_double(fields[10], "mean_y");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string clock_trace_csv(const std::vector<clock::SyncRow>& rows) {
    std::ostringstream out;
    out << kClockHeader << '\n';
    for (const auto& row : rows) {
        out << format_double(row.local_t) << ',' << clock::to_string(row.event) << ','
            << format_double(row.reference_T) << ',' << format_double(row.slope_est) << ','
            << format_double(row.sigma2_est) << ',' << format_double(row.deadline) << ','
            << row.budget << '\n';
    }
    return out.str();
}

std::string render_decision_table(const std::vector<drone::MissionRow>& rows) {
    if (rows.empty()) {
        throw std::runtime_error("cannot render an empty trace");
    }
    const std::vector<std::string> headers = {"Time", "Resources", "Probability", "CV Agent",
                                              "Signal"};
    // Right-align the numeric columns, left-align the names.
    const std::vector<bool> right = {true, true, true, false, false};
    std::vector<std::vector<std::string>> cells;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        std::string time;
        // An escalated check produces extra rows at the same step; they share
        // the step's time value instead of repeating it.
        if (i == 0 || rows[i - 1].t != row.t) {
            time = std::to_string(row.t);
        }
        std::string prob = "-";
        if (!std::isnan(row.probability)) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.1f%%", row.probability * 100.0);
            prob = buf;
        }
        cells.push_back({time, std::to_string(row.resources), prob, row.agent,
                         agent::to_string(row.signal)});
    }
    std::vector<std::size_t> widths;
    for (std::size_t c = 0; c < headers.size(); ++c) {
        std::size_t w = headers[c].size();
        for (const auto& line : cells) w = std::max(w, line[c].size());
        widths.push_back(w);
    }
    std::ostringstream out;
    for (std::size_t c = 0; c < headers.size(); ++c) {
        if (c > 0) out << " | ";
        out << pad(headers[c], widths[c], false);
    }
    out << '\n';
    for (std::size_t c = 0; c < headers.size(); ++c) {
        if (c > 0) out << "-+-";
        out << std::string(widths[c], '-');
    }
    out << '\n';
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < headers.size(); ++c) {
            if (c > 0) out << " | ";
            out << pad(line[c], widths[c], right[c]);
        }
        out << '\n';
    }
    return out.str();
}

drone::StepSink heatmap_sink(const std::string& out_dir) {
    return [out_dir](int t, const grid::GridDistribution& belief,
                     const grid::TrajectoryForecast& fc) {
        grid::write_pgm(belief, out_dir + "/belief_t" + std::to_string(t) + ".pgm");
        for (int n = 0; n < fc.horizon(); ++n) {
            grid::write_pgm(fc.steps[static_cast<std::size_t>(n)],
                            out_dir + "/forecast_t" + std::to_string(t) + "_n" +
                                std::to_string(n) + ".pgm");
        }
    };
}

}  // namespace assure::cli
