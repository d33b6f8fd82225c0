#include "assure/scenario_config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace assure::cli {

using nlohmann::json;

namespace {

const json& require(const json& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end()) {
        throw ConfigError(std::string("missing field '") + key + "'");
    }
    return *it;
}

double get_double(const json& doc, const char* key) {
    const json& v = require(doc, key);
    if (!v.is_number()) {
        throw ConfigError(std::string("field '") + key + "': expected a number");
    }
    return v.get<double>();
}

int get_int(const json& doc, const char* key) {
    const json& v = require(doc, key);
    if (!v.is_number_integer()) {
        throw ConfigError(std::string("field '") + key + "': expected an integer");
    }
    return v.get<int>();
}

grid::Cell get_cell(const json& doc, const char* key) {
    const json& v = require(doc, key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
        !v[1].is_number_integer()) {
        throw ConfigError(std::string("field '") + key + "': expected [x, y] integers");
    }
    return {v[0].get<int>(), v[1].get<int>()};
}

void check_schema(const json& doc, const char* expected) {
    const json& v = require(doc, "schema");
    if (!v.is_string() || v.get<std::string>() != expected) {
        throw ConfigError(std::string("field 'schema': expected \"") + expected + "\"");
    }
}

json parse_document(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(e.what());  // carries byte offset and context
    }
}

json mask_rows(const grid::CellMask& mask) {
    json rows = json::array();
    for (int y = 0; y < mask.height(); ++y) {
        std::string row(static_cast<std::size_t>(mask.width()), '.');
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y)) row[static_cast<std::size_t>(x)] = '#';
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

grid::CellMask parse_mask(const json& rows, int width, int height) {
    if (!rows.is_array()) {
        throw ConfigError("field 'cloud_mask': expected an array of row strings");
    }
    if (rows.empty()) return {};
    if (static_cast<int>(rows.size()) != height) {
        std::ostringstream msg;
        msg << "field 'cloud_mask': expected " << height << " rows, got " << rows.size();
        throw ConfigError(msg.str());
    }
    grid::CellMask mask(width, height, false);
    for (int y = 0; y < height; ++y) {
        if (!rows[y].is_string()) {
            std::ostringstream msg;
            msg << "cloud_mask row " << y << ": expected a string";
            throw ConfigError(msg.str());
        }
        const auto row = rows[y].get<std::string>();
        if (static_cast<int>(row.size()) != width) {
            std::ostringstream msg;
            msg << "cloud_mask row " << y << ": expected " << width << " columns, got "
                << row.size();
            throw ConfigError(msg.str());
        }
        for (int x = 0; x < width; ++x) {
            const char c = row[static_cast<std::size_t>(x)];
            if (c != '.' && c != '#') {
                std::ostringstream msg;
                msg << "cloud_mask row " << y << ": invalid character '" << c << "'";
                throw ConfigError(msg.str());
            }
            mask.set(x, y, c == '#');
        }
    }
    return mask;
}

}  // namespace

std::string load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string serialize_config(const drone::WorldConfig& config) {
    json doc;
    doc["schema"] = kDroneSchema;
    doc["width"] = config.width;
    doc["height"] = config.height;
    doc["start"] = {config.start.x, config.start.y};
    doc["target"] = {config.target.x, config.target.y};
    doc["nofly_margin"] = config.nofly_margin;
    doc["cloud_mask"] = mask_rows(config.cloud_mask);
    doc["horizon"] = config.horizon;
    doc["threshold"] = config.threshold;
    doc["p_gps"] = config.p_gps;
    doc["diffusion_leak"] = config.diffusion.leak;
    doc["perturbation_scale"] = config.perturbation_scale;
    doc["resource_budget"] = config.resource_budget;
    doc["resource_threshold"] = config.resource_threshold;
    doc["gps_cost"] = config.gps_cost;
    return doc.dump(2) + "\n";
}

drone::WorldConfig parse_drone_config(const std::string& text) {
    const json doc = parse_document(text);
    if (!doc.is_object()) throw ConfigError("expected a JSON object");
    check_schema(doc, kDroneSchema);
    drone::WorldConfig config;
    config.width = get_int(doc, "width");
    config.height = get_int(doc, "height");
    config.start = get_cell(doc, "start");
    config.target = get_cell(doc, "target");
    config.nofly_margin = get_double(doc, "nofly_margin");
    config.cloud_mask = parse_mask(require(doc, "cloud_mask"), config.width, config.height);
    config.horizon = get_int(doc, "horizon");
    config.threshold = get_double(doc, "threshold");
    config.p_gps = get_double(doc, "p_gps");
    config.diffusion.leak = get_double(doc, "diffusion_leak");
    config.perturbation_scale = get_double(doc, "perturbation_scale");
    config.resource_budget = get_int(doc, "resource_budget");
    config.resource_threshold = get_int(doc, "resource_threshold");
    config.gps_cost = get_int(doc, "gps_cost");
    return config;
}

std::string serialize_config(const clock::ClockMonitorConfig& config) {
    json doc;
    doc["schema"] = kClockSchema;
    doc["true_mu"] = config.true_params.mu;
    doc["true_sigma2"] = config.true_params.sigma2;
    doc["limit"] = config.assurance.limit;
    doc["p_max"] = config.assurance.p_max;
    doc["sync_cost"] = config.assurance.sync_cost;
    doc["budget"] = config.assurance.budget;
    doc["duration"] = config.duration;
    doc["window_capacity"] = config.window_capacity;
    doc["tick_seconds"] = config.tick_seconds;
    doc["warmup_gap"] = config.warmup_gap;
    doc["variance_scaling"] =
        config.scaling == clock::VarianceScaling::MeanScaled ? "mean_scaled" : "unscaled_sum";
    return doc.dump(2) + "\n";
}

clock::ClockMonitorConfig parse_clock_config(const std::string& text) {
    const json doc = parse_document(text);
    if (!doc.is_object()) throw ConfigError("expected a JSON object");
    check_schema(doc, kClockSchema);
    clock::ClockMonitorConfig config;
    config.true_params.mu = get_double(doc, "true_mu");
    config.true_params.sigma2 = get_double(doc, "true_sigma2");
    config.assurance.limit = get_double(doc, "limit");
    config.assurance.p_max = get_double(doc, "p_max");
    config.assurance.sync_cost = get_int(doc, "sync_cost");
    config.assurance.budget = get_int(doc, "budget");
    config.duration = get_double(doc, "duration");
    config.window_capacity = get_int(doc, "window_capacity");
    config.tick_seconds = get_double(doc, "tick_seconds");
    config.warmup_gap = get_double(doc, "warmup_gap");
    const json& scaling = require(doc, "variance_scaling");
    if (scaling == "mean_scaled") {
        config.scaling = clock::VarianceScaling::MeanScaled;
    } else if (scaling == "unscaled_sum") {
        config.scaling = clock::VarianceScaling::UnscaledSum;
    } else {
        throw ConfigError("field 'variance_scaling': expected \"mean_scaled\" or "
                          "\"unscaled_sum\"");
    }
    return config;
}

}  // namespace assure::cli
