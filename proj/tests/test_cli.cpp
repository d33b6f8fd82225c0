#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "assure/run.hpp"
#include "assure/scenario_config.hpp"
#include "assure/trace_io.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

using namespace assure;
using cli::ConfigError;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("assure_cli_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string read_file(const std::filesystem::path& path) {
    return cli::load_file(path.string());
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

drone::WorldConfig odd_drone_config() {
    drone::WorldConfig cfg;
    cfg.width = 9;
    cfg.height = 7;
    cfg.start = {1, 3};
    cfg.target = {8, 5};
    cfg.nofly_margin = 1.25;
    cfg.cloud_mask = grid::CellMask(9, 7, false);
    cfg.cloud_mask.set(2, 2, true);
    cfg.cloud_mask.set(8, 6, true);
    cfg.horizon = 3;
    cfg.threshold = 0.125;
    cfg.p_gps = 0.5;
    cfg.diffusion.leak = 0.0625;
    cfg.perturbation_scale = 0.75;
    cfg.resource_budget = 5;
    cfg.resource_threshold = 2;
    cfg.gps_cost = 2;
    return cfg;
}

drone::WorldConfig shipped_drone_config() {
    return cli::parse_drone_config(
        read_file(std::filesystem::path(ASSURE_CONFIG_DIR) / "drone_default.json"));
}

clock::ClockMonitorConfig shipped_clock_config() {
    return cli::parse_clock_config(
        read_file(std::filesystem::path(ASSURE_CONFIG_DIR) / "clock_default.json"));
}

}  // namespace

TEST_CASE("drone config round trips through JSON") {
    const auto cfg = odd_drone_config();
    const auto back = cli::parse_drone_config(cli::serialize_config(cfg));
    CHECK(back == cfg);

    drone::WorldConfig clear = cfg;
    clear.cloud_mask = {};
    const std::string text = cli::serialize_config(clear);
    CHECK(cli::parse_drone_config(text) == clear);
    // an empty mask serializes as an empty array, not a grid of dots
    CHECK(text.find("\"cloud_mask\": []") != std::string::npos);
}

TEST_CASE("clock config round trips through JSON") {
    clock::ClockMonitorConfig cfg;
    cfg.true_params = {-0.03, 0.7};
    cfg.assurance = {2.5, 0.01, 3, 17};
    cfg.duration = 123.0;
    cfg.window_capacity = 9;
    cfg.tick_seconds = 0.125;
    cfg.warmup_gap = 2.5;
    for (auto scaling : {clock::VarianceScaling::MeanScaled, clock::VarianceScaling::UnscaledSum}) {
        cfg.scaling = scaling;
        CHECK(cli::parse_clock_config(cli::serialize_config(cfg)) == cfg);
    }
}

TEST_CASE("shipped fixtures parse and reserialize to the same document") {
    for (const char* name : {"drone_default.json", "clock_default.json"}) {
        const auto path = std::filesystem::path(ASSURE_CONFIG_DIR) / name;
        const std::string text = read_file(path);
        std::string again;
        if (std::string(name).find("drone") != std::string::npos) {
            const auto cfg = cli::parse_drone_config(text);
            CHECK(cli::parse_drone_config(cli::serialize_config(cfg)) == cfg);
            again = cli::serialize_config(cfg);
        } else {
            const auto cfg = cli::parse_clock_config(text);
            CHECK(cli::parse_clock_config(cli::serialize_config(cfg)) == cfg);
            again = cli::serialize_config(cfg);
        }
        CHECK(again == text);
    }
}

TEST_CASE("config diagnostics name the offending field") {
    const std::string good = cli::serialize_config(odd_drone_config());

    auto expect_error = [](const std::string& text, const std::string& needle) {
        try {
            cli::parse_drone_config(text);
            FAIL_CHECK("expected ConfigError mentioning '" << needle << "'");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };

    expect_error("{ not json", "parse error");
    expect_error("[1, 2]", "object");
    expect_error("{\"schema\": \"other/1\"}", "schema");

    auto drop_field = [&](const std::string& key) {
        std::string text = good;
        const auto pos = text.find("\"" + key + "\"");
        REQUIRE(pos != std::string::npos);
        const auto end = text.find('\n', pos);
        text.erase(pos, end - pos + 1);
        return text;
    };
    expect_error(drop_field("threshold"), "missing field 'threshold'");
    expect_error(drop_field("gps_cost"), "missing field 'gps_cost'");

    std::string wrong_type = good;
    wrong_type.replace(wrong_type.find("\"p_gps\": 0.5"), 12, "\"p_gps\": \"hi\"");
    expect_error(wrong_type, "field 'p_gps'");

    std::string bad_cell = good;
    bad_cell.replace(bad_cell.find("\"start\": ["), 10, "\"start\": [true, ");
    expect_error(bad_cell, "field 'start'");

    // cloud mask shape and alphabet errors
    auto cfg = odd_drone_config();
    std::string text = cli::serialize_config(cfg);
    const auto row_pos = text.find("\".........\"");
    REQUIRE(row_pos != std::string::npos);
    std::string short_row = text;
    short_row.replace(row_pos, 11, "\"....\"");
    expect_error(short_row, "columns");
    std::string bad_char = text;
    bad_char.replace(row_pos, 11, "\"....X....\"");
    expect_error(bad_char, "invalid character");
    std::string dropped_row = text;
    dropped_row.erase(row_pos, text.find('\n', row_pos) - row_pos + 1);
    expect_error(dropped_row, "rows");

    try {
        cli::parse_clock_config(
            "{\"schema\": \"assure/clock-config/1\", \"true_mu\": 0.0}");
        FAIL_CHECK("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("missing field") != std::string::npos);
    }
}

TEST_CASE("load_file rejects unreadable paths") {
    CHECK_THROWS_AS((void)cli::load_file("/definitely/not/there.json"), ConfigError);
}

TEST_CASE("mission trace CSV format is exact and parses back") {
    std::vector<drone::MissionRow> rows(2);
    rows[0] = {3, 14, drone::kCapsuleAgent, 0.25, agent::CheckDecision::MoreData,
               {1.5, 2.0}, {1, 2}, {1.25, 2.25}};
    rows[1] = {3, 13, drone::kAbortAgent, kNaN, agent::CheckDecision::Change,
               {1.0 / 3.0, -0.5}, {-1, -1}, {kNaN, kNaN}};
    const std::string csv = cli::mission_trace_csv(rows);
    CHECK(csv ==
          "t,resources,agent,probability,signal,truth_x,truth_y,argmax_x,argmax_y,mean_x,mean_y\n"
          "3,14,CaPSuLe,0.25,MoreData,1.5,2,1,2,1.25,2.25\n"
          "3,13,abort,,Change,0.3333333333333333,-0.5,-1,-1,,\n");
    // the shortest form still parses back to the identical doubles
    const auto back = cli::parse_mission_trace_csv(csv);
    REQUIRE(back.size() == rows.size());
    CHECK(back[0] == rows[0]);
    CHECK(back[1] == rows[1]);
}

TEST_CASE("mission trace CSV parser rejects malformed input") {
    CHECK_THROWS_AS((void)cli::parse_mission_trace_csv(""), std::runtime_error);
    CHECK_THROWS_AS((void)cli::parse_mission_trace_csv("a,b,c\n1,2,3\n"), std::runtime_error);
    const std::string header =
        "t,resources,agent,probability,signal,truth_x,truth_y,argmax_x,argmax_y,mean_x,mean_y\n";
    CHECK_THROWS_AS((void)cli::parse_mission_trace_csv(header + "1,2,GPS\n"),
                    std::runtime_error);
    CHECK_THROWS_AS(
        (void)cli::parse_mission_trace_csv(header + "1,2,GPS,0.5,Maybe,0,0,0,0,0,0\n"),
        std::runtime_error);
    CHECK_THROWS_AS(
        (void)cli::parse_mission_trace_csv(header + "x,2,GPS,0.5,Change,0,0,0,0,0,0\n"),
        std::runtime_error);
    CHECK_THROWS_AS(
        (void)cli::parse_mission_trace_csv(header + "1,2,GPS,zz,Change,0,0,0,0,0,0\n"),
        std::runtime_error);
}

TEST_CASE("clock trace CSV format is exact") {
    std::vector<clock::SyncRow> rows(2);
    rows[0] = {5.5, clock::SyncEventKind::Warmup, 5.0, kNaN, kNaN, kNaN, 9};
    rows[1] = {5.5, clock::SyncEventKind::Estimate, kNaN, 0.5, 0.0, kInf, 9};
    CHECK(cli::clock_trace_csv(rows) ==
          "local_t,event,reference_T,slope_est,sigma2_est,deadline,budget\n"
          "5.5,warmup,5,,,,9\n"
          "5.5,estimate,,0.5,0,inf,9\n");
}

TEST_CASE("decision table shares the time cell across an escalated step") {
    std::vector<drone::MissionRow> rows(3);
    rows[0] = {7, 14, drone::kCapsuleAgent, 0.012, agent::CheckDecision::Continue,
               {1.0, 2.0}, {1, 2}, {1.0, 2.0}};
    rows[1] = {8, 14, drone::kCapsuleAgent, 0.073, agent::CheckDecision::MoreData,
               {2.0, 2.0}, {2, 2}, {2.0, 2.0}};
    rows[2] = {8, 13, drone::kGpsAgent, 0.106, agent::CheckDecision::Change,
               {2.0, 2.0}, {2, 2}, {2.0, 2.0}};
    const std::string table = cli::render_decision_table(rows);

    CHECK(table.find("Time | Resources | Probability | CV Agent | Signal") != std::string::npos);
    CHECK(table.find("1.2%") != std::string::npos);
    CHECK(table.find("7.3%") != std::string::npos);
    CHECK(table.find("10.6%") != std::string::npos);
    // exactly one cell prints "8": the GPS row shares the step's time
    std::size_t eights = 0;
    for (std::size_t pos = table.find(" 8 |"); pos != std::string::npos;
         pos = table.find(" 8 |", pos + 1)) {
        ++eights;
    }
    CHECK(eights == 1);

    std::vector<drone::MissionRow> with_abort = rows;
    with_abort.push_back({8, 13, drone::kAbortAgent, kNaN, agent::CheckDecision::Change,
                          {2.0, 2.0}, {-1, -1}, {kNaN, kNaN}});
    const std::string aborted = cli::render_decision_table(with_abort);
    CHECK(aborted.find("abort") != std::string::npos);
    CHECK(aborted.find(" - ") != std::string::npos);  // NaN probability renders as a dash

    CHECK_THROWS_AS((void)cli::render_decision_table({}), std::runtime_error);
}

TEST_CASE("run reports success and writes both output files") {
    const auto dir = fresh_dir("run_ok");
    cli::RunSpec spec;
    spec.scenario = cli::Scenario::Drone;
    spec.config_path = (std::filesystem::path(ASSURE_CONFIG_DIR) / "drone_default.json").string();
    spec.seed = 69;
    spec.out_dir = (dir / "out").string();
    REQUIRE(cli::run(spec) == 0);

    const std::string csv = read_file(dir / "out" / "trace.csv");
    const auto rows = cli::parse_mission_trace_csv(csv);
    CHECK(rows.size() > 10);
    const std::string summary = read_file(dir / "out" / "summary.txt");
    CHECK(summary.find("CV Agent") != std::string::npos);
    CHECK(summary.find("target reached") != std::string::npos);
}

TEST_CASE("run exit codes partition config errors and aborted runs") {
    const auto dir = fresh_dir("run_codes");

    cli::RunSpec missing;
    missing.scenario = cli::Scenario::Drone;
    missing.config_path = (dir / "absent.json").string();
    missing.out_dir = (dir / "o1").string();
    CHECK(cli::run(missing) == 1);

    write_file(dir / "broken.json", "{\"schema\": \"assure/drone-config/1\"");
    cli::RunSpec broken = missing;
    broken.config_path = (dir / "broken.json").string();
    broken.out_dir = (dir / "o2").string();
    CHECK(cli::run(broken) == 1);

    // belief starved of consistent evidence: tight corridor plus violent wind
    drone::WorldConfig abort_cfg;
    abort_cfg.nofly_margin = 0.9;
    abort_cfg.diffusion.leak = 0.10;
    abort_cfg.perturbation_scale = 4.0;
    abort_cfg.resource_budget = 30;
    write_file(dir / "abort.json", cli::serialize_config(abort_cfg));
    cli::RunSpec aborting;
    aborting.scenario = cli::Scenario::Drone;
    aborting.config_path = (dir / "abort.json").string();
    aborting.seed = 1;
    aborting.out_dir = (dir / "o3").string();
    CHECK(cli::run(aborting) == 2);
    const std::string summary = read_file(dir / "o3" / "summary.txt");
    CHECK(summary.find("aborted") != std::string::npos);

    auto clock_cfg = shipped_clock_config();
    clock_cfg.assurance.budget = 0;
    write_file(dir / "clock0.json", cli::serialize_config(clock_cfg));
    cli::RunSpec alerting;
    alerting.scenario = cli::Scenario::Clock;
    alerting.config_path = (dir / "clock0.json").string();
    alerting.seed = 5;
    alerting.out_dir = (dir / "o4").string();
    CHECK(cli::run(alerting) == 2);
}

TEST_CASE("identical specs reproduce byte-identical traces") {
    const auto dir = fresh_dir("run_determinism");
    for (auto scenario : {cli::Scenario::Drone, cli::Scenario::Clock}) {
        const bool is_drone = scenario == cli::Scenario::Drone;
        cli::RunSpec spec;
        spec.scenario = scenario;
        spec.config_path =
            (std::filesystem::path(ASSURE_CONFIG_DIR) /
             (is_drone ? "drone_default.json" : "clock_default.json"))
                .string();
        spec.seed = is_drone ? 69 : 5;
        spec.out_dir = (dir / (is_drone ? "d1" : "c1")).string();
        const int first = cli::run(spec);
        spec.out_dir = (dir / (is_drone ? "d2" : "c2")).string();
        const int second = cli::run(spec);
        CHECK(first == second);
        CHECK(read_file(dir / (is_drone ? "d1" : "c1") / "trace.csv") ==
              read_file(dir / (is_drone ? "d2" : "c2") / "trace.csv"));
    }
}

TEST_CASE("heatmap runs drop one belief and horizon forecasts per step") {
    const auto dir = fresh_dir("run_heatmaps");
    auto cfg = shipped_drone_config();
    cli::RunSpec spec;
    spec.scenario = cli::Scenario::Drone;
    spec.config_path = (dir / "cfg.json").string();
    write_file(dir / "cfg.json", cli::serialize_config(cfg));
    spec.seed = 69;
    spec.out_dir = (dir / "out").string();
    spec.emit_heatmaps = true;
    REQUIRE(cli::run(spec) == 0);

    const auto rows = cli::parse_mission_trace_csv(read_file(dir / "out" / "trace.csv"));
    int steps = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i == 0 || rows[i - 1].t != rows[i].t) ++steps;
    }
    int beliefs = 0;
    int forecasts = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir / "out")) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("belief_t", 0) == 0) ++beliefs;
        if (name.rfind("forecast_t", 0) == 0) ++forecasts;
    }
    CHECK(beliefs == steps);
    CHECK(forecasts == steps * cfg.horizon);
    // PGM frames carry the binary magic
    std::ifstream pgm(dir / "out" / "belief_t1.pgm", std::ios::binary);
    char magic[2] = {0, 0};
    pgm.read(magic, 2);
    CHECK(magic[0] == 'P');
    CHECK(magic[1] == '5');
}
