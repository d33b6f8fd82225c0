// Acceptance gate: every release-blocking behavior, one pass/fail line each.
// Each check states its tolerance and hard time budget next to the math it
// exercises; the process exit code is the number of failing checks.

#include "assure/clocksync.hpp"
#include "assure/drone_sim.hpp"
#include "assure/grid.hpp"
#include "assure/run.hpp"
#include "assure/scenario_config.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace assure;

namespace {

using CheckFn = std::function<std::optional<std::string>()>;

std::string format_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f s", s);
    return buf;
}

// --- corrected-time worked example -----------------------------------------

std::optional<std::string> check_worked_example() {
    const clock::NormalParams d = clock::local_elapsed_distribution(600.0, {-0.01, 0.02});
    if (std::abs(d.mean - 594.0) > 1e-12 || std::abs(d.variance - 12.0) > 1e-12) {
        std::ostringstream msg;
        msg << "got mean " << d.mean << ", variance " << d.variance
            << "; wanted 594 and 12 within 1e-12";
        return msg.str();
    }
    return std::nullopt;
}

// --- drift/variance estimator recovery --------------------------------------

std::optional<std::string> check_estimator_recovery() {
    std::mt19937 rng(7);
    const double slope_true = 0.99;
    const double sigma2_true = 0.02;
    const double ref_gap = 10.0;
    std::normal_distribution<double> noise(0.0, std::sqrt(sigma2_true * ref_gap));
    clock::SampleWindow window(1001);
    double t = 0.0;
    double T = 0.0;
    window.push({t, T});
    for (int j = 0; j < 1000; ++j) {
        const double e = noise(rng);
        T += ref_gap;
        t += (ref_gap - e) / slope_true;
        window.push({t, T});
    }
    const double slope = clock::estimate_slope(window);
    const double sigma2 =
        clock::estimate_variance(clock::residuals(window, slope), clock::reference_gaps(window));
    if (std::abs(slope - slope_true) >= 0.002) {
        std::ostringstream msg;
        msg << "slope " << slope << " missed " << slope_true << " by more than 0.002";
        return msg.str();
    }
    if (std::abs(sigma2 - sigma2_true) >= 0.2 * sigma2_true) {
        std::ostringstream msg;
        msg << "sigma2 " << sigma2 << " missed " << sigma2_true << " by more than 20%";
        return msg.str();
    }
    return std::nullopt;
}

// --- sync-deadline soundness -------------------------------------------------

std::optional<std::string> check_deadline_soundness() {
    clock::AssuranceSpec spec;  // limit 1 s, p_max 0.05
    const double sigma2 = 0.02;
    const double gap = clock::next_sync_deadline(spec, sigma2, 0.0);
    std::mt19937_64 rng(404);
    std::normal_distribution<double> deviation(0.0, std::sqrt(sigma2 * gap));
    int violations = 0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        if (std::abs(deviation(rng)) > spec.limit) ++violations;
    }
    const double fraction = static_cast<double>(violations) / trials;
    if (fraction > 0.10) {
        std::ostringstream msg;
        msg << "deviation at the deadline exceeded the limit in " << fraction
            << " of runs (allowed 0.10)";
        return msg.str();
    }
    return std::nullopt;
}

// --- forecast against a dense transition-matrix oracle -----------------------

std::optional<std::string> check_forecast_oracle() {
    constexpr int kSide = 6;
    constexpr int kCells = kSide * kSide;
    constexpr int kHorizon = 4;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> mass(0.01, 1.0);
    std::uniform_real_distribution<double> move(-1.5, 1.5);
    std::uniform_real_distribution<double> leak(0.0, 0.25);

    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> raw(kCells);
        for (double& v : raw) v = mass(rng);
        const auto belief = grid::normalize(kSide, kSide, raw);

        std::vector<grid::Displacement> plan(kHorizon);
        std::vector<grid::Displacement> perturb(kHorizon);
        for (auto& d : plan) d = {move(rng), move(rng)};
        for (auto& d : perturb) d = {move(rng) / 3.0, move(rng) / 3.0};
        const grid::DiffusionParams diffusion{leak(rng)};

        const auto fc = grid::forecast(belief, plan, perturb, diffusion, kHorizon);
        if (fc.horizon() != kHorizon) return "forecast step count is off";

        // One dense matrix per step: column c is the unit response of cell c.
        std::vector<double> state(belief.data().begin(), belief.data().end());
        for (int n = 1; n < kHorizon; ++n) {
            const grid::Displacement step{plan[n - 1].dx + perturb[n - 1].dx,
                                          plan[n - 1].dy + perturb[n - 1].dy};
            std::vector<std::vector<double>> columns(kCells);
            for (int c = 0; c < kCells; ++c) {
                const auto response = grid::propagate(
                    grid::GridDistribution::delta(kSide, kSide, {c % kSide, c / kSide}), step,
                    diffusion);
                columns[c].assign(response.data().begin(), response.data().end());
            }
            std::vector<double> next(kCells, 0.0);
            for (int c = 0; c < kCells; ++c)
                for (int i = 0; i < kCells; ++i) next[i] += columns[c][i] * state[c];
            state = next;
            for (int i = 0; i < kCells; ++i) {
                if (std::abs(state[i] - fc.steps[n].data()[i]) > 1e-10) {
                    std::ostringstream msg;
                    msg << "trial " << trial << " step " << n << " cell " << i << ": got "
                        << fc.steps[n].data()[i] << ", oracle says " << state[i];
                    return msg.str();
                }
            }
        }
    }
    return std::nullopt;
}

// --- closure of the belief operators ------------------------------------------

std::optional<std::string> check_operator_closure() {
    std::mt19937_64 rng(31337);
    std::uniform_int_distribution<int> side(3, 8);
    std::uniform_real_distribution<double> mass(0.01, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto random_distribution = [&](int w, int h) {
        std::vector<double> raw(static_cast<std::size_t>(w) * h);
        for (double& v : raw) v = mass(rng);
        return grid::normalize(w, h, raw);
    };

    for (int op = 0; op < 1000; ++op) {
        const int w = side(rng);
        const int h = side(rng);
        const auto prior = random_distribution(w, h);
        grid::GridDistribution result;
        switch (op % 3) {
            case 0: {
                const auto kernel = grid::estimate_kernel(
                    w, h, [&](grid::Cell) { return random_distribution(w, h); });
                result = grid::fuse_match(prior, random_distribution(w, h), kernel);
                break;
            }
            case 1: {
                const grid::Cell reading{static_cast<int>(unit(rng) * w) % w,
                                         static_cast<int>(unit(rng) * h) % h};
                result = grid::fuse_gps(prior, reading, 0.3 + 0.7 * unit(rng));
                break;
            }
            default: {
                const grid::Displacement step{4.0 * unit(rng) - 2.0, 4.0 * unit(rng) - 2.0};
                result = grid::propagate(prior, step, {0.3 * unit(rng)});
                break;
            }
        }
        double total = 0.0;
        for (double v : result.data()) {
            if (v < 0.0) {
                std::ostringstream msg;
                msg << "op " << op << " produced a negative density " << v;
                return msg.str();
            }
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            std::ostringstream msg;
            msg << "op " << op << " total mass drifted to " << total;
            return msg.str();
        }
    }
    return std::nullopt;
}

// --- drone decision-pattern regression ----------------------------------------

std::optional<std::string> check_drone_regression() {
    const auto path = std::filesystem::path(ASSURE_CONFIG_DIR) / "drone_default.json";
    const auto config = cli::parse_drone_config(cli::load_file(path.string()));
    if (config.width != 20 || config.height != 24 || config.nofly_margin != 2.0 ||
        config.threshold != 0.05) {
        return "shipped scenario drifted from the documented geometry";
    }
    const auto trace = drone::run_mission(config, 69);
    if (trace.aborted) return "mission aborted";
    if (!trace.reached_target) return "mission did not reach the target";

    bool escalation_resolved = false;   // MoreData whose follow-up read says Continue
    bool escalation_replanned = false;  // MoreData whose follow-up read says Change
    int expected = config.resource_budget;
    int more_data = 0;
    for (std::size_t i = 0; i < trace.rows.size(); ++i) {
        const auto& row = trace.rows[i];
        const bool capsule = row.agent == drone::kCapsuleAgent;
        if (capsule && row.resources != expected) {
            std::ostringstream msg;
            msg << "row " << i << ": resources " << row.resources << ", expected " << expected;
            return msg.str();
        }
        if (row.signal == agent::CheckDecision::Continue) {
            if (capsule && row.probability > config.threshold) {
                std::ostringstream msg;
                msg << "row " << i << ": Continue with probability " << row.probability;
                return msg.str();
            }
        } else if (row.probability <= config.threshold) {
            std::ostringstream msg;
            msg << "row " << i << ": " << agent::to_string(row.signal) << " with probability "
                << row.probability << " not above the threshold";
            return msg.str();
        }
        if (row.signal == agent::CheckDecision::MoreData) {
            ++more_data;
            if (i + 1 >= trace.rows.size()) return "MoreData row without a follow-up read";
            const auto& gps = trace.rows[i + 1];
            if (gps.agent != drone::kGpsAgent || gps.t != row.t) {
                return "MoreData row not followed by a same-step escalated read";
            }
            if (gps.resources != expected - config.gps_cost) {
                std::ostringstream msg;
                msg << "escalation at step " << row.t << " debited "
                    << expected - gps.resources << " instead of " << config.gps_cost;
                return msg.str();
            }
            expected = gps.resources;
            if (gps.signal == agent::CheckDecision::Continue) escalation_resolved = true;
            if (gps.signal == agent::CheckDecision::Change) escalation_replanned = true;
        }
    }
    if (expected != config.resource_budget - more_data * config.gps_cost) {
        return "total resource spend does not match the escalation count";
    }
    if (!escalation_resolved) return "no escalation resolved back to Continue";
    if (!escalation_replanned) return "no escalation ended in a Change";

    const auto nofly = drone::build_nofly_mask(config);
    const auto& last = trace.rows.back();
    const auto final_cell =
        drone::nearest_cell(last.truth, config.width, config.height);
    if (nofly.at(final_cell) || nofly.at(last.argmax)) {
        return "mission ended inside the no-fly zone";
    }
    return std::nullopt;
}

// --- fused localization beats the raw matcher ----------------------------------

std::optional<std::string> check_fusion_accuracy() {
    drone::WorldConfig config;
    config.cloud_mask = grid::CellMask(config.width, config.height, false);
    for (int y = 8; y <= 16; ++y)
        for (int x = 4; x <= 16; ++x) config.cloud_mask.set(x, y, true);
    config.perturbation_scale = 0.35;

    auto euclid = [](grid::Vec2 a, grid::Cell b) {
        const double dx = a.x - b.x;
        const double dy = a.y - b.y;
        return std::sqrt(dx * dx + dy * dy);
    };

    std::mt19937_64 probe(999);
    double fused_err = 0.0;
    double raw_err = 0.0;
    int rows = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto trace = drone::run_mission(config, seed);
        for (const auto& row : trace.rows) {
            if (row.agent != drone::kCapsuleAgent) continue;
            const auto truth_cell =
                drone::nearest_cell(row.truth, config.width, config.height);
            const auto raw = drone::synthetic_match(truth_cell, config.cloud_mask, probe);
            fused_err += euclid(row.truth, row.argmax);
            raw_err += euclid(row.truth, grid::argmax_location(raw));
            ++rows;
        }
    }
    if (rows < 1000) return "too few fusion steps sampled";
    if (fused_err > raw_err) {
        std::ostringstream msg;
        msg << "mean fused error " << fused_err / rows << " exceeds raw matcher error "
            << raw_err / rows << " over " << rows << " steps";
        return msg.str();
    }
    return std::nullopt;
}

// --- byte-identical reruns -------------------------------------------------------

std::optional<std::string> check_determinism() {
    const auto base = std::filesystem::temp_directory_path() / "assure_acceptance";
    std::filesystem::remove_all(base);

    auto read_trace = [](const std::filesystem::path& dir) {
        return cli::load_file((dir / "trace.csv").string());
    };

    for (const char* scenario : {"drone", "clock"}) {
        const bool is_drone = std::string(scenario) == "drone";
        cli::RunSpec spec;
        spec.scenario = is_drone ? cli::Scenario::Drone : cli::Scenario::Clock;
        spec.config_path =
            (std::filesystem::path(ASSURE_CONFIG_DIR) /
             (is_drone ? "drone_default.json" : "clock_default.json"))
                .string();
        spec.seed = is_drone ? 69 : 5;
        spec.out_dir = (base / scenario / "first").string();
        const int first = cli::run(spec);
        spec.out_dir = (base / scenario / "second").string();
        const int second = cli::run(spec);
        if (first != second) {
            std::ostringstream msg;
            msg << scenario << ": exit codes differ between reruns (" << first << " vs "
                << second << ")";
            return msg.str();
        }
        if (read_trace(base / scenario / "first") != read_trace(base / scenario / "second")) {
            std::ostringstream msg;
            msg << scenario << ": reruns with one seed produced different traces";
            return msg.str();
        }
    }
    std::filesystem::remove_all(base);
    return std::nullopt;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_seconds;
        CheckFn fn;
    };
    const std::vector<Criterion> criteria = {
        {"corrected-time worked example (594 s mean, 12 s² variance)", 1.0,
         check_worked_example},
        {"drift and variance estimators recover the truth from 1000 samples", 1.0,
         check_estimator_recovery},
        {"sync deadline keeps the deviation bound over 10000 intervals", 10.0,
         check_deadline_soundness},
        {"forecast matches a dense transition-matrix oracle", 1.0, check_forecast_oracle},
        {"belief operators preserve nonnegativity and unit mass", 5.0,
         check_operator_closure},
        {"shipped navigation scenario reproduces its decision pattern", 5.0,
         check_drone_regression},
        {"fused localization beats the raw matcher under clouds", 30.0,
         check_fusion_accuracy},
        {"identical config and seed give byte-identical traces", 10.0, check_determinism},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::optional<std::string> error;
        try {
            error = criterion.fn();
        } catch (const std::exception& e) {
            error = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!error && elapsed > criterion.budget_seconds) {
            std::ostringstream msg;
            msg << "took " << format_seconds(elapsed) << ", budget "
                << format_seconds(criterion.budget_seconds);
            error = msg.str();
        }
        if (error) {
            ++failures;
            std::printf("FAIL  %s [%s] — %s\n", criterion.name, format_seconds(elapsed).c_str(),
                        error->c_str());
        } else {
            std::printf("PASS  %s [%s]\n", criterion.name, format_seconds(elapsed).c_str());
        }
    }
    std::printf("%zu/%zu acceptance criteria passed\n", criteria.size() - failures,
                criteria.size());
    return failures;
}
