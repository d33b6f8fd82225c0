#pragma once

#include "assure/agent_core.hpp"
#include "assure/grid.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace assure::drone {

using grid::Cell;
using grid::Displacement;
using grid::Vec2;

// Check-violation agent labels as they appear in trace rows.
inline constexpr const char* kCapsuleAgent = "CaPSuLe";
inline constexpr const char* kGpsAgent = "GPS";
inline constexpr const char* kAbortAgent = "abort";

struct WorldConfig {
    int width = 20;
    int height = 24;
    Cell start{0, 12};
    Cell target{19, 12};
    double nofly_margin = 2.0;       // Chebyshev cells around the planned segment
    grid::CellMask cloud_mask;       // empty means clear skies everywhere
    int horizon = 6;                 // forecast steps per check, current belief included
    double threshold = 0.05;         // max tolerated violation probability
    double p_gps = 0.92;
    grid::DiffusionParams diffusion{0.04};
    double perturbation_scale = 0.35;  // per-axis uniform wind/actuation noise
    int resource_budget = 14;
    int resource_threshold = 10;     // reserve that must remain after paying for a read
    int gps_cost = 1;
    friend bool operator==(const WorldConfig&, const WorldConfig&) = default;
};

struct MissionState {
    int t = 0;
    Vec2 truth;
    grid::GridDistribution belief;
    std::vector<Displacement> plan;  // remaining steps
    int resources = 0;
    bool finished = false;
};

// One check-violation evaluation. GPS rows carry post-debit resources; the
// abort row closes a mission whose belief vanished (probability, argmax and
// mean are then NaN/sentinel).
struct MissionRow {
    int t = 0;
    int resources = 0;
    std::string agent;
    double probability = std::numeric_limits<double>::quiet_NaN();
    agent::CheckDecision signal = agent::CheckDecision::Continue;
    Vec2 truth;
    Cell argmax{-1, -1};
    Vec2 mean{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};

    friend bool operator==(const MissionRow& a, const MissionRow& b);
};

struct MissionTrace {
    std::vector<MissionRow> rows;
    bool reached_target = false;
    bool aborted = false;  // belief vanished mid-flight
    friend bool operator==(const MissionTrace&, const MissionTrace&) = default;
};

// Chebyshev distance from point p to the segment a-b (all in cell units).
double segment_chebyshev_distance(Vec2 p, Vec2 a, Vec2 b);

// Nearest in-bounds cell to a continuous position.
Cell nearest_cell(Vec2 p, int width, int height);

// Cells more than nofly_margin (Chebyshev) away from the start-target
// segment. Errors if the rule would mask start or target.
grid::CellMask build_nofly_mask(const WorldConfig& config);

// Deterministic matcher response profile for a drone at `truth`: clear cells
// concentrate mass nearby, clouded cells spread it over the clouded region.
grid::GridDistribution match_profile(Cell truth, const grid::CellMask& clouds);

// match_profile with multiplicative per-cell noise, as the live camera
// matcher would produce.
grid::GridDistribution synthetic_match(Cell truth, const grid::CellMask& clouds,
                                       std::mt19937_64& rng);

// Advance ground truth by the plan head plus uniform per-axis perturbation,
// clamped to the grid. Consumes the plan head and increments t.
MissionState step_ground_truth(MissionState state, const WorldConfig& config,
                               std::mt19937_64& rng);

// Three-way check decision: Continue when the violation probability is
// within threshold; otherwise request more data if the budget allows a read
// on top of the reserve and this step has not yet escalated; otherwise
// demand a course change.
agent::CheckDecision check_violation_policy(double probability, int resources,
                                            const WorldConfig& config,
                                            bool already_escalated = false);

// Evenly split straight-line plan from a position to a cell, one step per
// whole cell of distance (at least one step).
std::vector<Displacement> straight_plan(Vec2 from, Cell to);

// Corrective plan of `remaining` steps: one lateral step of half the margin
// away from the nearest masked cell (toward the nearest safe cell if the
// mean is already inside the mask), then straight to the target. Every step
// magnitude is capped at 1.5 cells.
std::vector<Displacement> revise_plan(Vec2 mean, Cell target, const grid::CellMask& nofly,
                                      int remaining, double margin);

// Per-step artifact hook: the fused belief and forecast from each
// check-violation evaluation (the GPS stage re-invokes it on escalation).
using StepSink =
    std::function<void(int t, const grid::GridDistribution& belief,
                       const grid::TrajectoryForecast& forecast)>;

// Assemble the drone assurance network and fly the mission until the belief
// argmax reaches the target (Chebyshev distance <= 1), the plan runs out, or
// the belief vanishes.
MissionTrace run_mission(const WorldConfig& config, std::uint64_t seed,
                         const StepSink& sink = {});

}  // namespace assure::drone
