#include "assure/drone_sim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>

namespace assure::drone {

namespace {

bool same_value(double a, double b) {
    return a == b || (std::isnan(a) && std::isnan(b));
}

double clamp_coord(double v, int extent) {
    return std::clamp(v, 0.0, static_cast<double>(extent - 1));
}

Displacement capped(double dx, double dy, double cap) {
    const double mag = std::hypot(dx, dy);
    if (mag <= cap || mag == 0.0) return {dx, dy};
    return {dx / mag * cap, dy / mag * cap};
}

int chebyshev(Cell a, Cell b) {
    return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

void validate_config(const WorldConfig& config) {
    if (config.width < 2 || config.height < 2) {
        throw std::invalid_argument("grid must be at least 2x2");
    }
    auto inside = [&](Cell c) {
        return c.x >= 0 && c.x < config.width && c.y >= 0 && c.y < config.height;
    };
    if (!inside(config.start) || !inside(config.target)) {
        throw std::invalid_argument("start and target must lie inside the grid");
    }
    if (!(config.threshold > 0.0) || !(config.threshold < 1.0)) {
        throw std::invalid_argument("threshold must be in (0, 1)");
    }
    if (config.nofly_margin < 0.0) {
        throw std::invalid_argument("nofly_margin must be nonnegative");
    }
    if (config.horizon < 1) {
        throw std::invalid_argument("horizon must be at least 1");
    }
    if (!(config.p_gps > 0.0) || config.p_gps > 1.0) {
        throw std::invalid_argument("p_gps must be in (0, 1]");
    }
    if (config.diffusion.leak < 0.0 || config.diffusion.leak >= 1.0) {
        throw std::invalid_argument("diffusion leak must be in [0, 1)");
    }
    if (config.perturbation_scale < 0.0) {
        throw std::invalid_argument("perturbation_scale must be nonnegative");
    }
    if (config.resource_budget < 0 || config.resource_threshold < 0 || config.gps_cost < 0) {
        throw std::invalid_argument("resource quantities must be nonnegative");
    }
    if (config.cloud_mask.width() != 0 &&
        (config.cloud_mask.width() != config.width ||
         config.cloud_mask.height() != config.height)) {
        throw std::invalid_argument("cloud mask dimensions must match the grid");
    }
}

grid::CellMask effective_clouds(const WorldConfig& config) {
    if (config.cloud_mask.width() != 0) return config.cloud_mask;
    return grid::CellMask(config.width, config.height, false);
}

}  // namespace

bool operator==(const MissionRow& a, const MissionRow& b) {
    return a.t == b.t && a.resources == b.resources && a.agent == b.agent &&
           same_value(a.probability, b.probability) && a.signal == b.signal &&
           same_value(a.truth.x, b.truth.x) && same_value(a.truth.y, b.truth.y) &&
           a.argmax == b.argmax && same_value(a.mean.x, b.mean.x) &&
           same_value(a.mean.y, b.mean.y);
}

double segment_chebyshev_distance(Vec2 p, Vec2 a, Vec2 b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double fx0 = p.x - a.x;  // offsets at t = 0; f(t) = f0 - t*d
    const double fy0 = p.y - a.y;

    // max(|fx|, |fy|) is piecewise linear in t, so its minimum over [0, 1]
    // sits at an endpoint, a zero of either offset, or a crossing |fx|=|fy|.
    std::vector<double> candidates{0.0, 1.0};
    if (dx != 0.0) candidates.push_back(fx0 / dx);
    if (dy != 0.0) candidates.push_back(fy0 / dy);
    if (dx != dy) candidates.push_back((fx0 - fy0) / (dx - dy));
    if (dx + dy != 0.0) candidates.push_back((fx0 + fy0) / (dx + dy));

    double best = std::numeric_limits<double>::infinity();
    for (double t : candidates) {
        t = std::clamp(t, 0.0, 1.0);
        const double fx = fx0 - t * dx;
        const double fy = fy0 - t * dy;
        best = std::min(best, std::max(std::abs(fx), std::abs(fy)));
    }
    return best;
}

Cell nearest_cell(Vec2 p, int width, int height) {
    const int x = static_cast<int>(std::lround(clamp_coord(p.x, width)));
    const int y = static_cast<int>(std::lround(clamp_coord(p.y, height)));
    return {x, y};
}

grid::CellMask build_nofly_mask(const WorldConfig& config) {
    validate_config(config);
    const Vec2 a{static_cast<double>(config.start.x), static_cast<double>(config.start.y)};
    const Vec2 b{static_cast<double>(config.target.x), static_cast<double>(config.target.y)};
    grid::CellMask mask(config.width, config.height, false);
    for (int y = 0; y < config.height; ++y) {
        for (int x = 0; x < config.width; ++x) {
            const Vec2 center{static_cast<double>(x), static_cast<double>(y)};
            mask.set(x, y, segment_chebyshev_distance(center, a, b) > config.nofly_margin);
        }
    }
    if (mask.at(config.start) || mask.at(config.target)) {
        throw std::invalid_argument("no-fly rule would mask the start or target cell");
    }
    return mask;
}

grid::GridDistribution match_profile(Cell truth, const grid::CellMask& clouds) {
    const int w = clouds.width();
    const int h = clouds.height();
    if (w < 1 || h < 1) {
        throw std::invalid_argument("cloud mask must be non-empty");
    }
    if (truth.x < 0 || truth.x >= w || truth.y < 0 || truth.y >= h) {
        throw std::invalid_argument("truth cell out of bounds");
    }
    std::vector<double> raw(static_cast<std::size_t>(w) * h, 0.0);
    auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };

    if (!clouds.at(truth)) {
        // Clear view: a dominant peak with slight spill to the neighbours,
        // the leftover confusion mass landing on featureless clouded cells.
        raw[idx(truth.x, truth.y)] = 0.85;
        double spent = 0.85;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = truth.x + dx;
                const int ny = truth.y + dy;
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                raw[idx(nx, ny)] = 0.01;
                spent += 0.01;
            }
        }
        std::vector<std::size_t> confusable;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (std::max(std::abs(x - truth.x), std::abs(y - truth.y)) <= 1) continue;
                if (clouds.at(x, y)) confusable.push_back(idx(x, y));
            }
        }
        if (confusable.empty()) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    if (std::max(std::abs(x - truth.x), std::abs(y - truth.y)) > 1) {
                        confusable.push_back(idx(x, y));
                    }
                }
            }
        }
        if (!confusable.empty()) {
            const double share = (1.0 - spent) / static_cast<double>(confusable.size());
            for (auto i : confusable) raw[i] += share;
        }
        return grid::normalize(w, h, std::move(raw));
    }

    // Clouded view: the matcher cannot tell clouded cells apart. Mass spreads
    // over the clouded region and the true cell never rises above the uniform
    // share (capped below 0.2 so the multiplicative noise cannot push it over).
    const int n = clouds.count_set();
    if (n == 1) {
        raw[idx(truth.x, truth.y)] = 0.19;
        std::vector<std::size_t> near;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = truth.x + dx;
                const int ny = truth.y + dy;
                if (nx >= 0 && nx < w && ny >= 0 && ny < h) near.push_back(idx(nx, ny));
            }
        }
        for (auto i : near) raw[i] = 0.81 / static_cast<double>(near.size());
        return grid::normalize(w, h, std::move(raw));
    }
    const double at_truth = std::min(1.0 / n, 0.19);
    const double share = (1.0 - at_truth) / static_cast<double>(n - 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!clouds.at(x, y)) continue;
            raw[idx(x, y)] = (x == truth.x && y == truth.y) ? at_truth : share;
        }
    }
    return grid::normalize(w, h, std::move(raw));
}

grid::GridDistribution synthetic_match(Cell truth, const grid::CellMask& clouds,
                                       std::mt19937_64& rng) {
    const auto profile = match_profile(truth, clouds);
    std::uniform_real_distribution<double> jitter(-0.02, 0.02);
    std::vector<double> raw(profile.data().begin(), profile.data().end());
    for (auto& v : raw) v *= 1.0 + jitter(rng);
    return grid::normalize(profile.width(), profile.height(), std::move(raw));
}

MissionState step_ground_truth(MissionState state, const WorldConfig& config,
                               std::mt19937_64& rng) {
    if (state.plan.empty()) {
        throw std::invalid_argument("ground truth cannot step: plan exhausted");
    }
    Displacement move = state.plan.front();
    if (config.perturbation_scale > 0.0) {
        std::uniform_real_distribution<double> wind(-config.perturbation_scale,
                                                    config.perturbation_scale);
        move.dx += wind(rng);
        move.dy += wind(rng);
    }
    state.truth.x = clamp_coord(state.truth.x + move.dx, config.width);
    state.truth.y = clamp_coord(state.truth.y + move.dy, config.height);
    state.plan.erase(state.plan.begin());
    ++state.t;
    return state;
}

agent::CheckDecision check_violation_policy(double probability, int resources,
                                            const WorldConfig& config, bool already_escalated) {
    if (!(probability >= 0.0) || probability > 1.0) {
        throw std::invalid_argument("violation probability must be in [0, 1]");
    }
    if (resources < 0) {
        throw std::invalid_argument("resources must be nonnegative");
    }
    if (probability <= config.threshold) return agent::CheckDecision::Continue;
    if (!already_escalated && resources >= config.resource_threshold + config.gps_cost) {
        return agent::CheckDecision::MoreData;
    }
    return agent::CheckDecision::Change;
}

std::vector<Displacement> straight_plan(Vec2 from, Cell to) {
    const double dx = to.x - from.x;
    const double dy = to.y - from.y;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::hypot(dx, dy))));
    return std::vector<Displacement>(static_cast<std::size_t>(steps),
                                     {dx / steps, dy / steps});
}

std::vector<Displacement> revise_plan(Vec2 mean, Cell target, const grid::CellMask& nofly,
                                      int remaining, double margin) {
    if (remaining < 1) {
        throw std::invalid_argument("replanning needs at least one remaining step");
    }
    if (remaining == 1) {
        return {capped(target.x - mean.x, target.y - mean.y, 1.5)};
    }

    // Lateral evasion first: directly away from the nearest masked cell, or
    // toward the nearest safe cell when the mean has drifted inside the mask.
    Displacement lateral{0.0, 0.0};
    auto nearest_where = [&](bool masked) -> std::optional<Cell> {
        std::optional<Cell> best;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int y = 0; y < nofly.height(); ++y) {
            for (int x = 0; x < nofly.width(); ++x) {
                if (nofly.at(x, y) != masked) continue;
                const double d2 = (x - mean.x) * (x - mean.x) + (y - mean.y) * (y - mean.y);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = Cell{x, y};
                }
            }
        }
        return best;
    };
    auto mask_distance = [&](double px, double py) {
        double best = std::numeric_limits<double>::infinity();
        for (int y = 0; y < nofly.height(); ++y)
            for (int x = 0; x < nofly.width(); ++x)
                if (nofly.at(x, y)) best = std::min(best, std::hypot(x - px, y - py));
        return best;
    };
    const Cell at = nearest_cell(mean, nofly.width(), nofly.height());
    const bool inside_mask = nofly.at(at);
    if (auto anchor = nearest_where(!inside_mask)) {
        double dirx = inside_mask ? anchor->x - mean.x : mean.x - anchor->x;
        double diry = inside_mask ? anchor->y - mean.y : mean.y - anchor->y;
        const double mag = std::hypot(dirx, diry);
        if (mag > 0.0) {
            dirx /= mag;
            diry /= mag;
            double reach = std::min(margin / 2.0, 1.5);
            if (!inside_mask) {
                // Backing away from one wall must not overshoot toward
                // another: stop at the clearance-maximizing point.
                double best_d = mask_distance(mean.x, mean.y);
                double best_reach = 0.0;
                for (int k = 1; k <= 32; ++k) {
                    const double r = reach * k / 32.0;
                    const double d = mask_distance(mean.x + r * dirx, mean.y + r * diry);
                    if (d > best_d) {
                        best_d = d;
                        best_reach = r;
                    }
                }
                reach = best_reach;
            }
            lateral = {dirx * reach, diry * reach};
        }
    }

    std::vector<Displacement> plan;
    plan.reserve(static_cast<std::size_t>(remaining));
    plan.push_back(lateral);
    const Vec2 after{mean.x + lateral.dx, mean.y + lateral.dy};
    const int rest = remaining - 1;
    const Displacement step =
        capped((target.x - after.x) / rest, (target.y - after.y) / rest, 1.5);
    for (int i = 0; i < rest; ++i) plan.push_back(step);
    return plan;
}

namespace {

using namespace assure::agent;

// Shared mission blackboard for the agents below.
struct DroneWorld {
    WorldConfig config;
    grid::CellMask nofly;
    grid::CellMask clouds;
    MissionState state;
    bool reached = false;
    MissionTrace trace;
    StepSink sink;
};

// Control executes the plan (which physically moves the drone), hands the
// belief and plan to the prediction agent, and adopts the fused belief that
// the check agents feed back, replanning on Change.
struct ControlAgent : AgentBehavior {
    std::shared_ptr<DroneWorld> world;
    AgentId predict;
    grid::GridDistribution pending;
    explicit ControlAgent(std::shared_ptr<DroneWorld> w) : world(std::move(w)) {}

    void on_wake(Activation& act) override {
        if (std::holds_alternative<ClockTick>(act.cause())) {
            if (world->state.finished) return;
            if (world->state.plan.empty()) {
                world->state.finished = true;
                return;
            }
            const Displacement executed = world->state.plan.front();
            world->state = step_ground_truth(std::move(world->state), world->config, act.rng());
            std::vector<Displacement> with_head;
            with_head.reserve(world->state.plan.size() + 1);
            with_head.push_back(executed);
            with_head.insert(with_head.end(), world->state.plan.begin(),
                             world->state.plan.end());
            act.emit(predict, world->state.belief);
            act.emit(predict, ControlPlanMsg{std::move(with_head)});
            return;
        }
        const auto& msg = act.message().payload;
        if (std::holds_alternative<grid::GridDistribution>(msg)) {
            pending = std::get<grid::GridDistribution>(msg);
            return;
        }
        const auto decision = std::get<FeedbackMsg>(msg).decision;
        world->state.belief = pending;
        if (decision == CheckDecision::Change && !world->state.plan.empty()) {
            world->state.plan = revise_plan(grid::mean_location(world->state.belief),
                                            world->config.target, world->nofly,
                                            static_cast<int>(world->state.plan.size()),
                                            world->config.nofly_margin);
        }
        const Cell best = grid::argmax_location(world->state.belief);
        if (chebyshev(best, world->config.target) <= 1) {
            world->state.finished = true;
            world->reached = true;
        }
    }
};

// Camera source: synthetic matcher response for the drone's true location.
struct CameraAgent : AgentBehavior {
    std::shared_ptr<DroneWorld> world;
    AgentId fusion;
    explicit CameraAgent(std::shared_ptr<DroneWorld> w) : world(std::move(w)) {}
    void on_wake(Activation& act) override {
        if (world->state.finished) return;
        const Cell seen =
            nearest_cell(world->state.truth, world->config.width, world->config.height);
        act.emit(fusion, synthetic_match(seen, world->clouds, act.rng()));
    }
};

// Prediction agent: pushes the prior belief through the executed step.
struct PredictAgent : AgentBehavior {
    std::shared_ptr<DroneWorld> world;
    AgentId fusion;
    std::optional<grid::GridDistribution> belief;
    explicit PredictAgent(std::shared_ptr<DroneWorld> w) : world(std::move(w)) {}
    void on_wake(Activation& act) override {
        const auto& msg = act.message().payload;
        if (std::holds_alternative<grid::GridDistribution>(msg)) {
            belief = std::get<grid::GridDistribution>(msg);
            return;
        }
        auto plan = std::get<ControlPlanMsg>(msg).steps;
        const Displacement executed = plan.front();
        plan.erase(plan.begin());
        act.emit(fusion, grid::propagate(*belief, executed, world->config.diffusion));
        act.emit(fusion, ControlPlanMsg{std::move(plan)});
        belief.reset();
    }
};

// Fuses the predicted prior with the camera observation via the estimated
// match kernel.
struct CapsuleFusionAgent : AgentBehavior {
    std::shared_ptr<DroneWorld> world;
    AgentId check;
    grid::MatchKernel kernel;
    std::optional<grid::GridDistribution> observation;
    std::optional<grid::GridDistribution> prior;
    CapsuleFusionAgent(std::shared_ptr<DroneWorld> w, grid::MatchKernel k)
        : world(std::move(w)), kernel(std::move(k)) {}
    void on_wake(Activation& act) override {
        const auto& msg = act.message().payload;
        if (std::holds_alternative<grid::GridDistribution>(msg)) {
            // Camera output arrives before the predicted prior each tick.
            if (!observation.has_value()) {
                observation = std::get<grid::GridDistribution>(msg);
            } else {
                prior = std::get<grid::GridDistribution>(msg);
            }
            return;
        }
        auto plan = std::get<ControlPlanMsg>(msg);
        act.emit(check, grid::fuse_match(*prior, *observation, kernel));
        act.emit(check, std::move(plan));
        observation.reset();
        prior.reset();
    }
};

// Shared check-violation logic: forecast the remaining plan, score the
// violation probability, record a trace row, and route the decision.
struct CheckAgentBase : AgentBehavior {
    std::shared_ptr<DroneWorld> world;
    std::optional<grid::GridDistribution> fused;
    explicit CheckAgentBase(std::shared_ptr<DroneWorld> w) : world(std::move(w)) {}

    double violation(const grid::GridDistribution& belief,
                     const std::vector<Displacement>& plan_tail,
                     grid::TrajectoryForecast& fc_out) const {
        const auto& cfg = world->config;
        std::vector<Displacement> padded = plan_tail;
        if (padded.size() < static_cast<std::size_t>(cfg.horizon)) {
            padded.resize(static_cast<std::size_t>(cfg.horizon), Displacement{0.0, 0.0});
        }
        const std::vector<Displacement> no_wind(static_cast<std::size_t>(cfg.horizon),
                                                Displacement{0.0, 0.0});
        fc_out = grid::forecast(belief, padded, no_wind, cfg.diffusion, cfg.horizon);
        return grid::violation_probability(fc_out, world->nofly);
    }

    void record(const char* label, double probability, CheckDecision signal,
                const grid::GridDistribution& belief) {
        MissionRow row;
        row.t = world->state.t;
        row.resources = world->state.resources;
        row.agent = label;
        row.probability = probability;
        row.signal = signal;
        row.truth = world->state.truth;
        row.argmax = grid::argmax_location(belief);
        row.mean = grid::mean_location(belief);
        world->trace.rows.push_back(std::move(row));
    }
};

struct CapsuleCheckAgent : CheckAgentBase {
    AgentId control;
    AgentId gps_fusion;
    using CheckAgentBase::CheckAgentBase;
    void on_wake(Activation& act) override {
        const auto& msg = act.message().payload;
        if (std::holds_alternative<grid::GridDistribution>(msg)) {
            fused = std::get<grid::GridDistribution>(msg);
            return;
        }
        auto plan = std::get<ControlPlanMsg>(msg);
        grid::TrajectoryForecast fc;
        const double p = violation(*fused, plan.steps, fc);
        const auto signal = check_violation_policy(p, world->state.resources, world->config);
        record(kCapsuleAgent, p, signal, *fused);
        if (world->sink) world->sink(world->state.t, *fused, fc);
        if (signal == CheckDecision::MoreData) {
            act.emit(gps_fusion, *fused);
            act.emit(gps_fusion, std::move(plan));
        } else {
            act.emit(control, *fused);
            act.emit(control, FeedbackMsg{signal});
        }
        fused.reset();
    }
};

// Pays for a position fix, pulls it from the GPS source, and sharpens the
// belief with it.
struct GpsFusionAgent : AgentBehavior {
    std::shared_ptr<DroneWorld> world;
    AgentId sensor;
    AgentId check;
    std::optional<grid::GridDistribution> fused;
    explicit GpsFusionAgent(std::shared_ptr<DroneWorld> w) : world(std::move(w)) {}
    void on_wake(Activation& act) override {
        const auto& msg = act.message().payload;
        if (std::holds_alternative<grid::GridDistribution>(msg)) {
            fused = std::get<grid::GridDistribution>(msg);
            return;
        }
        auto plan = std::get<ControlPlanMsg>(msg);
        world->state.resources -= world->config.gps_cost;
        const auto reply = act.pull(sensor);
        const Cell reading =
            std::get<Cell>(std::get<SensorReadingMsg>(reply.payload).value);
        act.emit(check, grid::fuse_gps(*fused, reading, world->config.p_gps));
        act.emit(check, std::move(plan));
        fused.reset();
    }
};

// GPS source: reports the true cell with probability p_gps, otherwise a
// uniformly chosen in-bounds neighbour.
struct GpsSensorAgent : AgentBehavior {
    std::shared_ptr<DroneWorld> world;
    explicit GpsSensorAgent(std::shared_ptr<DroneWorld> w) : world(std::move(w)) {}
    void on_wake(Activation& act) override {
        const Cell truth =
            nearest_cell(world->state.truth, world->config.width, world->config.height);
        Cell reading = truth;
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        if (coin(act.rng()) > world->config.p_gps) {
            std::vector<Cell> neighbours;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const Cell c{truth.x + dx, truth.y + dy};
                    if (c.x >= 0 && c.x < world->config.width && c.y >= 0 &&
                        c.y < world->config.height) {
                        neighbours.push_back(c);
                    }
                }
            }
            std::uniform_int_distribution<std::size_t> pick(0, neighbours.size() - 1);
            reading = neighbours[pick(act.rng())];
        }
        act.reply(SensorReadingMsg{reading});
    }
};

struct GpsCheckAgent : CheckAgentBase {
    AgentId control;
    using CheckAgentBase::CheckAgentBase;
    void on_wake(Activation& act) override {
        const auto& msg = act.message().payload;
        if (std::holds_alternative<grid::GridDistribution>(msg)) {
            fused = std::get<grid::GridDistribution>(msg);
            return;
        }
        auto plan = std::get<ControlPlanMsg>(msg);
        grid::TrajectoryForecast fc;
        const double p = violation(*fused, plan.steps, fc);
        const auto signal = check_violation_policy(p, world->state.resources, world->config,
                                                   /*already_escalated=*/true);
        record(kGpsAgent, p, signal, *fused);
        if (world->sink) world->sink(world->state.t, *fused, fc);
        act.emit(control, *fused);
        act.emit(control, FeedbackMsg{signal});
        fused.reset();
    }
};

}  // namespace

MissionTrace run_mission(const WorldConfig& config, std::uint64_t seed, const StepSink& sink) {
    auto world = std::make_shared<DroneWorld>();
    world->config = config;
    world->nofly = build_nofly_mask(config);  // validates the config
    world->clouds = effective_clouds(config);
    world->sink = sink;
    world->state.truth = {static_cast<double>(config.start.x),
                          static_cast<double>(config.start.y)};
    world->state.belief = grid::GridDistribution::delta(config.width, config.height,
                                                        config.start);
    world->state.plan = straight_plan(world->state.truth, config.target);
    world->state.resources = config.resource_budget;

    auto kernel = grid::estimate_kernel(config.width, config.height, [&world](Cell q) {
        return match_profile(q, world->clouds);
    });

    auto control = std::make_shared<ControlAgent>(world);
    auto camera = std::make_shared<CameraAgent>(world);
    auto predict = std::make_shared<PredictAgent>(world);
    auto capsule = std::make_shared<CapsuleFusionAgent>(world, std::move(kernel));
    auto check_capsule = std::make_shared<CapsuleCheckAgent>(world);
    auto gps_fusion = std::make_shared<GpsFusionAgent>(world);
    auto gps_sensor = std::make_shared<GpsSensorAgent>(world);
    auto check_gps = std::make_shared<GpsCheckAgent>(world);

    agent::Network net;
    const auto control_id = net.add_agent(agent::AgentKind::Control, control, "control");
    const auto camera_id = net.add_agent(agent::AgentKind::Source, camera, "camera");
    const auto predict_id = net.add_agent(agent::AgentKind::Prediction, predict, "predict");
    const auto capsule_id = net.add_agent(agent::AgentKind::Fusion, capsule, "capsule-fusion");
    const auto check_capsule_id =
        net.add_agent(agent::AgentKind::CheckViolation, check_capsule, "check-capsule");
    const auto gps_fusion_id = net.add_agent(agent::AgentKind::Fusion, gps_fusion, "gps-fusion");
    const auto gps_sensor_id = net.add_agent(agent::AgentKind::Source, gps_sensor, "gps-sensor");
    const auto check_gps_id =
        net.add_agent(agent::AgentKind::CheckViolation, check_gps, "check-gps");

    control->predict = predict_id;
    camera->fusion = capsule_id;
    predict->fusion = capsule_id;
    capsule->check = check_capsule_id;
    check_capsule->control = control_id;
    check_capsule->gps_fusion = gps_fusion_id;
    gps_fusion->sensor = gps_sensor_id;
    gps_fusion->check = check_gps_id;
    check_gps->control = control_id;

    net.connect(control_id, predict_id, agent::EdgeKind::Tuple);
    net.connect(camera_id, capsule_id, agent::EdgeKind::Tuple);
    net.connect(predict_id, capsule_id, agent::EdgeKind::Tuple);
    net.connect(capsule_id, check_capsule_id, agent::EdgeKind::Tuple);
    net.connect(check_capsule_id, gps_fusion_id, agent::EdgeKind::Tuple);
    net.connect(gps_fusion_id, gps_sensor_id, agent::EdgeKind::Data);
    net.connect(gps_fusion_id, check_gps_id, agent::EdgeKind::Tuple);
    net.connect(check_capsule_id, control_id, agent::EdgeKind::Feedback);
    net.connect(check_gps_id, control_id, agent::EdgeKind::Feedback);
    net.wake_every(control_id, 1);
    net.wake_every(camera_id, 1);
    net.seal();

    try {
        net.run_until([&world](const agent::SchedulerView&) { return world->state.finished; },
                      seed);
    } catch (const grid::VanishedBelief&) {
        MissionRow row;
        row.t = world->state.t;
        row.resources = world->state.resources;
        row.agent = kAbortAgent;
        row.signal = agent::CheckDecision::Change;
        row.truth = world->state.truth;
        world->trace.rows.push_back(std::move(row));
        world->trace.aborted = true;
    }
    world->trace.reached_target = world->reached;
    return world->trace;
}

}  // namespace assure::drone
