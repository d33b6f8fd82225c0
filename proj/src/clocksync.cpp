#include "assure/clocksync.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>

namespace assure::clock {

SampleWindow::SampleWindow(std::size_t capacity) : capacity_(capacity) {
    if (capacity < 2) {
        throw std::invalid_argument("sample window capacity must be at least 2");
    }
}

void SampleWindow::push(ClockPair sample) {
    if (!pairs_.empty()) {
        if (sample.local <= pairs_.back().local || sample.reference <= pairs_.back().reference) {
            throw std::invalid_argument("clock samples must be strictly increasing in both "
                                        "local and reference time");
        }
    }
    pairs_.push_back(sample);
    if (pairs_.size() > capacity_) pairs_.pop_front();
}

double estimate_slope(const SampleWindow& window) {
    if (!window.ready()) {
        throw std::invalid_argument("slope estimation needs at least 2 samples");
    }
    const auto& pairs = window.pairs();
    const double t0 = pairs.front().local;
    const double T0 = pairs.front().reference;
    double sum_xy = 0.0;
    double sum_xx = 0.0;
    for (const auto& p : pairs) {
        const double x = p.local - t0;
        const double y = p.reference - T0;
        sum_xy += x * y;
        sum_xx += x * x;
    }
    if (sum_xx == 0.0) {
        throw std::invalid_argument("slope estimation needs spread in local time");
    }
    return sum_xy / sum_xx;
}

std::vector<double> residuals(const SampleWindow& window, double slope) {
    if (!window.ready()) {
        throw std::invalid_argument("residuals need at least 2 samples");
    }
    const auto& pairs = window.pairs();
    std::vector<double> out;
    out.reserve(pairs.size() - 1);
    for (std::size_t j = 1; j < pairs.size(); ++j) {
        out.push_back((pairs[j].reference - pairs[j - 1].reference) -
                      slope * (pairs[j].local - pairs[j - 1].local));
    }
    return out;
}

std::vector<double> reference_gaps(const SampleWindow& window) {
    if (!window.ready()) {
        throw std::invalid_argument("reference gaps need at least 2 samples");
    }
    const auto& pairs = window.pairs();
    std::vector<double> out;
    out.reserve(pairs.size() - 1);
    for (std::size_t j = 1; j < pairs.size(); ++j) {
        out.push_back(pairs[j].reference - pairs[j - 1].reference);
    }
    return out;
}

double estimate_variance(std::span<const double> residuals, std::span<const double> intervals,
                         VarianceScaling scaling) {
    if (residuals.size() != intervals.size()) {
        throw std::invalid_argument("residuals and intervals must have equal length");
    }
    if (residuals.empty()) {
        throw std::invalid_argument("variance estimation needs at least one interval");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < residuals.size(); ++j) {
        if (!(intervals[j] > 0.0)) {
            throw std::invalid_argument("reference intervals must be positive");
        }
        sum += residuals[j] * residuals[j] / intervals[j];
    }
    if (scaling == VarianceScaling::UnscaledSum) return sum;
    return sum / static_cast<double>(residuals.size());
}

double corrected_elapsed(double local_gap, double slope) {
    if (local_gap < 0.0) {
        throw std::invalid_argument("local gap must be nonnegative");
    }
    return slope * local_gap;
}

NormalParams deviation_distribution(double local_gap, double sigma2) {
    if (local_gap < 0.0 || sigma2 < 0.0) {
        throw std::invalid_argument("gap and sigma2 must be nonnegative");
    }
    return {0.0, local_gap * sigma2};
}

NormalParams local_elapsed_distribution(double true_gap, WienerParams params) {
    if (true_gap < 0.0 || params.sigma2 < 0.0) {
        throw std::invalid_argument("gap and sigma2 must be nonnegative");
    }
    return {(1.0 + params.mu) * true_gap, params.sigma2 * true_gap};
}

double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw std::invalid_argument("quantile probability must be in (0, 1)");
    }
    // Bisection on the CDF 0.5*erfc(-z/sqrt(2)); monotone, fully portable.
    double lo = -40.0;
    double hi = 40.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
        if (cdf < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double next_sync_deadline(const AssuranceSpec& spec, double sigma2, double t_last_sync) {
    if (!(spec.p_max > 0.0) || !(spec.p_max < 1.0)) {
        throw std::invalid_argument("p_max must be in (0, 1)");
    }
    if (!(spec.limit > 0.0)) {
        throw std::invalid_argument("deviation limit must be positive");
    }
    if (sigma2 < 0.0) {
        throw std::invalid_argument("sigma2 must be nonnegative");
    }
    if (sigma2 == 0.0 || std::isinf(spec.limit)) {
        return kUnboundedDeadline;
    }
    const double z = normal_quantile(1.0 - spec.p_max / 2.0);
    const double ratio = spec.limit / (std::sqrt(sigma2) * z);
    return t_last_sync + ratio * ratio;
}

std::string to_string(SyncEventKind kind) {
    switch (kind) {
        case SyncEventKind::Warmup: return "warmup";
        case SyncEventKind::Sync: return "sync";
        case SyncEventKind::Estimate: return "estimate";
        case SyncEventKind::Alert: return "alert";
    }
    return "?";
}

namespace {

bool same_value(double a, double b) {
    return a == b || (std::isnan(a) && std::isnan(b));
}

}  // namespace

bool operator==(const SyncRow& a, const SyncRow& b) {
    return same_value(a.local_t, b.local_t) && a.event == b.event &&
           same_value(a.reference_T, b.reference_T) && same_value(a.slope_est, b.slope_est) &&
           same_value(a.sigma2_est, b.sigma2_est) && same_value(a.deadline, b.deadline) &&
           a.budget == b.budget;
}

namespace {

using namespace assure::agent;

// Shared simulation state. The true clock advances tick_seconds per
// scheduler tick; the local clock follows reference elapsed = slope * local
// elapsed + Wiener noise, with slope = 1 + true drift.
struct ClockWorld {
    ClockMonitorConfig config;
    double true_now = 0.0;
    double local_now = 0.0;
    int budget = 0;
    double last_reference = std::numeric_limits<double>::quiet_NaN();
    SyncEventKind pending_read = SyncEventKind::Warmup;
    bool alerted = false;
    std::vector<SyncRow> rows;

    void advance(std::mt19937_64& rng) {
        const double h = config.tick_seconds;
        std::normal_distribution<double> noise(0.0, std::sqrt(config.true_params.sigma2 * h));
        const double eps = config.true_params.sigma2 > 0.0 ? noise(rng) : 0.0;
        const double slope = 1.0 + config.true_params.mu;
        true_now += h;
        // Hardware counters never run backwards; clamp pathological draws.
        local_now += std::max((h - eps) / slope, 1e-9);
    }
};

// Advances the simulated clocks every tick; replies to read requests with
// the current local timestamp.
struct LocalClockAgent : AgentBehavior {
    std::shared_ptr<ClockWorld> world;
    AgentId fusion;
    explicit LocalClockAgent(std::shared_ptr<ClockWorld> w) : world(std::move(w)) {}
    void on_wake(Activation& act) override {
        if (std::holds_alternative<ClockTick>(act.cause())) {
            world->advance(act.rng());
            return;
        }
        act.emit(fusion, SensorReadingMsg{world->local_now});
    }
};

// Reads the reference clock on request, debiting the budget.
struct ReferenceClockAgent : AgentBehavior {
    std::shared_ptr<ClockWorld> world;
    AgentId fusion;
    explicit ReferenceClockAgent(std::shared_ptr<ClockWorld> w) : world(std::move(w)) {}
    void on_wake(Activation& act) override {
        world->budget -= world->config.assurance.sync_cost;
        world->last_reference = world->true_now;
        SyncRow row;
        row.local_t = world->local_now;
        row.event = world->pending_read;
        row.reference_T = world->true_now;
        row.budget = world->budget;
        world->rows.push_back(row);
        act.emit(fusion, SensorReadingMsg{world->true_now});
    }
};

// Pairs local and reference readings into the sliding window and publishes
// fresh (slope, sigma2) estimates once the window is ready.
struct WindowFusionAgent : AgentBehavior {
    std::shared_ptr<ClockWorld> world;
    AgentId predict_check;
    SampleWindow window;
    std::optional<double> pending_local;
    WindowFusionAgent(std::shared_ptr<ClockWorld> w, std::size_t capacity)
        : world(std::move(w)), window(capacity) {
        // The monitor starts at a sync event, so both clocks share the time
        // origin; priming with it makes the first post-warm-up window hold
        // three points and a nondegenerate variance estimate.
        window.push({0.0, 0.0});
    }
    void on_wake(Activation& act) override {
        const auto& reading = std::get<SensorReadingMsg>(act.message().payload);
        const double value = std::get<double>(reading.value);
        if (!pending_local.has_value()) {
            pending_local = value;
            return;
        }
        window.push({*pending_local, value});
        pending_local.reset();
        if (!window.ready()) return;
        const double slope = estimate_slope(window);
        const auto eps = residuals(window, slope);
        const auto gaps = reference_gaps(window);
        double sigma2 = estimate_variance(eps, gaps, world->config.scaling);
        // Residuals of a noise-free fit are pure rounding fuzz (~1e-32 after
        // squaring); publish those as exactly zero so the no-noise contract
        // (unbounded deadline) survives floating point.
        if (sigma2 < 1e-20) sigma2 = 0.0;
        act.emit(predict_check, ClockEstimateMsg{slope, sigma2});
    }
};

// Combined prediction + check-violation agent: tracks the deviation
// distribution implied by the latest estimates and requests reference reads
// just before the assurance limit is probably violated.
struct PredictCheckAgent : AgentBehavior {
    std::shared_ptr<ClockWorld> world;
    int warmups_issued = 0;
    double second_warmup_at = 0.0;
    std::optional<ClockEstimateMsg> estimate;
    double deadline = kUnboundedDeadline;
    explicit PredictCheckAgent(std::shared_ptr<ClockWorld> w) : world(std::move(w)) {
        second_warmup_at = world->config.warmup_gap;
    }

    void request_read(Activation& act, SyncEventKind kind) {
        if (world->budget < world->config.assurance.sync_cost) {
            SyncRow row;
            row.local_t = world->local_now;
            row.event = SyncEventKind::Alert;
            row.budget = world->budget;
            world->rows.push_back(row);
            world->alerted = true;
            return;
        }
        world->pending_read = kind;
        act.broadcast(EdgeKind::Feedback, FeedbackMsg{CheckDecision::MoreData});
    }

    void on_wake(Activation& act) override {
        if (world->alerted) return;
        if (std::holds_alternative<MessageArrival>(act.cause())) {
            estimate = std::get<ClockEstimateMsg>(act.message().payload);
            deadline = next_sync_deadline(world->config.assurance, estimate->sigma2,
                                          world->local_now);
            // Variance estimated from a short history extrapolates poorly; a
            // lucky small estimate must not silence the monitor, so a finite
            // deadline never reaches past twice the span observed so far.
            // Exactly zero variance keeps the unbounded deadline: a noise-free
            // clock needs no further reads.
            if (!std::isinf(deadline)) {
                deadline = std::min(deadline, 3.0 * world->local_now);
            }
            SyncRow row;
            row.local_t = world->local_now;
            row.event = SyncEventKind::Estimate;
            row.slope_est = estimate->slope;
            row.sigma2_est = estimate->sigma2;
            row.deadline = deadline;
            row.budget = world->budget;
            world->rows.push_back(row);
            return;
        }
        if (warmups_issued == 0) {
            ++warmups_issued;
            request_read(act, SyncEventKind::Warmup);
        } else if (warmups_issued == 1 && world->local_now >= second_warmup_at) {
            ++warmups_issued;
            request_read(act, SyncEventKind::Warmup);
        } else if (warmups_issued == 2 && estimate.has_value() && world->local_now >= deadline) {
            request_read(act, SyncEventKind::Sync);
        }
    }
};

}  // namespace

ClockMonitorResult run_clock_monitor(const ClockMonitorConfig& config, std::uint64_t seed) {
    if (!(config.duration > 0.0) || !(config.tick_seconds > 0.0)) {
        throw std::invalid_argument("duration and tick_seconds must be positive");
    }
    if (config.warmup_gap < 0.0) {
        throw std::invalid_argument("warmup_gap must be nonnegative");
    }
    if (config.window_capacity < 2) {
        throw std::invalid_argument("window capacity must be at least 2");
    }
    if (config.true_params.sigma2 < 0.0) {
        throw std::invalid_argument("true sigma2 must be nonnegative");
    }
    if (config.assurance.sync_cost < 0 || config.assurance.budget < 0) {
        throw std::invalid_argument("sync_cost and budget must be nonnegative");
    }
    if (!(config.assurance.limit > 0.0)) {
        throw std::invalid_argument("deviation limit must be positive");
    }
    if (!(config.assurance.p_max > 0.0) || !(config.assurance.p_max < 1.0)) {
        throw std::invalid_argument("p_max must be in (0, 1)");
    }

    auto world = std::make_shared<ClockWorld>();
    world->config = config;
    world->budget = config.assurance.budget;

    auto local_agent = std::make_shared<LocalClockAgent>(world);
    auto reference_agent = std::make_shared<ReferenceClockAgent>(world);
    auto fusion_agent =
        std::make_shared<WindowFusionAgent>(world, static_cast<std::size_t>(config.window_capacity));
    auto check_agent = std::make_shared<PredictCheckAgent>(world);

    agent::Network net;
    const auto local = net.add_agent(agent::AgentKind::Source, local_agent, "local-clock");
    const auto reference = net.add_agent(agent::AgentKind::Source, reference_agent, "reference-clock");
    const auto fusion = net.add_agent(agent::AgentKind::Fusion, fusion_agent, "window-fusion");
    const auto check = net.add_agent(agent::AgentKind::CheckViolation, check_agent, "predict-check");
    local_agent->fusion = fusion;
    reference_agent->fusion = fusion;
    fusion_agent->predict_check = check;

    net.connect(local, fusion, agent::EdgeKind::Tuple);
    net.connect(reference, fusion, agent::EdgeKind::Tuple);
    net.connect(fusion, check, agent::EdgeKind::Tuple);
    net.connect(check, local, agent::EdgeKind::Feedback);     // request reading
    net.connect(check, reference, agent::EdgeKind::Feedback); // request reading
    net.wake_every(local, 1);
    net.wake_every(check, 1);
    net.seal();

    net.run_until(
        [&world](const agent::SchedulerView&) {
            return world->alerted || world->true_now >= world->config.duration;
        },
        seed);

    return {std::move(world->rows), world->alerted};
}

}  // namespace assure::clock
