#pragma once

#include "assure/agent_core.hpp"

#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace assure::clock {

using agent::ClockPair;

// Sliding window of (local, reference) clock samples. Both coordinates must
// be strictly increasing; the oldest sample falls out at capacity.
class SampleWindow {
public:
    explicit SampleWindow(std::size_t capacity);

    void push(ClockPair sample);

    std::size_t size() const { return pairs_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool ready() const { return pairs_.size() >= 2; }  // estimation needs >= 2
    const std::deque<ClockPair>& pairs() const { return pairs_; }

private:
    std::size_t capacity_;
    std::deque<ClockPair> pairs_;
};

// Deviation-process parameters: mu is seconds of deviation per second
// (regression slope minus 1), sigma2 the infinitesimal variance in s²/s.
struct WienerParams {
    double mu = 0.0;
    double sigma2 = 0.0;
    friend bool operator==(const WienerParams&, const WienerParams&) = default;
};

struct NormalParams {
    double mean = 0.0;
    double variance = 0.0;
    friend bool operator==(const NormalParams&, const NormalParams&) = default;
};

// The mean-scaled estimator divides the residual sum by the interval count;
// UnscaledSum reproduces the bare sum for comparison.
enum class VarianceScaling { MeanScaled, UnscaledSum };

// Assurance contract: corrected local time may deviate from true time by at
// most `limit` seconds with probability above p_max; each reference read
// costs sync_cost out of budget.
struct AssuranceSpec {
    double limit = 1.0;
    double p_max = 0.05;
    int sync_cost = 1;
    int budget = 100;
    friend bool operator==(const AssuranceSpec&, const AssuranceSpec&) = default;
};

inline constexpr double kUnboundedDeadline = std::numeric_limits<double>::infinity();

// Through-origin least-squares slope of reference elapsed on local elapsed,
// both measured from the window's first sample.
double estimate_slope(const SampleWindow& window);

// Deviation drift of the local clock implied by a regression slope.
inline double deviation_drift(double slope) { return slope - 1.0; }

// Increment residuals e_j = (T_j - T_{j-1}) - slope * (t_j - t_{j-1}),
// one per consecutive pair in the window.
std::vector<double> residuals(const SampleWindow& window, double slope);

// Reference-time gaps T_j - T_{j-1}, aligned with residuals().
std::vector<double> reference_gaps(const SampleWindow& window);

// Maximum-likelihood infinitesimal variance from increment residuals and
// their reference-time gaps.
double estimate_variance(std::span<const double> residuals, std::span<const double> intervals,
                         VarianceScaling scaling = VarianceScaling::MeanScaled);

// Best estimate of true elapsed time for a local-clock gap.
double corrected_elapsed(double local_gap, double slope);

// Deviation of corrected local time from true time after `local_gap`
// seconds without a sync: zero-mean normal, variance grows linearly.
NormalParams deviation_distribution(double local_gap, double sigma2);

// Local-clock elapsed time over a true-time gap.
NormalParams local_elapsed_distribution(double true_gap, WienerParams params);

// Standard normal inverse CDF.
double normal_quantile(double p);

// Latest local time at which the deviation still respects the assurance
// spec: t_last_sync + (limit / (sigma * z))² with z the upper 1 - p_max/2
// quantile. Unbounded (infinity) when sigma2 is 0 or limit is infinite.
double next_sync_deadline(const AssuranceSpec& spec, double sigma2, double t_last_sync);

enum class SyncEventKind { Warmup, Sync, Estimate, Alert };

std::string to_string(SyncEventKind kind);

// One monitor event. Fields that do not apply to the event kind are NaN
// (reference_T on estimate rows, estimates on read rows, and so on).
struct SyncRow {
    double local_t = 0.0;
    SyncEventKind event = SyncEventKind::Warmup;
    double reference_T = std::numeric_limits<double>::quiet_NaN();
    double slope_est = std::numeric_limits<double>::quiet_NaN();
    double sigma2_est = std::numeric_limits<double>::quiet_NaN();
    double deadline = std::numeric_limits<double>::quiet_NaN();
    int budget = 0;

    friend bool operator==(const SyncRow& a, const SyncRow& b);
};

struct ClockMonitorConfig {
    WienerParams true_params;        // simulated clock's actual behavior
    AssuranceSpec assurance;
    double duration = 3600.0;        // true seconds to simulate
    int window_capacity = 32;
    double tick_seconds = 0.25;      // true seconds per scheduler tick
    double warmup_gap = 5.0;         // local seconds between the two warm-up reads
    VarianceScaling scaling = VarianceScaling::MeanScaled;
    friend bool operator==(const ClockMonitorConfig&, const ClockMonitorConfig&) = default;
};

struct ClockMonitorResult {
    std::vector<SyncRow> rows;
    bool alerted = false;  // budget could not cover a required read
    friend bool operator==(const ClockMonitorResult&, const ClockMonitorResult&) = default;
};

// Assemble the clock-assurance agent network (local + reference sources, a
// window fusion agent, a combined predict/check agent) and run it for
// config.duration simulated seconds.
ClockMonitorResult run_clock_monitor(const ClockMonitorConfig& config, std::uint64_t seed);

}  // namespace assure::clock
