#pragma once

#include "assure/grid.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace assure::agent {

// Identifier assigned by Network::add_agent, sequential from 0. Simultaneous
// clock wakes are ordered by ascending id.
struct AgentId {
    int value = -1;
    friend auto operator<=>(const AgentId&, const AgentId&) = default;
};

enum class AgentKind { Source, Fusion, Prediction, CheckViolation, Computation, Control };

// Tuple edges carry data tuples downstream, Feedback edges carry decisions
// (paired with the distribution that produced them) back to control or
// source agents, Data edges are pull-only request channels.
enum class EdgeKind { Tuple, Feedback, Data };

// Three-way output of a check-violation agent.
enum class CheckDecision { Continue, MoreData, Change };

std::string to_string(AgentKind kind);
std::string to_string(EdgeKind kind);
std::string to_string(CheckDecision decision);

// Remaining control plan, one displacement per future step.
struct ControlPlanMsg {
    std::vector<grid::Displacement> steps;
    friend bool operator==(const ControlPlanMsg&, const ControlPlanMsg&) = default;
};

struct FeedbackMsg {
    CheckDecision decision = CheckDecision::Continue;
    friend bool operator==(const FeedbackMsg&, const FeedbackMsg&) = default;
};

// Synthesized by pull(); never emitted directly.
struct DataRequestMsg {
    AgentId target;
    friend bool operator==(const DataRequestMsg&, const DataRequestMsg&) = default;
};

// One (local clock, reference clock) sample, both in seconds.
struct ClockPair {
    double local = 0.0;
    double reference = 0.0;
    friend bool operator==(const ClockPair&, const ClockPair&) = default;
};

struct SensorReadingMsg {
    std::variant<double, grid::Cell, ClockPair> value;
    friend bool operator==(const SensorReadingMsg&, const SensorReadingMsg&) = default;
};

// Clock-model parameters estimated by a fusion agent: regression slope of
// reference elapsed on local elapsed, and infinitesimal variance.
struct ClockEstimateMsg {
    double slope = 1.0;
    double sigma2 = 0.0;
    friend bool operator==(const ClockEstimateMsg&, const ClockEstimateMsg&) = default;
};

using Payload = std::variant<grid::GridDistribution, grid::TrajectoryForecast, ControlPlanMsg,
                             FeedbackMsg, DataRequestMsg, SensorReadingMsg, ClockEstimateMsg>;

struct Message {
    Payload payload;
    long timestamp = 0;  // logical tick at emission
    friend bool operator==(const Message&, const Message&) = default;
};

struct ClockTick {
    long tick = 0;
    friend bool operator==(const ClockTick&, const ClockTick&) = default;
};

struct MessageArrival {
    AgentId from;
    friend bool operator==(const MessageArrival&, const MessageArrival&) = default;
};

using WakeCause = std::variant<ClockTick, MessageArrival>;

struct Emission {
    AgentId to;
    Message message;
    friend bool operator==(const Emission&, const Emission&) = default;
};

// One agent activation: when and why it ran plus everything it emitted
// (replies to pulls included).
struct TraceEvent {
    long tick = 0;
    AgentId agent;
    WakeCause cause;
    std::vector<Emission> emitted;
    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using Trace = std::vector<TraceEvent>;

struct SchedulerView {
    long tick = 0;
    std::size_t events = 0;  // trace length so far
};

using StopPredicate = std::function<bool(const SchedulerView&)>;

// No agent has a pending wake cause and the stop predicate is unmet.
class DeadlockError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Network;

// Handle passed to a behavior while it runs. Emissions are queued for
// delivery after the current activation; pull() runs the source handler
// synchronously and returns its reply.
class Activation {
public:
    long tick() const { return tick_; }
    AgentId self() const { return self_; }
    const WakeCause& cause() const { return cause_; }

    bool has_message() const { return message_ != nullptr; }
    const Message& message() const;

    // Send on the unique compatible edge from this agent to `to`.
    void emit(AgentId to, Payload payload);

    // Send a copy on every outgoing edge of `kind`; returns how many.
    int broadcast(EdgeKind kind, Payload payload);

    // Synchronously wake `source` with a data request; requires a Data edge
    // from this agent to `source`. Returns the source's reply.
    Message pull(AgentId source);

    // Answer the pull that woke this agent. Exactly one reply is required.
    void reply(Payload payload);

    std::mt19937_64& rng();

private:
    friend class Network;
    Activation(Network& net, AgentId self, long tick, WakeCause cause, const Message* message,
               Message* reply_out, std::size_t trace_index)
        : net_(&net), self_(self), tick_(tick), cause_(std::move(cause)), message_(message),
          reply_out_(reply_out), trace_index_(trace_index) {}

    Network* net_;
    AgentId self_;
    long tick_;
    WakeCause cause_;
    const Message* message_;
    Message* reply_out_;
    std::size_t trace_index_;
    bool replied_ = false;
};

class AgentBehavior {
public:
    virtual ~AgentBehavior() = default;
    virtual void on_wake(Activation& act) = 0;
};

// Deterministic single-threaded agent network. Build with add_agent/connect/
// wake_every, then seal() and run_until(). All randomness comes from the one
// generator seeded per run, so a fixed topology and seed reproduce the trace
// exactly.
class Network {
public:
    AgentId add_agent(AgentKind kind, std::shared_ptr<AgentBehavior> behavior,
                      std::string label = {});

    // Returns the edge's index in creation order.
    int connect(AgentId from, AgentId to, EdgeKind kind);

    // Wake `id` with a ClockTick every `interval` ticks, starting at tick 0.
    void wake_every(AgentId id, long interval);

    void seal();
    bool sealed() const { return sealed_; }

    Trace run_until(const StopPredicate& stop, std::uint64_t seed);

    int agent_count() const { return static_cast<int>(agents_.size()); }
    AgentKind kind(AgentId id) const;
    const std::string& label(AgentId id) const;

    // "label (agent N)" or "agent N" for error messages.
    std::string describe(AgentId id) const;

private:
    friend class Activation;

    struct AgentEntry {
        AgentKind kind;
        std::shared_ptr<AgentBehavior> behavior;
        std::string label;
    };
    struct Edge {
        AgentId from;
        AgentId to;
        EdgeKind kind;
    };
    struct Delivery {
        AgentId from;
        AgentId to;
        Message message;
    };

    void require_known(AgentId id) const;
    void activate(AgentId id, WakeCause cause, const Message* message, Message* reply_out);
    void emit_from(Activation& act, AgentId to, Payload payload);
    int broadcast_from(Activation& act, EdgeKind kind, const Payload& payload);
    Message pull_from(Activation& act, AgentId source);
    void reply_from(Activation& act, Payload payload);
    void record_and_queue(Activation& act, AgentId to, Payload payload);

    std::vector<AgentEntry> agents_;
    std::vector<Edge> edges_;
    std::map<AgentId, long> clock_intervals_;
    bool sealed_ = false;

    // per-run scheduler state
    long tick_ = 0;
    std::deque<Delivery> queue_;
    Trace trace_;
    std::mt19937_64 rng_;
    std::vector<char> active_;
};

}  // namespace assure::agent
