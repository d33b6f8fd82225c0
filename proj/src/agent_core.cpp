#include "assure/agent_core.hpp"

#include <algorithm>

namespace assure::agent {

std::string to_string(AgentKind kind) {
    switch (kind) {
        case AgentKind::Source: return "Source";
        case AgentKind::Fusion: return "Fusion";
        case AgentKind::Prediction: return "Prediction";
        case AgentKind::CheckViolation: return "CheckViolation";
        case AgentKind::Computation: return "Computation";
        case AgentKind::Control: return "Control";
    }
    return "?";
}

std::string to_string(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::Tuple: return "Tuple";
        case EdgeKind::Feedback: return "Feedback";
        case EdgeKind::Data: return "Data";
    }
    return "?";
}

std::string to_string(CheckDecision decision) {
    switch (decision) {
        case CheckDecision::Continue: return "Continue";
        case CheckDecision::MoreData: return "MoreData";
        case CheckDecision::Change: return "Change";
    }
    return "?";
}

namespace {

// Feedback streams carry a decision, optionally preceded by the distribution
// that produced it. Tuple streams carry anything except decisions and
// request tokens. Data edges never carry pushed traffic.
bool payload_allowed(EdgeKind kind, const Payload& payload) {
    const bool is_feedback = std::holds_alternative<FeedbackMsg>(payload);
    const bool is_request = std::holds_alternative<DataRequestMsg>(payload);
    switch (kind) {
        case EdgeKind::Tuple: return !is_feedback && !is_request;
        case EdgeKind::Feedback:
            return is_feedback || std::holds_alternative<grid::GridDistribution>(payload);
        case EdgeKind::Data: return false;
    }
    return false;
}

}  // namespace

const Message& Activation::message() const {
    if (message_ == nullptr) {
        throw std::logic_error("activation was caused by a clock tick; no message available");
    }
    return *message_;
}

void Activation::emit(AgentId to, Payload payload) { net_->emit_from(*this, to, std::move(payload)); }

int Activation::broadcast(EdgeKind kind, Payload payload) {
    return net_->broadcast_from(*this, kind, payload);
}

Message Activation::pull(AgentId source) { return net_->pull_from(*this, source); }

void Activation::reply(Payload payload) { net_->reply_from(*this, std::move(payload)); }

std::mt19937_64& Activation::rng() { return net_->rng_; }

AgentId Network::add_agent(AgentKind kind, std::shared_ptr<AgentBehavior> behavior,
                           std::string label) {
    if (sealed_) {
        throw std::logic_error("cannot register an agent on a sealed network");
    }
    if (!behavior) {
        throw std::invalid_argument("agent behavior must not be null");
    }
    for (const auto& entry : agents_) {
        if (entry.behavior.get() == behavior.get()) {
            throw std::invalid_argument("behavior instance is already registered");
        }
    }
    agents_.push_back({kind, std::move(behavior), std::move(label)});
    return {static_cast<int>(agents_.size()) - 1};
}

void Network::require_known(AgentId id) const {
    if (id.value < 0 || id.value >= static_cast<int>(agents_.size())) {
        throw std::invalid_argument("unknown agent id " + std::to_string(id.value));
    }
}

int Network::connect(AgentId from, AgentId to, EdgeKind kind) {
    if (sealed_) {
        throw std::logic_error("cannot connect agents on a sealed network");
    }
    require_known(from);
    require_known(to);
    if (from == to) {
        throw std::invalid_argument("self-loop on " + describe(from) + " is not allowed");
    }
    edges_.push_back({from, to, kind});
    return static_cast<int>(edges_.size()) - 1;
}

void Network::wake_every(AgentId id, long interval) {
    if (sealed_) {
        throw std::logic_error("cannot subscribe agents on a sealed network");
    }
    require_known(id);
    if (interval < 1) {
        throw std::invalid_argument("wake interval must be at least 1 tick");
    }
    clock_intervals_[id] = interval;
}

void Network::seal() {
    if (sealed_) {
        throw std::logic_error("network is already sealed");
    }
    for (int i = 0; i < static_cast<int>(agents_.size()); ++i) {
        if (agents_[i].kind != AgentKind::CheckViolation) continue;
        const AgentId id{i};
        const bool can_output =
            std::any_of(edges_.begin(), edges_.end(), [&](const Edge& e) {
                return e.from == id &&
                       (e.kind == EdgeKind::Feedback || e.kind == EdgeKind::Data);
            });
        if (!can_output) {
            throw std::invalid_argument("check-violation agent " + describe(id) +
                                        " has no outgoing Feedback or Data edge");
        }
    }
    sealed_ = true;
}

AgentKind Network::kind(AgentId id) const {
    require_known(id);
    return agents_[id.value].kind;
}

const std::string& Network::label(AgentId id) const {
    require_known(id);
    return agents_[id.value].label;
}

std::string Network::describe(AgentId id) const {
    const std::string num = "agent " + std::to_string(id.value);
    if (id.value < 0 || id.value >= static_cast<int>(agents_.size()) ||
        agents_[id.value].label.empty()) {
        return num;
    }
    return agents_[id.value].label + " (" + num + ")";
}

void Network::activate(AgentId id, WakeCause cause, const Message* message, Message* reply_out) {
    if (active_[id.value]) {
        throw std::runtime_error("re-entrant activation of " + describe(id));
    }
    active_[id.value] = 1;
    trace_.push_back(TraceEvent{tick_, id, cause, {}});
    Activation act(*this, id, tick_, std::move(cause), message, reply_out, trace_.size() - 1);
    try {
        agents_[id.value].behavior->on_wake(act);
    } catch (...) {
        active_[id.value] = 0;
        throw;
    }
    active_[id.value] = 0;
    if (reply_out != nullptr && !act.replied_) {
        throw std::runtime_error("source contract breach: " + describe(id) +
                                 " returned no reply to a pull");
    }
}

void Network::record_and_queue(Activation& act, AgentId to, Payload payload) {
    Message message{std::move(payload), tick_};
    trace_[act.trace_index_].emitted.push_back({to, message});
    queue_.push_back({act.self_, to, std::move(message)});
}

void Network::emit_from(Activation& act, AgentId to, Payload payload) {
    require_known(to);
    const Edge* match = nullptr;
    bool kind_blocked = false;
    for (const Edge& e : edges_) {
        if (e.from != act.self_ || e.to != to) continue;
        if (e.kind == EdgeKind::Data) continue;  // pull-only
        if (!payload_allowed(e.kind, payload)) {
            kind_blocked = true;
            continue;
        }
        match = &e;
        break;
    }
    if (match == nullptr) {
        if (kind_blocked) {
            throw std::invalid_argument("payload not allowed on any edge from " +
                                        describe(act.self_) + " to " + describe(to));
        }
        throw std::invalid_argument("no edge from " + describe(act.self_) + " to " +
                                    describe(to));
    }
    record_and_queue(act, to, std::move(payload));
}

int Network::broadcast_from(Activation& act, EdgeKind kind, const Payload& payload) {
    if (kind == EdgeKind::Data) {
        throw std::invalid_argument("Data edges are pull-only; nothing can be pushed on them");
    }
    int sent = 0;
    for (const Edge& e : edges_) {
        if (e.from != act.self_ || e.kind != kind) continue;
        if (!payload_allowed(e.kind, payload)) {
            throw std::invalid_argument("payload not allowed on " + to_string(kind) +
                                        " edge from " + describe(act.self_) + " to " +
                                        describe(e.to));
        }
        record_and_queue(act, e.to, payload);
        ++sent;
    }
    return sent;
}

Message Network::pull_from(Activation& act, AgentId source) {
    require_known(source);
    const bool has_edge = std::any_of(edges_.begin(), edges_.end(), [&](const Edge& e) {
        return e.from == act.self_ && e.to == source && e.kind == EdgeKind::Data;
    });
    if (!has_edge) {
        throw std::invalid_argument("pull requires a Data edge from " + describe(act.self_) +
                                    " to " + describe(source));
    }
    Message request{DataRequestMsg{source}, tick_};
    Message reply;
    activate(source, MessageArrival{act.self_}, &request, &reply);
    return reply;
}

void Network::reply_from(Activation& act, Payload payload) {
    if (act.reply_out_ == nullptr) {
        throw std::logic_error(describe(act.self_) +
                               " called reply() outside a pull activation");
    }
    if (act.replied_) {
        throw std::logic_error(describe(act.self_) + " replied twice to one pull");
    }
    Message message{std::move(payload), tick_};
    const AgentId requester = std::get<MessageArrival>(act.cause_).from;
    trace_[act.trace_index_].emitted.push_back({requester, message});
    *act.reply_out_ = std::move(message);
    act.replied_ = true;
}

Trace Network::run_until(const StopPredicate& stop, std::uint64_t seed) {
    if (!sealed_) {
        throw std::logic_error("network must be sealed before it can run");
    }
    if (!stop) {
        throw std::invalid_argument("stop predicate must be callable");
    }
    tick_ = 0;
    queue_.clear();
    trace_.clear();
    rng_.seed(seed);
    active_.assign(agents_.size(), 0);

    bool stopped = false;
    auto should_stop = [&] {
        if (!stopped && stop(SchedulerView{tick_, trace_.size()})) stopped = true;
        return stopped;
    };

    while (!should_stop()) {
        if (clock_intervals_.empty() && queue_.empty()) {
            std::string quiescent;
            for (int i = 0; i < static_cast<int>(agents_.size()); ++i) {
                if (!quiescent.empty()) quiescent += ", ";
                quiescent += describe(AgentId{i});
            }
            throw DeadlockError("deadlock at tick " + std::to_string(tick_) +
                                ": stop predicate unmet and no pending wakes; quiescent agents: " +
                                quiescent);
        }
        for (const auto& [id, interval] : clock_intervals_) {
            if (tick_ % interval != 0) continue;
            if (should_stop()) break;
            activate(id, ClockTick{tick_}, nullptr, nullptr);
        }
        while (!stopped && !queue_.empty()) {
            if (should_stop()) break;
            Delivery d = std::move(queue_.front());
            queue_.pop_front();
            activate(d.to, MessageArrival{d.from}, &d.message, nullptr);
        }
        if (stopped) break;
        ++tick_;
    }
    return std::move(trace_);
}

}  // namespace assure::agent
