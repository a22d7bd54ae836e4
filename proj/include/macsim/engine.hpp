// Synchronous round loop and execution traces.
//
// Every round follows the same order: (1) nodes transmit or pause, (2) the
// channel resolves the round and nodes perceive the feedback, (3) the
// adversary's packets are enqueued, (4) every node makes its state transition.
// A packet injected in round t can therefore first be transmitted in t + 1.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "macsim/adversary.hpp"
#include "macsim/core.hpp"
#include "macsim/protocol.hpp"

namespace macsim {

enum class StrategyKind : std::uint8_t { Burst, Uniform, SingleOverload, Random, Scripted };

std::string_view to_string(StrategyKind k);
std::optional<StrategyKind> strategy_from_string(std::string_view s);

struct StrategySpec {
    StrategyKind kind = StrategyKind::Burst;
    NodeId node = 1;          // single_overload
    std::uint32_t num = 1;    // single_overload rate numerator
    std::uint32_t den = 1;    // single_overload rate denominator
    InjectionTrace script;    // scripted
};

struct Scenario {
    std::string name;
    ChannelConfig channel;
    AlgorithmSpec algorithm;
    AdversaryType adversary;
    StrategySpec strategy;
    Round horizon = 0;
    std::uint64_t seed = 0;   // only the random strategy draws from it
    bool paranoid = false;

    // Throws SimError describing the first inconsistency.
    void check() const;
};

std::unique_ptr<InjectionStrategy> make_strategy(const Scenario& s);

// Canonical one-line description used in trace headers and the replay hash.
std::string describe(const Scenario& s);

struct RoundRecord {
    Round round = 0;
    std::vector<NodeId> transmitters;
    FeedbackKind feedback = FeedbackKind::Silence;
    FeedbackKind perceived = FeedbackKind::Silence;
    std::vector<Injection> injections;
    std::vector<std::uint32_t> queue_sizes;  // after the state transition
    std::vector<Upgrade> upgrades;
    std::uint8_t stage = 0;    // stage the round ran in
    std::uint32_t phase = 0;   // phase the round ran in
};

struct PacketRecord {
    PacketId id = 0;
    NodeId origin = 0;
    Round injected_at = 0;
    std::optional<Round> heard_at;
};

// Counters the engine keeps while running; metrics recompute them from the trace.
struct RunCounters {
    std::uint64_t injected = 0;
    std::uint64_t heard = 0;
    std::uint64_t silent_rounds = 0;
    std::uint64_t heard_rounds = 0;
    std::uint64_t collision_rounds = 0;
    std::uint64_t max_queue_total = 0;

    bool operator==(const RunCounters&) const = default;
};

struct Trace {
    Scenario scenario;
    std::vector<RoundRecord> rounds;
    std::vector<PacketRecord> ledger;  // indexed by packet id
    RunCounters counters;
    std::map<std::uint8_t, std::string> stage_names;
    std::vector<std::pair<std::string, std::uint64_t>> protocol_counters;
    std::vector<std::uint32_t> final_estimates;  // C at the horizon, empty if unused
};

// One execution in progress. Copies are independent (the protocol is cloned),
// which is what look-ahead adversaries simulate forward with.
class Execution {
public:
    // `adversary` (may be null) is the ground truth used for online window
    // checks and for the C[i] <= s_i cross-check.
    Execution(const ChannelConfig& channel, const AlgorithmSpec& algorithm, const AdversaryType* adversary,
              bool paranoid = false);
    Execution(const Execution& other);
    Execution& operator=(const Execution& other);
    Execution(Execution&&) noexcept = default;
    Execution& operator=(Execution&&) noexcept = default;

    // Runs one round with the given injections. Throws AdversaryViolation or
    // InvariantBreach.
    const RoundRecord& step(std::span<const Injection> injections);

    Round round() const noexcept { return round_; }
    NodeId n() const noexcept { return channel_.n; }
    const Protocol& protocol() const noexcept { return *protocol_; }
    const std::vector<NodeQueue>& queues() const noexcept { return queues_; }
    const std::vector<PacketRecord>& ledger() const noexcept { return ledger_; }
    const RunCounters& counters() const noexcept { return counters_; }
    std::uint64_t queued() const noexcept { return queued_; }

    // Injection into `node` is rejected unless it fits its window share.
    const AdversaryType* adversary() const noexcept { return adversary_ ? &*adversary_ : nullptr; }

private:
    void check_window(std::span<const Injection> injections);
    void cross_check();

    ChannelConfig channel_;
    std::optional<AdversaryType> adversary_;
    std::unique_ptr<Protocol> protocol_;
    std::vector<NodeQueue> queues_;
    std::vector<PacketRecord> ledger_;
    RunCounters counters_;
    std::uint64_t queued_ = 0;
    Round round_ = 0;

    // Online window check: per node, injections of the last w rounds.
    std::vector<std::vector<std::uint32_t>> window_ring_;
    std::vector<std::uint64_t> window_sum_;

    std::vector<Transmission> sent_;
    RoundRecord record_;
};

// Runs a scenario to its horizon. Deterministic: equal scenarios give equal traces.
Trace run(const Scenario& s);

// Hex SHA-256 of the canonical serialization of a trace.
std::string replay_hash(const Trace& t);

// Round CSV: round,feedback,transmitters,queue_1..queue_n. Transmitters are
// ';'-separated names, empty when nobody transmitted.
void write_trace_csv(std::ostream& os, const Trace& t);

// Packet ledger as JSON: {"scenario": ..., "packets": [{"id", "origin",
// "injected_at", "heard_at" (null while pending)}]}.
void write_ledger_json(std::ostream& os, const Trace& t);

}  // namespace macsim
