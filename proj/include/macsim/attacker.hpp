// Heavy-node/maverick attacker against deterministic conflict-free algorithms.
//
// Node 1 is heavy with share w - 2 and is injected at full capacity in bursts.
// The other nodes are mavericks. The attacker simulates the heavy-only execution
// one segment of ceil((n - 1) w / 2) rounds at a time, looks at which mavericks
// the algorithm schedules inside the segment, and places a single maverick
// packet where it must wait for a large part of a segment.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "macsim/engine.hpp"

namespace macsim {

// The algorithm put two transmitters in one round, or does not claim to be conflict free.
class NotConflictFree : public SimError {
public:
    using SimError::SimError;
};

enum class AttackCase : std::uint8_t {
    NeverScheduled,    // a maverick has no slot in the segment; inject before it
    LastInFirstHalf,   // every maverick once, last slot in the first half; inject after that slot
    LastInSecondHalf,  // every maverick once, last slot in the second half; inject before the segment
    Unstable,          // every inspected segment scheduled some maverick twice
};

std::string_view to_string(AttackCase c);

struct AttackConfig {
    std::uint32_t max_segments = 50;
    // Rounds simulated after the maverick injection; 0 means 20 n w.
    Round follow_rounds = 0;
};

struct AttackPlan {
    NodeId n = 0;
    std::uint32_t w = 0;
    Round segment_length = 0;
    AttackCase which = AttackCase::Unstable;
    std::uint32_t segment = 0;      // 1-based index of the chosen segment
    Round segment_start = 0;
    NodeId maverick = 0;            // 0 in the unstable case
    Round maverick_slot = 0;        // the maverick's slot in the segment, if any
    Round injection_round = 0;
    InjectionTrace trace;           // heavy bursts up to the horizon plus the maverick packet
    AdversaryType adversary;        // heavy w - 2, chosen maverick 1, others 0
    Round horizon = 0;
    // Heavy-node queue at the end of every inspected segment.
    std::vector<std::uint64_t> heavy_queue_at_segment_end;
};

// Throws SimError unless n >= 3, w >= 3 and (n - 1) w / 2 >= n. Throws
// NotConflictFree for algorithms that are not conflict free.
AttackPlan attacker_heavy_maverick(const AlgorithmSpec& algorithm, NodeId n, std::uint32_t w,
                                   const AttackConfig& config = {});

struct AttackReport {
    AttackPlan plan;
    Trace trace;
    std::optional<PacketId> target;
    std::optional<Round> heard_at;
    // Targeted packet delay; a lower bound when the packet is still pending.
    // In the unstable case: the largest heavy-node packet delay instead.
    std::uint64_t delay = 0;
    bool pending = false;
    double reference = 0;  // (n - 1) w / 4
};

// Runs the planned execution and stops once the targeted packet is heard or at
// the plan's horizon.
AttackReport execute_attack(const AlgorithmSpec& algorithm, const AttackPlan& plan);

Scenario attack_scenario(const AlgorithmSpec& algorithm, const AttackPlan& plan);

}  // namespace macsim
