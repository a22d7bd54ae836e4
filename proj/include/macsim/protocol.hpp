// Broadcast algorithms as deterministic per-node state machines.

#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "macsim/adversary.hpp"
#include "macsim/core.hpp"
#include "macsim/shared_state.hpp"

namespace macsim {

enum class AlgorithmKind : std::uint8_t {
    SCU,           // Search-Collision-Update
    CCU,           // Cycle-Collision-Update
    NADS,          // Non-Adaptive-Discover-Shares (SCU, then CCU)
    ADS,           // Adaptive-Discover-Shares
    CN,            // conflict-free colored-nodes algorithm
    AckEager,      // acknowledgment based: transmit whenever loaded
    AckOblivious,  // acknowledgment based with per-node transmission sequences
    RoundRobin,    // fixed schedule: node ((r - 1) mod n) + 1 owns round r
};

std::string_view to_string(AlgorithmKind k);
std::optional<AlgorithmKind> algorithm_from_string(std::string_view s);

struct AlgorithmSpec {
    AlgorithmKind kind = AlgorithmKind::CN;
    // AckOblivious only: one pattern per node, or a single pattern for all nodes.
    // A pattern like "01" repeats forever.
    std::vector<std::string> sequences;
};

// Whether the algorithm may run on the given channel variant.
bool compatible(AlgorithmKind k, bool collision_detection);

using NodeQueue = std::deque<Packet>;

struct Upgrade {
    NodeId node = 0;
    std::uint32_t amount = 0;

    bool operator==(const Upgrade&) const = default;
};

// What a node can observe at the end of a round.
struct RoundOutcome {
    Round round = 0;
    Feedback perceived;
    std::span<const Injection> injections;
    std::span<const Transmission> sent;  // a node only looks up its own entry
};

// Engine ground truth for cross-checks; algorithms never read it to decide.
struct RoundAudit {
    Round round = 0;
    Feedback actual;
    std::size_t transmitters = 0;
    const AdversaryType* adversary = nullptr;
};

class Protocol {
public:
    virtual ~Protocol() = default;

    virtual AlgorithmKind kind() const = 0;
    virtual NodeId n() const = 0;

    // Step (1): which nodes transmit, given queues at the end of the previous round.
    virtual void decide(Round round, std::span<const NodeQueue> queues,
                        std::vector<Transmission>& out) = 0;

    // Ground-truth checks for this round, before the transition. Throws InvariantBreach.
    virtual void audit(const RoundAudit&) const {}

    // Step (4): state transition. `queues` already reflect the heard packet and
    // this round's injections.
    virtual void transition(const RoundOutcome& outcome, std::span<const NodeQueue> queues) = 0;

    virtual std::unique_ptr<Protocol> clone() const = 0;

    virtual bool conflict_free() const { return false; }
    // For conflict-free algorithms: the node owning the next round's exclusive
    // opportunity; it may transmit only if it has a packet. 0 when nobody does.
    virtual NodeId scheduled_owner(Round) const { return 0; }

    virtual const ShareEstimates* estimates() const { return nullptr; }
    virtual const TransmissionLists* lists() const { return nullptr; }

    // Upgrades applied during the last transition.
    std::span<const Upgrade> last_upgrades() const { return upgrades_; }

    // Algorithm-specific stage marker for traces (0 when the algorithm has none).
    virtual std::uint8_t stage_tag() const { return 0; }
    virtual std::string_view stage_name(std::uint8_t tag) const;
    virtual std::uint32_t phase() const { return 0; }
    // Extra counters surfaced in metrics (name, value).
    virtual std::vector<std::pair<std::string, std::uint64_t>> counters() const { return {}; }

    // Materialize per-node copies of the replicated state and compare every round.
    virtual void set_paranoid(bool on) { paranoid_ = on; }
    bool paranoid() const noexcept { return paranoid_; }

protected:
    std::vector<Upgrade> upgrades_;
    bool paranoid_ = false;
};

std::unique_ptr<Protocol> make_protocol(const AlgorithmSpec& spec, const ChannelConfig& channel);

}  // namespace macsim
