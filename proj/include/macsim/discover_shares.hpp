// Share-discovery algorithms built on the lists D:
//   SCU   binary search over name intervals after each collision,
//   CCU   circular update list, persistent nodes and two-slot resolution,
//   NADS  SCU while n + gamma >= gamma (1 + lg n), then CCU for good,
//   ADS   NADS simulated without collision detection using control bits.

#pragma once

#include <vector>

#include "macsim/protocol.hpp"

namespace macsim {

struct Interval {
    NodeId lo = 1;
    NodeId hi = 1;

    bool contains(NodeId i) const noexcept { return lo <= i && i <= hi; }
    bool operator==(const Interval&) const = default;
};

// Common knowledge of every node running a share-discovery algorithm.
struct DiscoverShared {
    enum class Phase : std::uint8_t { Search, Cycle };
    enum class Thread : std::uint8_t { Main, Update };
    enum class UpdateStep : std::uint8_t { Probe, Upgrading, Disambiguate };
    enum class Resolution : std::uint8_t { None, UpdateSlot, PersistentSlot };

    ShareEstimates c;
    TransmissionLists d;
    Phase phase = Phase::Search;

    // Search phase.
    Thread thread = Thread::Main;
    UpdateStep step = UpdateStep::Probe;
    Interval current;
    std::vector<Interval> stack;
    NodeId upgrader = 0;

    // Cycle phase.
    NodeId update_pointer = 1;
    Resolution resolution = Resolution::None;

    bool operator==(const DiscoverShared&) const = default;
};

// Rule for leaving the search phase: n + gamma < gamma (1 + lg n).
bool prefer_cycle(NodeId n, std::uint64_t gamma);

class DiscoverShares final : public Protocol {
public:
    enum class Mode : std::uint8_t { SearchOnly, CycleOnly, Switching };

    DiscoverShares(AlgorithmKind kind, NodeId n);

    AlgorithmKind kind() const override { return kind_; }
    NodeId n() const override { return n_; }

    void decide(Round round, std::span<const NodeQueue> queues,
                std::vector<Transmission>& out) override;
    void audit(const RoundAudit& a) const override;
    void transition(const RoundOutcome& outcome, std::span<const NodeQueue> queues) override;
    std::unique_ptr<Protocol> clone() const override { return std::make_unique<DiscoverShares>(*this); }

    const ShareEstimates* estimates() const override { return &shared_.c; }
    const TransmissionLists* lists() const override { return &shared_.d; }
    std::uint8_t stage_tag() const override;
    std::string_view stage_name(std::uint8_t tag) const override;
    std::vector<std::pair<std::string, std::uint64_t>> counters() const override;
    void set_paranoid(bool on) override;

    const DiscoverShared& shared() const noexcept { return shared_; }
    std::uint64_t underestimation(NodeId i) const { return nodes_.at(i - 1).amount; }
    bool persistent(NodeId i) const { return nodes_.at(i - 1).persistent; }
    bool adaptive() const noexcept { return adaptive_; }
    // Round in which the search phase handed over to the cycle phase (0 if never).
    Round switched_at() const noexcept { return switched_at_; }

private:
    struct NodeState {
        InjectionHistory history;
        std::uint64_t amount = 0;      // detected underestimation
        bool persistent = false;       // cycle phase only; search persistence is derived
        bool slot_owner = false;       // was persistent when the resolving collision hit
        bool transmitted = false;      // transmitted in the previous round
        bool update_attempt = false;   // previous transmission was as current for update

        bool operator==(const NodeState&) const = default;
    };

    // The replicated transition. Reads nothing private to any node.
    static void advance_shared(DiscoverShared& s, const Feedback& perceived, NodeId n, bool adaptive,
                               bool may_switch, std::vector<Upgrade>* upgrades);

    bool wants_upgrade(NodeId i, std::span<const NodeQueue> queues) const {
        return nodes_[i - 1].amount > 0 && !queues[i - 1].empty();
    }

    AlgorithmKind kind_;
    NodeId n_;
    bool adaptive_;
    Mode mode_;
    DiscoverShared shared_;
    std::vector<NodeState> nodes_;
    std::vector<DiscoverShared> replicas_;  // paranoid mode only
    Round switched_at_ = 0;
    std::uint64_t update_threads_ = 0;
    std::uint64_t resolutions_ = 0;
    std::uint64_t disambiguations_ = 0;
};

}  // namespace macsim
