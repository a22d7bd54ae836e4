// Conflict-free algorithm for channels without collision detection.
//
// After a one-time preparation stage (round robin until the first packet is
// heard), phases repeat pure -> update -> makeup:
//   pure    discovered nodes take turns with C[i]-round segments; every silent
//           owned round produces a green or red marker; the stage ends once
//           every discovered node holds a marker, which then becomes its color.
//   update  nodes 1..n each get one exclusive opportunity to announce their
//           underestimation; every heard packet raises C[i] immediately.
//   makeup  red nodes get C[i]-round segments until each has a silent round.

#pragma once

#include <vector>

#include "macsim/protocol.hpp"

namespace macsim {

struct CnShared {
    enum class Stage : std::uint8_t { Preparation, Pure, Update, Makeup };
    enum class Color : std::uint8_t { None, Green, Red };

    Stage stage = Stage::Preparation;
    ShareEstimates c;
    std::vector<NodeId> discovered;       // in discovery order
    std::vector<std::uint8_t> known;      // known[i - 1] iff node i is discovered
    std::size_t cursor = 0;               // index into `discovered`
    std::vector<Color> marker;            // pure-stage markers per node
    std::vector<Color> color;             // colors for the current phase
    std::uint32_t segment_used = 0;
    NodeId prep_owner = 1;
    NodeId update_node = 1;
    std::uint32_t phase = 0;              // 0 during preparation
    std::uint64_t pure_silences = 0;      // silences in the current pure stage

    NodeId owner() const;
    bool operator==(const CnShared&) const = default;
};

class ColoredNodes final : public Protocol {
public:
    explicit ColoredNodes(NodeId n);

    AlgorithmKind kind() const override { return AlgorithmKind::CN; }
    NodeId n() const override { return n_; }

    void decide(Round round, std::span<const NodeQueue> queues,
                std::vector<Transmission>& out) override;
    void audit(const RoundAudit& a) const override;
    void transition(const RoundOutcome& outcome, std::span<const NodeQueue> queues) override;
    std::unique_ptr<Protocol> clone() const override { return std::make_unique<ColoredNodes>(*this); }

    bool conflict_free() const override { return true; }
    NodeId scheduled_owner(Round) const override { return shared_.owner(); }
    const ShareEstimates* estimates() const override { return &shared_.c; }
    std::uint8_t stage_tag() const override { return static_cast<std::uint8_t>(shared_.stage); }
    std::string_view stage_name(std::uint8_t tag) const override;
    std::uint32_t phase() const override { return shared_.phase; }
    std::vector<std::pair<std::string, std::uint64_t>> counters() const override;
    void set_paranoid(bool on) override;

    const CnShared& shared() const noexcept { return shared_; }
    std::uint64_t underestimation(NodeId i) const { return nodes_.at(i - 1).amount; }

private:
    struct NodeState {
        InjectionHistory history;
        std::uint64_t amount = 0;
    };

    struct Tally {
        std::uint64_t pure_stages_ended = 0;
        std::uint64_t pure_stages_short_of_n = 0;  // ended after fewer than n silences
        std::uint64_t pure_silences = 0;
    };

    static void advance_shared(CnShared& s, const Feedback& perceived, NodeId n,
                               std::vector<Upgrade>* upgrades, Tally* tally);

    NodeId n_;
    CnShared shared_;
    std::vector<NodeState> nodes_;
    std::vector<CnShared> replicas_;
    Tally tally_;
};

}  // namespace macsim
