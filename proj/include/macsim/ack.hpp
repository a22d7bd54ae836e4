// Acknowledgment-based algorithms and a fixed round-robin schedule.

#pragma once

#include <string>
#include <vector>

#include "macsim/protocol.hpp"

namespace macsim {

// Oblivious acknowledgment-based algorithm: while processing a packet, a node
// transmits in its k-th processing round iff bit k of its transmission sequence
// is 1. The counter restarts with every new packet. Sequences repeat forever,
// so "1" is the eager algorithm and "01" pauses first.
class AckOblivious final : public Protocol {
public:
    AckOblivious(NodeId n, std::vector<std::string> sequences, AlgorithmKind kind = AlgorithmKind::AckOblivious);

    AlgorithmKind kind() const override { return kind_; }
    NodeId n() const override { return n_; }
    void decide(Round round, std::span<const NodeQueue> queues,
                std::vector<Transmission>& out) override;
    void transition(const RoundOutcome& outcome, std::span<const NodeQueue> queues) override;
    std::unique_ptr<Protocol> clone() const override { return std::make_unique<AckOblivious>(*this); }

    // Processing-round counter of node i for its current packet (0 when idle).
    std::uint64_t processing_round(NodeId i) const { return counter_.at(i - 1); }

private:
    bool bit(NodeId i, std::uint64_t k) const;

    AlgorithmKind kind_;
    NodeId n_;
    std::vector<std::string> sequences_;
    std::vector<std::uint64_t> counter_;
};

std::unique_ptr<Protocol> make_ack_eager(NodeId n);

// Node ((r - 1) mod n) + 1 owns round r and transmits iff it has a packet.
class RoundRobin final : public Protocol {
public:
    explicit RoundRobin(NodeId n);

    AlgorithmKind kind() const override { return AlgorithmKind::RoundRobin; }
    NodeId n() const override { return n_; }
    void decide(Round round, std::span<const NodeQueue> queues,
                std::vector<Transmission>& out) override;
    void audit(const RoundAudit& a) const override;
    void transition(const RoundOutcome& outcome, std::span<const NodeQueue> queues) override;
    std::unique_ptr<Protocol> clone() const override { return std::make_unique<RoundRobin>(*this); }

    bool conflict_free() const override { return true; }
    NodeId scheduled_owner(Round round) const override {
        return static_cast<NodeId>((round - 1) % n_) + 1;
    }

private:
    NodeId n_;
};

}  // namespace macsim
