// Acknowledgment-based algorithms and round robin.

#include "macsim/ack.hpp"

#include <algorithm>

namespace macsim {

AckOblivious::AckOblivious(NodeId n, std::vector<std::string> sequences, AlgorithmKind kind)
    : kind_(kind), n_(n), counter_(n, 0) {
    if (n == 0) throw SimError("network needs at least one node");
    if (sequences.size() == 1) sequences.assign(n, sequences.front());
    if (sequences.size() != n) {
        throw SimError("need one transmission sequence per node or a single shared one");
    }
    for (const auto& s : sequences) {
        if (s.empty() || s.find_first_not_of("01") != std::string::npos) {
            throw SimError("transmission sequence must be a nonempty string of 0/1: '" + s + "'");
        }
    }
    sequences_ = std::move(sequences);
}

bool AckOblivious::bit(NodeId i, std::uint64_t k) const {
    const auto& s = sequences_[i - 1];
    return s[(k - 1) % s.size()] == '1';
}

void AckOblivious::decide(Round, std::span<const NodeQueue> queues, std::vector<Transmission>& out) {
    for (NodeId i = 1; i <= n_; ++i) {
        auto& k = counter_[i - 1];
        if (queues[i - 1].empty()) {
            k = 0;
            continue;
        }
        if (k == 0) k = 1;
        if (bit(i, k)) out.push_back({i, Message::with_packet(queues[i - 1].front())});
    }
}

void AckOblivious::transition(const RoundOutcome& o, std::span<const NodeQueue> queues) {
    upgrades_.clear();
    std::vector<bool> sent(n_ + 1, false);
    for (const auto& t : o.sent) sent[t.node] = true;
    for (NodeId i = 1; i <= n_; ++i) {
        auto& k = counter_[i - 1];
        const bool acknowledged = sent[i] && o.perceived.is_heard();
        if (k == 0 || acknowledged) {
            // Initial state; a packet present now is started in the next round.
            k = queues[i - 1].empty() ? 0 : 1;
        } else {
            ++k;
        }
    }
}

std::unique_ptr<Protocol> make_ack_eager(NodeId n) {
    return std::make_unique<AckOblivious>(n, std::vector<std::string>{"1"}, AlgorithmKind::AckEager);
}

RoundRobin::RoundRobin(NodeId n) : n_(n) {
    if (n == 0) throw SimError("network needs at least one node");
}

void RoundRobin::decide(Round round, std::span<const NodeQueue> queues, std::vector<Transmission>& out) {
    const NodeId o = scheduled_owner(round);
    if (!queues[o - 1].empty()) out.push_back({o, Message::with_packet(queues[o - 1].front())});
}

void RoundRobin::audit(const RoundAudit& a) const {
    if (a.transmitters > 1) throw InvariantBreach(a.round, "conflict-free schedule produced a collision");
}

void RoundRobin::transition(const RoundOutcome&, std::span<const NodeQueue>) { upgrades_.clear(); }

}  // namespace macsim
