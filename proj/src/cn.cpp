// Colored-nodes stages, markers and the replicated transition.

#include "macsim/cn.hpp"

#include <algorithm>

namespace macsim {

namespace {

using Stage = CnShared::Stage;
using Color = CnShared::Color;

void breach(const std::string& what) { throw SimError(what); }

bool marked(const CnShared& s, NodeId i) { return s.marker[i - 1] != Color::None; }

// First discovered node by name without a marker, or 0.
NodeId first_unmarked(const CnShared& s) {
    for (NodeId i = 1; i <= static_cast<NodeId>(s.known.size()); ++i) {
        if (s.known[i - 1] && !marked(s, i)) return i;
    }
    return 0;
}

void place_marker(CnShared& s, NodeId silent) {
    Color& own = s.marker[silent - 1];
    if (own == Color::None) {
        own = Color::Green;
    } else if (own == Color::Green) {
        const NodeId target = first_unmarked(s);
        if (target == 0) breach("no discovered node left to take a red marker");
        s.marker[target - 1] = Color::Red;
    } else {
        own = Color::Green;
        const NodeId target = first_unmarked(s);
        if (target == 0) breach("no discovered node left to take the reassigned red marker");
        s.marker[target - 1] = Color::Red;
    }
}

bool all_marked(const CnShared& s) {
    return std::all_of(s.discovered.begin(), s.discovered.end(), [&](NodeId i) { return marked(s, i); });
}

void start_pure(CnShared& s) {
    s.stage = Stage::Pure;
    ++s.phase;
    std::fill(s.marker.begin(), s.marker.end(), Color::None);
    std::fill(s.color.begin(), s.color.end(), Color::None);
    s.segment_used = 0;
    s.pure_silences = 0;
}

// Index of the first red node at or after `from` in list order, cyclically.
std::optional<std::size_t> red_from(const CnShared& s, std::size_t from) {
    const std::size_t size = s.discovered.size();
    for (std::size_t k = 0; k < size; ++k) {
        const std::size_t idx = (from + k) % size;
        if (s.color[s.discovered[idx] - 1] == Color::Red) return idx;
    }
    return std::nullopt;
}

void start_makeup(CnShared& s) {
    s.stage = Stage::Makeup;
    s.segment_used = 0;
    if (auto idx = red_from(s, s.cursor)) {
        s.cursor = *idx;
    } else {
        start_pure(s);
    }
}

void discover(CnShared& s, NodeId i) {
    if (s.known[i - 1]) return;
    s.known[i - 1] = 1;
    s.discovered.push_back(i);
}

}  // namespace

NodeId CnShared::owner() const {
    switch (stage) {
        case Stage::Preparation: return prep_owner;
        case Stage::Update: return update_node;
        case Stage::Pure:
        case Stage::Makeup: return discovered.empty() ? 0 : discovered[cursor];
    }
    return 0;
}

ColoredNodes::ColoredNodes(NodeId n) : n_(n), nodes_(n) {
    if (n == 0) throw SimError("network needs at least one node");
    shared_.c = ShareEstimates(n);
    shared_.known.assign(n, 0);
    shared_.marker.assign(n, Color::None);
    shared_.color.assign(n, Color::None);
}

void ColoredNodes::set_paranoid(bool on) {
    Protocol::set_paranoid(on);
    if (on) {
        replicas_.assign(n_, shared_);
    } else {
        replicas_.clear();
    }
}

void ColoredNodes::decide(Round, std::span<const NodeQueue> queues, std::vector<Transmission>& out) {
    const NodeId o = shared_.owner();
    if (o == 0 || queues[o - 1].empty()) return;
    if (shared_.stage == Stage::Update && nodes_[o - 1].amount == 0) return;
    out.push_back({o, Message::with_packet(queues[o - 1].front())});
}

void ColoredNodes::audit(const RoundAudit& a) const {
    if (a.transmitters > 1 || a.actual.is_collision()) {
        throw InvariantBreach(a.round, "conflict-free algorithm produced a collision");
    }
}

void ColoredNodes::advance_shared(CnShared& s, const Feedback& f, NodeId n, std::vector<Upgrade>* upgrades,
                                  Tally* tally) {
    if (f.is_collision()) breach("collision under a conflict-free algorithm");
    const NodeId o = s.owner();
    const bool heard = f.is_heard();
    if (heard) {
        const Packet* p = f.heard_packet();
        if (!p || p->origin != o) breach("heard a message from a node that does not own the round");
    }

    switch (s.stage) {
        case Stage::Preparation:
            if (heard) {
                s.c.increase(o, 1);
                if (upgrades) upgrades->push_back({o, 1});
                discover(s, o);
                s.cursor = s.discovered.size() - 1;
                start_pure(s);
            } else {
                s.prep_owner = s.prep_owner % n + 1;
            }
            break;

        case Stage::Pure:
            if (heard) {
                if (++s.segment_used >= s.c[o]) {
                    s.cursor = (s.cursor + 1) % s.discovered.size();
                    s.segment_used = 0;
                }
                break;
            }
            ++s.pure_silences;
            place_marker(s, o);
            s.cursor = (s.cursor + 1) % s.discovered.size();
            s.segment_used = 0;
            if (all_marked(s)) {
                if (tally) {
                    ++tally->pure_stages_ended;
                    tally->pure_silences += s.pure_silences;
                    if (s.pure_silences < n) ++tally->pure_stages_short_of_n;
                }
                for (NodeId i : s.discovered) s.color[i - 1] = s.marker[i - 1];
                s.stage = Stage::Update;
                s.update_node = 1;
            }
            break;

        case Stage::Update:
            if (heard) {
                s.c.increase(o, 1);
                if (upgrades) upgrades->push_back({o, 1});
                discover(s, o);
                break;
            }
            if (s.update_node == n) {
                start_makeup(s);
            } else {
                ++s.update_node;
            }
            break;

        case Stage::Makeup:
            if (heard) {
                if (++s.segment_used >= s.c[o]) {
                    s.segment_used = 0;
                    if (auto next = red_from(s, (s.cursor + 1) % s.discovered.size())) s.cursor = *next;
                }
                break;
            }
            s.color[o - 1] = Color::Green;
            s.segment_used = 0;
            if (auto next = red_from(s, (s.cursor + 1) % s.discovered.size())) {
                s.cursor = *next;
            } else {
                s.cursor = (s.cursor + 1) % s.discovered.size();
                start_pure(s);
            }
            break;
    }
}

void ColoredNodes::transition(const RoundOutcome& o, std::span<const NodeQueue>) {
    upgrades_.clear();
    try {
        advance_shared(shared_, o.perceived, n_, &upgrades_, &tally_);
        for (auto& replica : replicas_) advance_shared(replica, o.perceived, n_, nullptr, nullptr);
    } catch (const InvariantBreach&) {
        throw;
    } catch (const SimError& e) {
        throw InvariantBreach(o.round, e.what());
    }

    for (const auto& inj : o.injections) nodes_[inj.node - 1].history.record(o.round, inj.count);
    for (NodeId i = 1; i <= n_; ++i) {
        auto& node = nodes_[i - 1];
        node.amount = detect_underestimation(node.history, shared_.c.gamma(), shared_.c[i]);
    }

    if (paranoid_) {
        for (NodeId i = 1; i <= n_; ++i) {
            if (!(replicas_[i - 1] == shared_)) {
                throw InvariantBreach(o.round, "replicated state of node " + std::to_string(i) + " diverged");
            }
        }
        for (NodeId i = 1; i <= n_; ++i) {
            const bool has_marker = shared_.marker[i - 1] != Color::None;
            if (has_marker && !shared_.known[i - 1]) {
                throw InvariantBreach(o.round, "undiscovered node holds a marker");
            }
        }
    }
}

std::string_view ColoredNodes::stage_name(std::uint8_t tag) const {
    switch (static_cast<Stage>(tag)) {
        case Stage::Preparation: return "preparation";
        case Stage::Pure: return "pure";
        case Stage::Update: return "update";
        case Stage::Makeup: return "makeup";
    }
    return "unknown";
}

std::vector<std::pair<std::string, std::uint64_t>> ColoredNodes::counters() const {
    return {{"phases", shared_.phase},
            {"discovered", shared_.discovered.size()},
            {"pure_stages_ended", tally_.pure_stages_ended},
            {"pure_stages_short_of_n_silences", tally_.pure_stages_short_of_n},
            {"pure_silences", tally_.pure_silences}};
}

}  // namespace macsim
