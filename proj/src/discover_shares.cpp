// Search and cycle phases of the share-discovery algorithms.

#include "macsim/discover_shares.hpp"

#include <cmath>

namespace macsim {

namespace {

using Phase = DiscoverShared::Phase;
using Thread = DiscoverShared::Thread;
using UpdateStep = DiscoverShared::UpdateStep;
using Resolution = DiscoverShared::Resolution;

void breach(const std::string& what) { throw SimError(what); }

// Drops the current interval; the update thread ends when the stack is empty.
void pop_interval(DiscoverShared& s) {
    s.upgrader = 0;
    s.step = UpdateStep::Probe;
    if (s.stack.empty()) {
        s.thread = Thread::Main;
        return;
    }
    s.current = s.stack.back();
    s.stack.pop_back();
}

// Left half becomes current, right half waits on the stack.
void split_interval(DiscoverShared& s) {
    if (s.current.lo == s.current.hi) breach("collision inside a single-name interval");
    const NodeId mid = (s.current.lo + s.current.hi) / 2;
    s.stack.push_back({mid + 1, s.current.hi});
    s.current = {s.current.lo, mid};
    s.step = UpdateStep::Probe;
}

void upgrade(DiscoverShared& s, NodeId node, std::vector<Upgrade>* upgrades) {
    apply_upgrade(s.c, s.d, node, 1);
    if (upgrades) upgrades->push_back({node, 1});
}

NodeId heard_origin(const Feedback& f) {
    const Packet* p = f.heard_packet();
    if (!p) breach("control-only message heard where an upgrade packet was expected");
    return p->origin;
}

}  // namespace

bool prefer_cycle(NodeId n, std::uint64_t gamma) {
    const double g = static_cast<double>(gamma);
    return static_cast<double>(n) + g < g * (1.0 + std::log2(static_cast<double>(n)));
}

DiscoverShares::DiscoverShares(AlgorithmKind kind, NodeId n)
    : kind_(kind), n_(n), adaptive_(kind == AlgorithmKind::ADS), nodes_(n) {
    if (n == 0) throw SimError("network needs at least one node");
    switch (kind) {
        case AlgorithmKind::SCU: mode_ = Mode::SearchOnly; break;
        case AlgorithmKind::CCU: mode_ = Mode::CycleOnly; break;
        case AlgorithmKind::NADS:
        case AlgorithmKind::ADS: mode_ = Mode::Switching; break;
        default: throw SimError("not a share-discovery algorithm");
    }
    shared_.c = ShareEstimates(n);
    shared_.d = TransmissionLists(n);
    shared_.current = {1, n};
    if (mode_ == Mode::CycleOnly) shared_.phase = Phase::Cycle;
}

void DiscoverShares::set_paranoid(bool on) {
    Protocol::set_paranoid(on);
    if (on) {
        replicas_.assign(n_, shared_);
    } else {
        replicas_.clear();
    }
}

void DiscoverShares::decide(Round, std::span<const NodeQueue> queues, std::vector<Transmission>& out) {
    const auto& s = shared_;
    auto send_packet = [&](NodeId i) { out.push_back({i, Message::with_packet(queues[i - 1].front())}); };
    auto send_control = [&](NodeId i, ControlBits c) { out.push_back({i, Message::with_control(c)}); };

    for (NodeId i = 1; i <= n_; ++i) {
        auto& node = nodes_[i - 1];
        node.update_attempt = false;
        const bool loaded = !queues[i - 1].empty();
        const bool upgrading = wants_upgrade(i, queues);

        if (s.phase == Phase::Search) {
            if (s.thread == Thread::Main) {
                const bool scheduled = s.d.scheduled(i);
                // An underestimated loaded node is persistent and transmits every round.
                if ((scheduled && loaded) || upgrading) {
                    send_packet(i);
                } else if (adaptive_ && scheduled) {
                    send_control(i, control::kIdle);
                }
                continue;
            }
            switch (s.step) {
                case UpdateStep::Probe:
                    if (s.current.contains(i) && upgrading) send_packet(i);
                    break;
                case UpdateStep::Upgrading:
                    if (i == s.upgrader && upgrading) send_packet(i);
                    break;
                case UpdateStep::Disambiguate:
                    if (i == 1) {
                        send_control(i, control::kProbe);
                    } else if (node.transmitted) {
                        send_control(i, control::kEcho);
                    }
                    break;
            }
            continue;
        }

        switch (s.resolution) {
            case Resolution::None: {
                const bool scheduled = s.d.scheduled(i);
                const bool for_update = i == s.update_pointer && upgrading;
                if ((scheduled && loaded) || for_update || (node.persistent && loaded)) {
                    node.update_attempt = for_update;
                    send_packet(i);
                } else if (adaptive_ && scheduled) {
                    send_control(i, control::kIdle);
                }
                break;
            }
            case Resolution::UpdateSlot:
                if (i == s.update_pointer && upgrading) send_packet(i);
                break;
            case Resolution::PersistentSlot:
                if (node.slot_owner && upgrading) send_packet(i);
                break;
        }
    }
}

void DiscoverShares::audit(const RoundAudit& a) const {
    const auto& s = shared_;
    if (s.phase == Phase::Cycle) {
        if (a.transmitters > 3) {
            throw InvariantBreach(a.round, std::to_string(a.transmitters) +
                                               " concurrent transmitters under cycle-collision-update");
        }
        std::size_t persistent = 0;
        for (const auto& node : nodes_) persistent += node.persistent ? 1 : 0;
        if (persistent > 1) throw InvariantBreach(a.round, "more than one persistent node");
    }
    if (adaptive_ && a.actual.is_void() && !a.actual.is_collision() && a.transmitters == 0) {
        const bool main_schedule = (s.phase == Phase::Search && s.thread == Thread::Main) ||
                                   (s.phase == Phase::Cycle && s.resolution == Resolution::None);
        if (main_schedule && !s.d.empty()) {
            throw InvariantBreach(a.round, "silent main-schedule round with no transmitters");
        }
    }
    if (adaptive_ && a.actual.is_collision() && a.transmitters < 2) {
        throw InvariantBreach(a.round, "collision with fewer than two transmitters");
    }
}

void DiscoverShares::advance_shared(DiscoverShared& s, const Feedback& f, NodeId n, bool adaptive,
                                    bool may_switch, std::vector<Upgrade>* upgrades) {
    // Without collision detection a void round in the main schedule can only be
    // a collision, because the scheduled node sends at least a control bit.
    const bool collision_like = f.is_collision() || (adaptive && f.is_silence());

    if (s.phase == Phase::Search) {
        if (s.thread == Thread::Main) {
            if (collision_like) {
                s.thread = Thread::Update;
                s.step = UpdateStep::Probe;
                s.current = {1, n};
                s.stack.clear();
                s.upgrader = 0;
            } else if (!s.d.empty()) {
                s.d.advance_main_pointer();
            }
        } else {
            switch (s.step) {
                case UpdateStep::Probe:
                    if (f.is_heard()) {
                        s.upgrader = heard_origin(f);
                        if (!s.current.contains(s.upgrader)) breach("upgrade from outside the current interval");
                        upgrade(s, s.upgrader, upgrades);
                        s.step = UpdateStep::Upgrading;
                    } else if (f.is_collision()) {
                        split_interval(s);
                    } else if (adaptive) {
                        s.step = UpdateStep::Disambiguate;
                    } else {
                        pop_interval(s);
                    }
                    break;
                case UpdateStep::Disambiguate:
                    // Node 1 always transmits now: heard means the probe round was empty.
                    if (f.is_heard()) {
                        pop_interval(s);
                    } else if (f.is_silence()) {
                        split_interval(s);
                    } else {
                        breach("collision reported on a channel without detection");
                    }
                    break;
                case UpdateStep::Upgrading:
                    if (f.is_heard()) {
                        if (heard_origin(f) != s.upgrader) breach("upgrade sequence taken over by another node");
                        upgrade(s, s.upgrader, upgrades);
                    } else if (f.is_silence()) {
                        pop_interval(s);
                    } else {
                        breach("collision during a reserved upgrade sequence");
                    }
                    break;
            }
        }
        if (may_switch && s.thread == Thread::Main && prefer_cycle(n, s.c.gamma())) {
            s.phase = Phase::Cycle;
            s.update_pointer = 1;
            s.resolution = Resolution::None;
        }
        return;
    }

    switch (s.resolution) {
        case Resolution::None:
            if (collision_like) {
                s.resolution = Resolution::UpdateSlot;
            } else {
                if (!s.d.empty()) s.d.advance_main_pointer();
                s.update_pointer = s.update_pointer % n + 1;
            }
            break;
        case Resolution::UpdateSlot:
        case Resolution::PersistentSlot:
            if (f.is_heard()) {
                const NodeId origin = heard_origin(f);
                if (s.resolution == Resolution::UpdateSlot && origin != s.update_pointer) {
                    breach("update slot used by a node that is not current for update");
                }
                upgrade(s, origin, upgrades);
            } else if (f.is_silence()) {
                s.resolution = s.resolution == Resolution::UpdateSlot ? Resolution::PersistentSlot
                                                                      : Resolution::None;
            } else {
                breach("collision during share resolution");
            }
            break;
    }
}

void DiscoverShares::transition(const RoundOutcome& o, std::span<const NodeQueue> queues) {
    upgrades_.clear();
    const DiscoverShared before = shared_;
    const bool may_switch = mode_ == Mode::Switching;

    try {
        advance_shared(shared_, o.perceived, n_, adaptive_, may_switch, &upgrades_);
        for (auto& replica : replicas_) advance_shared(replica, o.perceived, n_, adaptive_, may_switch, nullptr);
    } catch (const InvariantBreach&) {
        throw;
    } catch (const SimError& e) {
        throw InvariantBreach(o.round, e.what());
    }

    if (before.phase == Phase::Search && before.thread == Thread::Main && shared_.thread == Thread::Update) {
        ++update_threads_;
    }
    if (before.phase == Phase::Search && before.step != UpdateStep::Disambiguate &&
        shared_.step == UpdateStep::Disambiguate) {
        ++disambiguations_;
    }
    if (before.phase == Phase::Cycle && before.resolution == Resolution::None &&
        shared_.resolution == Resolution::UpdateSlot) {
        ++resolutions_;
    }
    if (before.phase == Phase::Search && shared_.phase == Phase::Cycle) switched_at_ = o.round;

    std::vector<bool> sent(n_ + 1, false);
    for (const auto& t : o.sent) sent[t.node] = true;
    for (const auto& inj : o.injections) nodes_[inj.node - 1].history.record(o.round, inj.count);

    const bool collision_like = o.perceived.is_collision() || (adaptive_ && o.perceived.is_silence());
    for (NodeId i = 1; i <= n_; ++i) {
        auto& node = nodes_[i - 1];
        if (before.phase == Phase::Cycle) {
            if (before.resolution == Resolution::None) {
                if (collision_like) {
                    if (node.persistent) node.slot_owner = true;
                    node.persistent = false;
                } else if (o.perceived.is_heard() && node.update_attempt && sent[i]) {
                    node.persistent = true;
                }
            } else if (before.resolution == Resolution::PersistentSlot && shared_.resolution == Resolution::None) {
                node.slot_owner = false;
            }
            if (node.persistent) {
                const bool current_again = shared_.resolution == Resolution::None && shared_.update_pointer == i;
                if (current_again || queues[i - 1].empty()) node.persistent = false;
            }
        }
        node.transmitted = sent[i];
        node.amount = detect_underestimation(node.history, shared_.c.gamma(), shared_.c[i]);
    }

    if (paranoid_) {
        for (NodeId i = 1; i <= n_; ++i) {
            if (!(replicas_[i - 1] == shared_)) {
                throw InvariantBreach(o.round, "replicated state of node " + std::to_string(i) + " diverged");
            }
        }
        try {
            shared_.d.check_invariants();
        } catch (const SimError& e) {
            throw InvariantBreach(o.round, e.what());
        }
        for (NodeId i = 1; i <= n_; ++i) {
            if (shared_.d.ones(i) != shared_.c[i]) {
                throw InvariantBreach(o.round, "count of ones in D_" + std::to_string(i) + " differs from C");
            }
        }
    }
}

std::uint8_t DiscoverShares::stage_tag() const {
    if (shared_.phase == Phase::Search) return shared_.thread == Thread::Main ? 0 : 1;
    switch (shared_.resolution) {
        case Resolution::None: return 2;
        case Resolution::UpdateSlot: return 3;
        case Resolution::PersistentSlot: return 4;
    }
    return 2;
}

std::string_view DiscoverShares::stage_name(std::uint8_t tag) const {
    switch (tag) {
        case 0: return "search-main";
        case 1: return "search-update";
        case 2: return "cycle-main";
        case 3: return "cycle-update-slot";
        case 4: return "cycle-persistent-slot";
        default: return "unknown";
    }
}

std::vector<std::pair<std::string, std::uint64_t>> DiscoverShares::counters() const {
    return {{"update_threads", update_threads_},
            {"resolutions", resolutions_},
            {"disambiguations", disambiguations_},
            {"switched_at", switched_at_}};
}

}  // namespace macsim
