// Segment look-ahead and execution of the heavy-node/maverick attack.

#include "macsim/attacker.hpp"

#include <algorithm>
#include <map>

#include "macsim/metrics.hpp"

namespace macsim {

std::string_view to_string(AttackCase c) {
    switch (c) {
        case AttackCase::NeverScheduled: return "never_scheduled";
        case AttackCase::LastInFirstHalf: return "last_in_first_half";
        case AttackCase::LastInSecondHalf: return "last_in_second_half";
        case AttackCase::Unstable: return "unstable_branch";
    }
    return "unknown";
}

namespace {

constexpr bool heavy_burst_round(Round r, std::uint32_t w) { return (r - 1) % w == 0; }

void append_heavy(InjectionTrace& t, std::uint32_t w, Round from, Round to) {
    for (Round r = from; r <= to; ++r) {
        if (heavy_burst_round(r, w)) t.events.push_back({r, 1, static_cast<std::int64_t>(w - 2)});
    }
}

}  // namespace

AttackPlan attacker_heavy_maverick(const AlgorithmSpec& algorithm, NodeId n, std::uint32_t w,
                                   const AttackConfig& config) {
    if (n < 3 || w < 3) throw SimError("attacker needs n >= 3 and w >= 3");
    const Round segment = (static_cast<Round>(n - 1) * w + 1) / 2;
    if (segment < n) throw SimError("attacker needs (n - 1) w / 2 >= n");
    if (config.max_segments == 0) throw SimError("attacker needs at least one segment");

    const ChannelConfig channel{n, false};
    AdversaryType heavy_only{std::vector<std::uint32_t>(n, 0), w};
    heavy_only.shares[0] = w - 2;
    Execution exec(channel, algorithm, &heavy_only);
    if (!exec.protocol().conflict_free()) {
        throw NotConflictFree(std::string(to_string(algorithm.kind)) + " is not a conflict-free algorithm");
    }

    AttackPlan plan;
    plan.n = n;
    plan.w = w;
    plan.segment_length = segment;
    const Round half = segment / 2;

    std::vector<Injection> inj;
    for (std::uint32_t k = 0; k < config.max_segments; ++k) {
        const Round start = k * segment + 1;
        std::map<NodeId, std::vector<Round>> slots;
        for (Round r = start; r < start + segment; ++r) {
            const NodeId owner = exec.protocol().scheduled_owner(r);
            if (owner >= 2) slots[owner].push_back(r);
            inj.clear();
            if (heavy_burst_round(r, w)) inj.push_back({1, w - 2});
            if (exec.step(inj).transmitters.size() > 1) {
                throw NotConflictFree("look-ahead produced a collision in round " + std::to_string(r));
            }
        }
        plan.heavy_queue_at_segment_end.push_back(exec.queues()[0].size());

        NodeId unscheduled = 0;
        for (NodeId i = 2; i <= n && unscheduled == 0; ++i) {
            if (!slots.contains(i)) unscheduled = i;
        }
        bool repeated = false;
        for (const auto& [node, rounds] : slots) repeated = repeated || rounds.size() > 1;

        plan.segment = k + 1;
        plan.segment_start = start;
        if (unscheduled != 0) {
            plan.which = AttackCase::NeverScheduled;
            plan.maverick = unscheduled;
        } else if (repeated) {
            continue;
        } else {
            const auto last = std::max_element(slots.begin(), slots.end(), [](const auto& a, const auto& b) {
                return a.second.front() < b.second.front();
            });
            plan.maverick = last->first;
            plan.maverick_slot = last->second.front();
            plan.which = plan.maverick_slot < start + half ? AttackCase::LastInFirstHalf
                                                           : AttackCase::LastInSecondHalf;
        }
        // "Just before the segment" is its previous round; the first segment has none,
        // so the packet arrives after round 1's transmissions instead.
        plan.injection_round = plan.which == AttackCase::LastInFirstHalf ? plan.maverick_slot
                                                                         : std::max<Round>(start - 1, 1);
        break;
    }

    plan.adversary = heavy_only;
    if (plan.maverick == 0) {
        plan.which = AttackCase::Unstable;
        plan.segment = config.max_segments;
        plan.segment_start = 0;
        plan.horizon = static_cast<Round>(config.max_segments) * segment;
        append_heavy(plan.trace, w, 1, plan.horizon);
        return plan;
    }

    plan.adversary.shares[plan.maverick - 1] = 1;
    const Round follow = config.follow_rounds ? config.follow_rounds : 20ULL * n * w;
    plan.horizon = plan.injection_round + follow;
    append_heavy(plan.trace, w, 1, plan.injection_round);
    plan.trace.events.push_back({plan.injection_round, plan.maverick, 1});
    append_heavy(plan.trace, w, plan.injection_round + 1, plan.horizon);
    return plan;
}

Scenario attack_scenario(const AlgorithmSpec& algorithm, const AttackPlan& plan) {
    Scenario s;
    s.name = "attack_" + std::string(to_string(algorithm.kind)) + "_n" + std::to_string(plan.n) + "_w" +
             std::to_string(plan.w);
    s.channel = {plan.n, false};
    s.algorithm = algorithm;
    s.adversary = plan.adversary;
    s.strategy.kind = StrategyKind::Scripted;
    s.strategy.script = plan.trace;
    s.horizon = plan.horizon;
    return s;
}

AttackReport execute_attack(const AlgorithmSpec& algorithm, const AttackPlan& plan) {
    AttackReport report;
    report.plan = plan;
    report.reference = static_cast<double>(plan.n - 1) * plan.w / 4.0;
    Scenario s = attack_scenario(algorithm, plan);

    if (plan.which != AttackCase::Unstable) {
        // Find the round the targeted packet is heard, then stop the recorded run there.
        Execution exec(s.channel, s.algorithm, &s.adversary);
        ScriptedStrategy strategy(s.strategy.script);
        std::vector<Injection> inj;
        for (Round r = 1; r <= s.horizon; ++r) {
            inj.clear();
            strategy.injections(r, inj);
            exec.step(inj);
            if (r >= plan.injection_round) {
                const auto& ledger = exec.ledger();
                const auto it = std::find_if(ledger.begin(), ledger.end(),
                                             [&](const PacketRecord& p) { return p.origin == plan.maverick; });
                if (it != ledger.end() && it->heard_at) {
                    s.horizon = r;
                    break;
                }
            }
        }
    }

    report.trace = run(s);
    if (plan.which == AttackCase::Unstable) {
        const ExecutionMetrics m = compute_metrics(report.trace);
        report.delay = std::max(m.max_latency, m.max_pending_age);
        return report;
    }
    for (const auto& p : report.trace.ledger) {
        if (p.origin != plan.maverick) continue;
        report.target = p.id;
        report.heard_at = p.heard_at;
        report.pending = !p.heard_at;
        report.delay = (p.heard_at ? *p.heard_at : s.horizon) - p.injected_at;
    }
    return report;
}

}  // namespace macsim
