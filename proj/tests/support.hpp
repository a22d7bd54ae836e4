// Oracles and hand-rolled generators shared by the unit, property and acceptance tests.

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "macsim/attacker.hpp"
#include "macsim/suite.hpp"

namespace macsim::testing {

// Brute-force window scan: every node, every start 1..horizon, every round of the window.
inline std::optional<Violation> brute_force_violation(const AdversaryType& t, const InjectionTrace& trace,
                                                      Round horizon) {
    std::map<std::pair<NodeId, Round>, std::int64_t> at;
    for (const auto& e : trace.events) {
        if (e.round <= horizon) at[{e.node, e.round}] += e.count;
    }
    for (NodeId i = 1; i <= t.n(); ++i) {
        for (Round start = 1; start <= horizon; ++start) {
            std::int64_t sum = 0;
            for (Round r = start; r < start + t.window; ++r) {
                const auto it = at.find({i, r});
                if (it != at.end()) sum += it->second;
            }
            if (sum > t.share(i)) return Violation{i, start};
        }
    }
    return std::nullopt;
}

// Random shares with sum <= w (sometimes exactly w).
inline std::vector<std::uint32_t> random_shares(std::mt19937_64& rng, NodeId n, std::uint32_t w) {
    std::vector<std::uint32_t> s(n, 0);
    std::uint32_t budget = std::uniform_int_distribution<std::uint32_t>(0, 3)(rng) == 0
                               ? std::uniform_int_distribution<std::uint32_t>(0, w)(rng)
                               : w;
    std::uniform_int_distribution<NodeId> pick(0, n - 1);
    // Skewed spread: a few nodes get most of the budget.
    while (budget > 0) {
        const NodeId i = pick(rng);
        const std::uint32_t take = std::uniform_int_distribution<std::uint32_t>(1, budget)(rng);
        s[i] += take;
        budget -= take;
    }
    return s;
}

// Arbitrary trace: may or may not respect the type.
inline InjectionTrace random_trace(std::mt19937_64& rng, NodeId n, Round horizon, double density) {
    InjectionTrace t;
    std::bernoulli_distribution fire(density);
    std::uniform_int_distribution<NodeId> node(1, n);
    std::uniform_int_distribution<std::int64_t> count(1, 3);
    for (Round r = 1; r <= horizon; ++r) {
        if (fire(rng)) t.events.push_back({r, node(rng), count(rng)});
    }
    return t;
}

inline Scenario make_scenario(std::string name, AlgorithmKind alg, bool cd, std::vector<std::uint32_t> shares,
                              std::uint32_t w, StrategyKind strategy, Round horizon, std::uint64_t seed = 0) {
    Scenario s;
    s.name = std::move(name);
    s.channel = {static_cast<NodeId>(shares.size()), cd};
    s.algorithm.kind = alg;
    s.adversary = {std::move(shares), w};
    s.strategy.kind = strategy;
    s.horizon = horizon;
    s.seed = seed;
    return s;
}

inline bool needs_cd(AlgorithmKind k) { return compatible(k, true) && !compatible(k, false); }

// Random scenario for the given algorithm over random small types.
inline Scenario random_scenario(std::mt19937_64& rng, AlgorithmKind alg, NodeId max_n, std::uint32_t max_w,
                                Round horizon, std::uint32_t index) {
    const NodeId n = std::uniform_int_distribution<NodeId>(1, max_n)(rng);
    const std::uint32_t w = std::uniform_int_distribution<std::uint32_t>(1, max_w)(rng);
    static constexpr StrategyKind kinds[] = {StrategyKind::Burst, StrategyKind::Uniform, StrategyKind::Random};
    const StrategyKind strategy = kinds[index % 3];
    const bool cd = alg == AlgorithmKind::ADS ? false : (needs_cd(alg) ? true : (index / 3) % 2 == 0);
    return make_scenario(std::string(to_string(alg)) + "_rand_" + std::to_string(index), alg, cd,
                         random_shares(rng, n, w), w, strategy, horizon, rng());
}

// Multiset of heard packets as (origin, injected_at) pairs.
inline std::multiset<std::pair<NodeId, Round>> heard_multiset(const Trace& t) {
    std::multiset<std::pair<NodeId, Round>> out;
    for (const auto& p : t.ledger) {
        if (p.heard_at) out.insert({p.origin, p.injected_at});
    }
    return out;
}

// Oracle fixtures shared by ADS and NADS: small scripted workloads every
// algorithm drains well before the horizon.
inline Scenario oracle_fixture(NodeId n, AlgorithmKind alg) {
    const bool cd = alg != AlgorithmKind::ADS;
    if (n == 2) {
        Scenario s = make_scenario("fixture_n2_" + std::string(to_string(alg)), alg, cd, {1, 1}, 2,
                                   StrategyKind::Scripted, 40);
        s.strategy.script.events = {{1, 1, 1}, {1, 2, 1}, {3, 2, 1}};
        return s;
    }
    Scenario s = make_scenario("fixture_n3_" + std::string(to_string(alg)), alg, cd, {1, 1, 1}, 3,
                               StrategyKind::Scripted, 60);
    s.strategy.script.events = {{1, 1, 1}, {1, 2, 1}, {1, 3, 1}, {5, 2, 1}};
    return s;
}

// Five scenarios whose replay digests are pinned in tests/golden/digests.txt.
inline std::vector<Scenario> golden_fixtures() {
    std::vector<Scenario> out;
    out.push_back(make_scenario("golden_cn", AlgorithmKind::CN, false, {0, 1, 0}, 2, StrategyKind::Uniform, 50));
    out.push_back(make_scenario("golden_ack_eager", AlgorithmKind::AckEager, false, {1, 1}, 2, StrategyKind::Burst, 100));
    out.push_back(make_scenario("golden_nads", AlgorithmKind::NADS, true, {2, 2, 2, 2}, 8, StrategyKind::Burst, 400));
    out.push_back(make_scenario("golden_ads", AlgorithmKind::ADS, false, {2, 1, 0}, 4, StrategyKind::Uniform, 300));
    out.push_back(make_scenario("golden_scu", AlgorithmKind::SCU, true, {3, 0, 4, 1, 2}, 10, StrategyKind::Random, 500, 7));
    return out;
}

}  // namespace macsim::testing
