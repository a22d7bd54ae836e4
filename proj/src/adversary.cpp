// Window checks and injection strategies.

#include "macsim/adversary.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace macsim {

std::uint64_t AdversaryType::burstiness() const noexcept {
    return std::accumulate(shares.begin(), shares.end(), std::uint64_t{0});
}

void AdversaryType::check() const {
    if (window == 0) throw SimError("adversary window must be positive");
    if (shares.empty()) throw SimError("adversary needs at least one node");
    if (burstiness() > window) {
        throw SimError("adversary shares sum to " + std::to_string(burstiness()) +
                       " which exceeds the window " + std::to_string(window) +
                       " (sum of s_i must be <= w)");
    }
}

std::uint64_t InjectionTrace::total() const noexcept {
    std::uint64_t sum = 0;
    for (const auto& e : events) sum += static_cast<std::uint64_t>(std::max<std::int64_t>(e.count, 0));
    return sum;
}

std::optional<Violation> validate_trace(const AdversaryType& type, const InjectionTrace& trace,
                                        Round horizon) {
    const NodeId n = type.n();
    const Round w = type.window;
    std::vector<std::vector<std::pair<Round, std::uint64_t>>> per_node(n);
    for (const auto& e : trace.events) {
        if (e.node < 1 || e.node > n) {
            throw MalformedTrace("injection into node " + std::to_string(e.node) +
                                 " outside [1, " + std::to_string(n) + "]");
        }
        if (e.count < 0) throw MalformedTrace("negative injection count");
        if (e.round < 1) throw MalformedTrace("injection at round 0");
        if (e.round > horizon || e.count == 0) continue;
        per_node[e.node - 1].emplace_back(e.round, static_cast<std::uint64_t>(e.count));
    }

    for (NodeId i = 1; i <= n; ++i) {
        auto& events = per_node[i - 1];
        if (events.empty()) continue;
        std::sort(events.begin(), events.end());
        std::vector<Round> rounds;
        std::vector<std::uint64_t> prefix{0};
        for (const auto& [r, c] : events) {
            if (!rounds.empty() && rounds.back() == r) {
                prefix.back() += c;
            } else {
                rounds.push_back(r);
                prefix.push_back(prefix.back() + c);
            }
        }
        // The windowed count only rises when an event enters at the right edge,
        // so the earliest violating start is one of max(1, e - w + 1).
        const std::uint64_t cap = type.share(i);
        for (std::size_t k = 0; k < rounds.size(); ++k) {
            const Round start = rounds[k] >= w ? rounds[k] - w + 1 : 1;
            const Round end = start + w - 1;
            const auto lo = std::lower_bound(rounds.begin(), rounds.end(), start) - rounds.begin();
            const auto hi = std::upper_bound(rounds.begin(), rounds.end(), end) - rounds.begin();
            if (prefix[hi] - prefix[lo] > cap) return Violation{i, start};
        }
    }
    return std::nullopt;
}

void write_injection_csv(std::ostream& os, const InjectionTrace& trace) {
    os << "round,node,count\n";
    for (const auto& e : trace.events) os << e.round << ',' << e.node << ',' << e.count << '\n';
}

InjectionTrace read_injection_csv(std::istream& is, NodeId n) {
    std::string line;
    if (!std::getline(is, line) || line != "round,node,count") {
        throw MalformedTrace("injection CSV must start with header round,node,count");
    }
    InjectionTrace trace;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::int64_t round = 0, node = 0, count = 0;
        char c1 = 0, c2 = 0;
        if (!(row >> round >> c1 >> node >> c2 >> count) || c1 != ',' || c2 != ',') {
            throw MalformedTrace("line " + std::to_string(line_no) + ": expected round,node,count");
        }
        if (round < 1 || node < 1 || static_cast<std::uint64_t>(node) > n || count < 0) {
            throw MalformedTrace("line " + std::to_string(line_no) + ": value out of range");
        }
        if (!trace.events.empty() && static_cast<Round>(round) < trace.events.back().round) {
            throw MalformedTrace("line " + std::to_string(line_no) + ": rounds must ascend");
        }
        trace.events.push_back({static_cast<Round>(round), static_cast<NodeId>(node), count});
    }
    return trace;
}

BurstStrategy::BurstStrategy(AdversaryType type) : type_(std::move(type)) { type_.check(); }

void BurstStrategy::injections(Round round, std::vector<Injection>& out) {
    if ((round - 1) % type_.window != 0) return;
    for (NodeId i = 1; i <= type_.n(); ++i) {
        if (type_.share(i) > 0) out.push_back({i, type_.share(i)});
    }
}

UniformStrategy::UniformStrategy(AdversaryType type) : type_(std::move(type)) {
    type_.check();
    hits_.resize(type_.n());
    for (NodeId i = 1; i <= type_.n(); ++i) {
        auto& hit = hits_[i - 1];
        hit.assign(type_.window, 0);
        const std::uint64_t s = type_.share(i);
        for (std::uint64_t k = 0; k < s; ++k) hit[k * type_.window / s] = 1;
    }
}

void UniformStrategy::injections(Round round, std::vector<Injection>& out) {
    const auto offset = (round - 1) % type_.window;
    for (NodeId i = 1; i <= type_.n(); ++i) {
        if (hits_[i - 1][offset]) out.push_back({i, 1});
    }
}

SingleOverloadStrategy::SingleOverloadStrategy(NodeId node, std::uint32_t a, std::uint32_t b)
    : node_(node), a_(a), b_(b) {
    if (node == 0) throw SimError("single_overload: node names start at 1");
    if (b == 0 || 2 * static_cast<std::uint64_t>(a) <= b || a > b) {
        throw SimError("single_overload: rate a/b must satisfy 1/2 < a/b <= 1");
    }
}

void SingleOverloadStrategy::injections(Round round, std::vector<Injection>& out) {
    if ((round - 1) % b_ < a_) out.push_back({node_, 1});
}

AdversaryType SingleOverloadStrategy::adversary_type(NodeId n) const {
    if (node_ > n) throw SimError("single_overload: node outside the network");
    AdversaryType t{std::vector<std::uint32_t>(n, 0), b_};
    t.shares[node_ - 1] = a_;
    return t;
}

RandomValidStrategy::RandomValidStrategy(AdversaryType type, std::uint64_t seed)
    : type_(std::move(type)), rng_(seed) {
    type_.check();
    ring_.assign(type_.n(), std::vector<std::uint32_t>(type_.window, 0));
    in_window_.assign(type_.n(), 0);
}

void RandomValidStrategy::injections(Round round, std::vector<Injection>& out) {
    const auto slot = (round - 1) % type_.window;
    for (NodeId i = 1; i <= type_.n(); ++i) {
        auto& ring = ring_[i - 1];
        // Drop the round that just left the window [round - w + 1, round].
        in_window_[i - 1] -= ring[slot];
        ring[slot] = 0;
        const std::uint32_t allowance = type_.share(i) - in_window_[i - 1];
        if (allowance == 0) continue;
        const std::uint64_t draw = rng_();
        if ((draw & 1) == 0) continue;
        const auto count = static_cast<std::uint32_t>(1 + (draw >> 1) % allowance);
        ring[slot] = count;
        in_window_[i - 1] += count;
        out.push_back({i, count});
    }
}

ScriptedStrategy::ScriptedStrategy(InjectionTrace trace) : trace_(std::move(trace)) {
    std::stable_sort(trace_.events.begin(), trace_.events.end(),
                     [](const InjectionEvent& a, const InjectionEvent& b) { return a.round < b.round; });
    for (const auto& e : trace_.events) {
        if (e.count < 0 || e.node == 0 || e.round == 0) throw MalformedTrace("bad scripted event");
    }
}

void ScriptedStrategy::injections(Round round, std::vector<Injection>& out) {
    while (cursor_ < trace_.events.size() && trace_.events[cursor_].round < round) ++cursor_;
    while (cursor_ < trace_.events.size() && trace_.events[cursor_].round == round) {
        const auto& e = trace_.events[cursor_++];
        if (e.count > 0) out.push_back({e.node, static_cast<std::uint32_t>(e.count)});
    }
}

InjectionTrace materialize(InjectionStrategy& strategy, Round horizon) {
    InjectionTrace trace;
    std::vector<Injection> buf;
    for (Round r = 1; r <= horizon; ++r) {
        buf.clear();
        strategy.injections(r, buf);
        for (const auto& inj : buf) trace.events.push_back({r, inj.node, inj.count});
    }
    return trace;
}

}  // namespace macsim
