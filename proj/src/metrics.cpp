// Metrics recomputed from traces and bound checks.

#include "macsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace macsim {

ExecutionMetrics compute_metrics(const Trace& t) {
    ExecutionMetrics m;
    m.n = t.scenario.channel.n;
    m.w = t.scenario.adversary.window;
    m.horizon = t.rounds.empty() ? 0 : t.rounds.back().round;
    m.max_queue_per_node.assign(m.n, 0);

    std::string current_stage;
    std::uint32_t current_phase = 0;
    std::uint64_t block = 0;
    auto close_block = [&] {
        if (block == 0) return;
        auto& s = m.stages[current_stage];
        ++s.runs;
        s.max_duration = std::max(s.max_duration, block);
        block = 0;
    };

    for (const auto& r : t.rounds) {
        switch (r.feedback) {
            case FeedbackKind::Silence: ++m.silent_rounds; break;
            case FeedbackKind::Heard: ++m.heard_rounds; break;
            case FeedbackKind::Collision: ++m.collision_rounds; break;
        }
        std::uint64_t total = 0;
        for (std::size_t i = 0; i < r.queue_sizes.size() && i < m.n; ++i) {
            total += r.queue_sizes[i];
            m.max_queue_per_node[i] = std::max<std::uint64_t>(m.max_queue_per_node[i], r.queue_sizes[i]);
        }
        m.max_queue_total = std::max(m.max_queue_total, total);

        const auto it = t.stage_names.find(r.stage);
        const std::string name = it != t.stage_names.end() ? it->second : std::to_string(r.stage);
        if (block > 0 && (name != current_stage || r.phase != current_phase)) close_block();
        current_stage = name;
        current_phase = r.phase;
        ++block;
        m.phases = std::max(m.phases, r.phase);
    }
    close_block();

    for (const auto& p : t.ledger) {
        ++m.injected;
        if (p.heard_at) {
            ++m.heard;
            const std::uint64_t lat = *p.heard_at - p.injected_at;
            m.max_latency = std::max(m.max_latency, lat);
            ++m.latency_histogram[lat];
            if (!t.rounds.empty()) {
                const auto span = t.rounds[*p.heard_at - 1].phase - t.rounds[p.injected_at - 1].phase;
                m.max_phase_span = std::max(m.max_phase_span, span);
            }
        } else {
            ++m.pending;
            m.max_pending_age = std::max<std::uint64_t>(m.max_pending_age, m.horizon - p.injected_at);
        }
    }

    m.final_gamma = std::accumulate(t.final_estimates.begin(), t.final_estimates.end(), std::uint64_t{0});
    m.protocol_counters = t.protocol_counters;
    return m;
}

namespace {

constexpr std::pair<BoundFamily, std::string_view> kFamilies[] = {
    {BoundFamily::Min, "min"}, {BoundFamily::NW, "nw"}, {BoundFamily::NPlusW, "n_plus_w"}};
constexpr std::pair<BoundMetric, std::string_view> kMetrics[] = {
    {BoundMetric::Latency, "latency"}, {BoundMetric::Queue, "queue"}};

}  // namespace

std::optional<BoundFamily> bound_family_from_string(std::string_view s) {
    for (const auto& [f, name] : kFamilies) {
        if (name == s) return f;
    }
    return std::nullopt;
}

std::optional<BoundMetric> bound_metric_from_string(std::string_view s) {
    for (const auto& [k, name] : kMetrics) {
        if (name == s) return k;
    }
    return std::nullopt;
}

std::string_view to_string(BoundFamily f) {
    for (const auto& [k, name] : kFamilies) {
        if (k == f) return name;
    }
    return "unknown";
}

std::string_view to_string(BoundMetric m) {
    for (const auto& [k, name] : kMetrics) {
        if (k == m) return name;
    }
    return "unknown";
}

double bound_value(BoundFamily f, NodeId n, std::uint32_t w) {
    const double dn = n;
    const double dw = w;
    switch (f) {
        case BoundFamily::Min: return std::min(dn + dw, dw * (1.0 + std::log2(dn)));
        case BoundFamily::NW: return dn * dw;
        case BoundFamily::NPlusW: return dn + dw;
    }
    throw SimError("unknown bound family");
}

BoundResult check_bound(const ExecutionMetrics& m, const BoundSpec& spec) {
    BoundResult r;
    r.value = static_cast<double>(spec.metric == BoundMetric::Latency ? m.max_latency : m.max_queue_total);
    r.bound = bound_value(spec.family, m.n, m.w);
    r.ratio = r.value / r.bound;
    r.pass = r.value <= spec.k * r.bound;
    std::ostringstream os;
    os << to_string(spec.metric) << ' ' << r.value << (r.pass ? " <= " : " > ") << spec.k << " * "
       << to_string(spec.family) << '(' << m.n << ',' << m.w << ")=" << r.bound << " (ratio " << r.ratio << ')';
    r.detail = os.str();
    return r;
}

void write_metrics_json(std::ostream& os, const ExecutionMetrics& m) {
    nlohmann::ordered_json j;
    j["n"] = m.n;
    j["w"] = m.w;
    j["horizon"] = m.horizon;
    j["injected"] = m.injected;
    j["heard"] = m.heard;
    j["pending"] = m.pending;
    j["max_queue_total"] = m.max_queue_total;
    j["max_queue_per_node"] = m.max_queue_per_node;
    j["max_latency"] = m.max_latency;
    j["max_pending_age"] = m.max_pending_age;
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (const auto& [lat, count] : m.latency_histogram) hist[std::to_string(lat)] = count;
    j["latency_histogram"] = hist;
    j["silent_rounds"] = m.silent_rounds;
    j["heard_rounds"] = m.heard_rounds;
    j["collision_rounds"] = m.collision_rounds;
    for (const auto& [name, s] : m.stages) {
        j["stage_" + name + "_runs"] = s.runs;
        j["stage_" + name + "_max_duration"] = s.max_duration;
    }
    j["phases"] = m.phases;
    j["max_phase_span"] = m.max_phase_span;
    j["final_gamma"] = m.final_gamma;
    for (const auto& [name, v] : m.protocol_counters) j["counter_" + name] = v;
    os << j.dump(1) << '\n';
}

}  // namespace macsim
