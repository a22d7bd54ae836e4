// Performance quantities derived from traces and bound predicates over them.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "macsim/engine.hpp"

namespace macsim {

struct StageStats {
    std::uint64_t runs = 0;          // maximal blocks of rounds spent in the stage
    std::uint64_t max_duration = 0;  // longest block, in rounds

    bool operator==(const StageStats&) const = default;
};

struct ExecutionMetrics {
    NodeId n = 0;
    std::uint32_t w = 0;
    Round horizon = 0;

    std::uint64_t injected = 0;
    std::uint64_t heard = 0;
    std::uint64_t pending = 0;  // still queued at the horizon

    std::uint64_t max_queue_total = 0;
    std::vector<std::uint64_t> max_queue_per_node;

    // Latency of a heard packet: heard round minus injection round.
    std::uint64_t max_latency = 0;
    std::map<std::uint64_t, std::uint64_t> latency_histogram;
    // Age at the horizon of the oldest pending packet (0 if none).
    std::uint64_t max_pending_age = 0;

    std::uint64_t silent_rounds = 0;
    std::uint64_t heard_rounds = 0;
    std::uint64_t collision_rounds = 0;

    // Keyed by stage name; a block ends when the stage or the phase changes.
    // Blocks cut off by the horizon are included.
    std::map<std::string, StageStats> stages;
    std::uint32_t phases = 0;
    // Largest number of phase boundaries between a packet's injection and hearing.
    std::uint32_t max_phase_span = 0;

    std::uint64_t final_gamma = 0;
    std::vector<std::pair<std::string, std::uint64_t>> protocol_counters;

    bool operator==(const ExecutionMetrics&) const = default;
};

// Pure function of the trace.
ExecutionMetrics compute_metrics(const Trace& t);

enum class BoundFamily : std::uint8_t { Min, NW, NPlusW };
enum class BoundMetric : std::uint8_t { Latency, Queue };

std::optional<BoundFamily> bound_family_from_string(std::string_view s);
std::optional<BoundMetric> bound_metric_from_string(std::string_view s);
std::string_view to_string(BoundFamily f);
std::string_view to_string(BoundMetric m);

// min(n + w, w (1 + lg n)), n w, or n + w. Logarithms are base 2.
double bound_value(BoundFamily f, NodeId n, std::uint32_t w);

struct BoundSpec {
    BoundFamily family = BoundFamily::Min;
    BoundMetric metric = BoundMetric::Latency;
    double k = 1.0;
};

struct BoundResult {
    bool pass = true;
    double value = 0;  // measured metric
    double bound = 0;  // bound_value without K
    double ratio = 0;  // value / bound
    std::string detail;
};

// Passes iff the metric is at most K times the bound.
BoundResult check_bound(const ExecutionMetrics& m, const BoundSpec& spec);

// Flat JSON object.
void write_metrics_json(std::ostream& os, const ExecutionMetrics& m);

}  // namespace macsim
