// Scenario files, declared checks and suite runners.
//
// A scenario file is either one scenario object or {"scenarios": [...]}:
//   {
//     "name": "ack_jam", "n": 2, "collision_detection": false,
//     "algorithm": {"kind": "AckEager", "sequences": ["01"]},   or "algorithm": "CN"
//     "adversary": {"shares": [1, 1], "window": 2},
//     "strategy": {"kind": "burst" | "uniform" | "random" | "scripted" | "single_overload",
//                  "node": 1, "num": 3, "den": 5,                 single_overload
//                  "events": [{"round": 1, "node": 1, "count": 1}]},   scripted
//     "horizon": 2000, "seed": 0, "paranoid": false,
//     "checks": [{"kind": "bound", "family": "min" | "nw" | "n_plus_w",
//                 "metric": "latency" | "queue", "K": 32},
//                {"kind": "expect_unstable", "min_queue_at_horizon": 900},
//                {"kind": "no_collisions"}]
//   }
// "adversary" may be omitted for single_overload. Unknown keys are rejected.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "macsim/engine.hpp"
#include "macsim/metrics.hpp"

namespace macsim {

// Scenario file does not match the schema; the message starts with a JSON path.
class SchemaError : public SimError {
public:
    SchemaError(const std::string& path, const std::string& what) : SimError(path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

struct CheckSpec {
    enum class Kind : std::uint8_t { Bound, ExpectUnstable, NoCollisions };
    Kind kind = Kind::Bound;
    BoundSpec bound;                          // Bound
    std::uint64_t min_queue_at_horizon = 0;   // ExpectUnstable
};

std::string describe(const CheckSpec& c);

struct SuiteEntry {
    Scenario scenario;
    std::vector<CheckSpec> checks;
};

std::vector<SuiteEntry> parse_suite(const nlohmann::json& doc);
std::vector<SuiteEntry> load_suite(const std::filesystem::path& file);

struct CheckOutcome {
    std::string check;
    bool pass = false;
    std::string detail;
};

struct ScenarioResult {
    std::string name;
    ExecutionMetrics metrics;
    std::vector<CheckOutcome> checks;
    std::string digest;            // replay hash
    std::optional<std::string> error;  // invariant breach, adversary violation, ...
    std::optional<Trace> trace;    // kept only on request

    bool ok() const;
};

struct SuiteOptions {
    bool keep_traces = false;
    bool paranoid = false;                   // forces paranoid mode on every scenario
    std::optional<std::filesystem::path> out_dir;  // per-scenario trace, ledger and metrics files
};

std::vector<CheckOutcome> evaluate_checks(const ExecutionMetrics& m, const std::vector<CheckSpec>& checks);

ScenarioResult run_entry(const SuiteEntry& e, const SuiteOptions& opts = {});

// Reference runner: scenarios one after another.
std::vector<ScenarioResult> run_suite_serial(const std::vector<SuiteEntry>& entries, const SuiteOptions& opts = {});
// OpenMP runner; results come back in input order and equal the serial ones.
std::vector<ScenarioResult> run_suite_parallel(const std::vector<SuiteEntry>& entries, int workers,
                                               const SuiteOptions& opts = {});

// MACSIM_WORKERS, default 1.
int workers_from_env();

// One row per scenario.
void write_summary_csv(std::ostream& os, const std::vector<ScenarioResult>& results);

// Sweep grid file:
//   {"n": [4, 8], "w": [4, 8], "horizon": 20000, "horizon_per_nw": 10,
//    "shares": "even" | "single", "collision_detection": true, "seed": 0,
//    "checks": [...]}
// The horizon is max(horizon, horizon_per_nw * n * w); both are optional.
// "even" spreads w over all nodes; "single" gives all of w to node 1. The
// channel defaults to the variant the algorithm needs.
struct SweepGrid {
    std::vector<NodeId> n;
    std::vector<std::uint32_t> w;
    Round horizon = 0;
    Round horizon_per_nw = 10;
    bool single_share = false;
    std::optional<bool> collision_detection;
    std::uint64_t seed = 0;
    std::vector<CheckSpec> checks;
};

SweepGrid parse_grid(const nlohmann::json& doc);
SweepGrid load_grid(const std::filesystem::path& file);

// One scenario per (n, w), n outer. Throws SimError on an empty grid.
std::vector<SuiteEntry> sweep_entries(const AlgorithmSpec& algorithm, const SweepGrid& grid, StrategyKind strategy);

// Columns: algorithm,strategy,n,w,horizon,max_latency,max_queue_total,pending,
// collision_rounds,min_bound,nw_bound,n_plus_w_bound,latency_ratio_min,
// latency_ratio_nw,queue_ratio_n_plus_w,checks_failed,status
void write_sweep_csv(std::ostream& os, const std::vector<SuiteEntry>& entries,
                     const std::vector<ScenarioResult>& results);

// Shares summing to w, spread as evenly as possible with the remainder on the lowest names.
std::vector<std::uint32_t> even_shares(NodeId n, std::uint32_t w);

}  // namespace macsim
