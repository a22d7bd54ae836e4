// Scenario parsing, check evaluation, suite runners and sweeps.

#include "macsim/suite.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace macsim {

namespace {

using nlohmann::json;

void allow_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> keys) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (auto k : keys) known = known || k == key;
        if (!known) throw SchemaError(path + "." + key, "unknown key");
    }
}

const json& require(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) throw SchemaError(path + "." + key, "missing required key");
    return j.at(key);
}

std::uint64_t as_uint(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
        throw SchemaError(path, "expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

std::uint32_t as_u32(const json& j, const std::string& path) {
    const auto v = as_uint(j, path);
    if (v > UINT32_MAX) throw SchemaError(path, "value too large");
    return static_cast<std::uint32_t>(v);
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw SchemaError(path, "expected a boolean");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw SchemaError(path, "expected a string");
    return j.get<std::string>();
}

double as_positive(const json& j, const std::string& path) {
    if (!j.is_number() || j.get<double>() <= 0) throw SchemaError(path, "expected a positive number");
    return j.get<double>();
}

AlgorithmSpec parse_algorithm(const json& j, const std::string& path) {
    AlgorithmSpec a;
    std::string kind;
    if (j.is_string()) {
        kind = j.get<std::string>();
    } else {
        allow_keys(j, path, {"kind", "sequences"});
        kind = as_string(require(j, path, "kind"), path + ".kind");
        if (j.contains("sequences")) {
            const auto& seq = j.at("sequences");
            if (!seq.is_array()) throw SchemaError(path + ".sequences", "expected an array of strings");
            for (std::size_t i = 0; i < seq.size(); ++i) {
                a.sequences.push_back(as_string(seq[i], path + ".sequences[" + std::to_string(i) + "]"));
            }
        }
    }
    const auto k = algorithm_from_string(kind);
    if (!k) throw SchemaError(path + (j.is_string() ? "" : ".kind"), "unknown algorithm '" + kind + "'");
    a.kind = *k;
    if (a.kind == AlgorithmKind::AckOblivious && a.sequences.empty()) {
        throw SchemaError(path + ".sequences", "AckOblivious needs transmission sequences");
    }
    return a;
}

AdversaryType parse_adversary(const json& j, const std::string& path) {
    allow_keys(j, path, {"shares", "window"});
    AdversaryType t;
    const auto& shares = require(j, path, "shares");
    if (!shares.is_array()) throw SchemaError(path + ".shares", "expected an array of non-negative integers");
    for (std::size_t i = 0; i < shares.size(); ++i) {
        t.shares.push_back(as_u32(shares[i], path + ".shares[" + std::to_string(i) + "]"));
    }
    t.window = as_u32(require(j, path, "window"), path + ".window");
    try {
        t.check();
    } catch (const SimError& e) {
        throw SchemaError(path, e.what());
    }
    return t;
}

StrategySpec parse_strategy(const json& j, const std::string& path, NodeId n) {
    StrategySpec s;
    std::string kind;
    if (j.is_string()) {
        kind = j.get<std::string>();
    } else {
        allow_keys(j, path, {"kind", "node", "num", "den", "events"});
        kind = as_string(require(j, path, "kind"), path + ".kind");
    }
    const auto k = strategy_from_string(kind);
    if (!k) throw SchemaError(path, "unknown strategy '" + kind + "'");
    s.kind = *k;
    if (s.kind == StrategyKind::SingleOverload) {
        if (!j.is_object()) throw SchemaError(path, "single_overload needs node, num and den");
        s.node = as_u32(require(j, path, "node"), path + ".node");
        s.num = as_u32(require(j, path, "num"), path + ".num");
        s.den = as_u32(require(j, path, "den"), path + ".den");
        if (s.node < 1 || s.node > n) throw SchemaError(path + ".node", "node outside the network");
        if (s.den == 0 || 2ULL * s.num <= s.den || s.num > s.den) {
            throw SchemaError(path, "single_overload needs 1/2 < num/den <= 1");
        }
    }
    if (s.kind == StrategyKind::Scripted) {
        if (!j.is_object() || !j.contains("events")) throw SchemaError(path + ".events", "scripted strategy needs events");
        const auto& ev = j.at("events");
        if (!ev.is_array()) throw SchemaError(path + ".events", "expected an array");
        Round last = 0;
        for (std::size_t i = 0; i < ev.size(); ++i) {
            const std::string p = path + ".events[" + std::to_string(i) + "]";
            allow_keys(ev[i], p, {"round", "node", "count"});
            InjectionEvent e;
            e.round = as_uint(require(ev[i], p, "round"), p + ".round");
            e.node = as_u32(require(ev[i], p, "node"), p + ".node");
            e.count = static_cast<std::int64_t>(as_uint(require(ev[i], p, "count"), p + ".count"));
            if (e.round == 0) throw SchemaError(p + ".round", "rounds start at 1");
            if (e.round < last) throw SchemaError(p + ".round", "rounds must ascend");
            if (e.node < 1 || e.node > n) throw SchemaError(p + ".node", "node outside the network");
            last = e.round;
            s.script.events.push_back(e);
        }
    } else if (j.is_object() && j.contains("events")) {
        throw SchemaError(path + ".events", "only the scripted strategy takes events");
    }
    return s;
}

CheckSpec parse_check(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    const std::string kind = as_string(require(j, path, "kind"), path + ".kind");
    CheckSpec c;
    if (kind == "bound") {
        allow_keys(j, path, {"kind", "family", "metric", "K"});
        c.kind = CheckSpec::Kind::Bound;
        const auto family = as_string(require(j, path, "family"), path + ".family");
        const auto f = bound_family_from_string(family);
        if (!f) throw SchemaError(path + ".family", "unknown bound family '" + family + "'");
        c.bound.family = *f;
        const auto metric = as_string(require(j, path, "metric"), path + ".metric");
        const auto m = bound_metric_from_string(metric);
        if (!m) throw SchemaError(path + ".metric", "unknown metric '" + metric + "'");
        c.bound.metric = *m;
        c.bound.k = as_positive(require(j, path, "K"), path + ".K");
    } else if (kind == "expect_unstable") {
        allow_keys(j, path, {"kind", "min_queue_at_horizon"});
        c.kind = CheckSpec::Kind::ExpectUnstable;
        c.min_queue_at_horizon = as_uint(require(j, path, "min_queue_at_horizon"), path + ".min_queue_at_horizon");
    } else if (kind == "no_collisions") {
        allow_keys(j, path, {"kind"});
        c.kind = CheckSpec::Kind::NoCollisions;
    } else {
        throw SchemaError(path + ".kind", "unknown check '" + kind + "'");
    }
    return c;
}

SuiteEntry parse_entry(const json& j, const std::string& path) {
    allow_keys(j, path, {"name", "n", "collision_detection", "algorithm", "adversary", "strategy", "horizon", "seed",
                         "paranoid", "checks"});
    SuiteEntry e;
    Scenario& s = e.scenario;
    s.name = j.contains("name") ? as_string(j.at("name"), path + ".name") : path;
    s.channel.n = as_u32(require(j, path, "n"), path + ".n");
    if (s.channel.n == 0) throw SchemaError(path + ".n", "at least one node is needed");
    if (j.contains("collision_detection")) {
        s.channel.collision_detection = as_bool(j.at("collision_detection"), path + ".collision_detection");
    }
    s.algorithm = parse_algorithm(require(j, path, "algorithm"), path + ".algorithm");
    s.strategy = parse_strategy(require(j, path, "strategy"), path + ".strategy", s.channel.n);
    if (j.contains("adversary")) {
        s.adversary = parse_adversary(j.at("adversary"), path + ".adversary");
    } else if (s.strategy.kind == StrategyKind::SingleOverload) {
        s.adversary = SingleOverloadStrategy(s.strategy.node, s.strategy.num, s.strategy.den).adversary_type(s.channel.n);
    } else {
        throw SchemaError(path + ".adversary", "missing required key");
    }
    if (s.adversary.n() != s.channel.n) {
        throw SchemaError(path + ".adversary.shares", "expected " + std::to_string(s.channel.n) + " shares");
    }
    s.horizon = as_uint(require(j, path, "horizon"), path + ".horizon");
    if (s.horizon == 0) throw SchemaError(path + ".horizon", "horizon must be positive");
    if (j.contains("seed")) s.seed = as_uint(j.at("seed"), path + ".seed");
    if (j.contains("paranoid")) s.paranoid = as_bool(j.at("paranoid"), path + ".paranoid");
    if (j.contains("checks")) {
        const auto& checks = j.at("checks");
        if (!checks.is_array()) throw SchemaError(path + ".checks", "expected an array");
        for (std::size_t i = 0; i < checks.size(); ++i) {
            e.checks.push_back(parse_check(checks[i], path + ".checks[" + std::to_string(i) + "]"));
        }
    }
    try {
        s.check();
    } catch (const SchemaError&) {
        throw;
    } catch (const SimError& err) {
        throw SchemaError(path, err.what());
    }
    if (s.strategy.kind == StrategyKind::Scripted) {
        if (const auto v = validate_trace(s.adversary, s.strategy.script, s.horizon)) {
            throw SchemaError(path + ".strategy.events",
                              "injections exceed the share of node " + std::to_string(v->node) +
                                  " in the window starting at round " + std::to_string(v->window_start));
        }
    }
    return e;
}

}  // namespace

std::string describe(const CheckSpec& c) {
    std::ostringstream os;
    switch (c.kind) {
        case CheckSpec::Kind::Bound:
            os << "bound " << to_string(c.bound.metric) << " <= " << c.bound.k << "*" << to_string(c.bound.family);
            break;
        case CheckSpec::Kind::ExpectUnstable: os << "expect_unstable queue >= " << c.min_queue_at_horizon; break;
        case CheckSpec::Kind::NoCollisions: os << "no_collisions"; break;
    }
    return os.str();
}

std::vector<SuiteEntry> parse_suite(const json& doc) {
    std::vector<SuiteEntry> out;
    if (doc.is_object() && doc.contains("scenarios")) {
        allow_keys(doc, "$", {"scenarios"});
        const auto& list = doc.at("scenarios");
        if (!list.is_array()) throw SchemaError("$.scenarios", "expected an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            out.push_back(parse_entry(list[i], "$.scenarios[" + std::to_string(i) + "]"));
        }
    } else {
        out.push_back(parse_entry(doc, "$"));
    }
    return out;
}

std::vector<SuiteEntry> load_suite(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw SimError("cannot read scenario file " + file.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError("$", std::string("invalid JSON: ") + e.what());
    }
    return parse_suite(doc);
}

bool ScenarioResult::ok() const {
    if (error) return false;
    for (const auto& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

std::vector<CheckOutcome> evaluate_checks(const ExecutionMetrics& m, const std::vector<CheckSpec>& checks) {
    std::vector<CheckOutcome> out;
    for (const auto& c : checks) {
        CheckOutcome o{describe(c), false, {}};
        switch (c.kind) {
            case CheckSpec::Kind::Bound: {
                const auto r = check_bound(m, c.bound);
                o.pass = r.pass;
                o.detail = r.detail;
                break;
            }
            case CheckSpec::Kind::ExpectUnstable:
                o.pass = m.pending >= c.min_queue_at_horizon;
                o.detail = "queued at horizon " + std::to_string(m.pending);
                break;
            case CheckSpec::Kind::NoCollisions:
                o.pass = m.collision_rounds == 0;
                o.detail = "collision rounds " + std::to_string(m.collision_rounds);
                break;
        }
        out.push_back(std::move(o));
    }
    return out;
}

ScenarioResult run_entry(const SuiteEntry& e, const SuiteOptions& opts) {
    ScenarioResult r;
    r.name = e.scenario.name;
    Scenario s = e.scenario;
    s.paranoid = s.paranoid || opts.paranoid;
    try {
        Trace t = run(s);
        r.metrics = compute_metrics(t);
        r.checks = evaluate_checks(r.metrics, e.checks);
        r.digest = replay_hash(t);
        if (opts.out_dir) {
            const auto base = *opts.out_dir / s.name;
            std::ofstream csv(base.string() + ".trace.csv");
            write_trace_csv(csv, t);
            std::ofstream ledger(base.string() + ".ledger.json");
            write_ledger_json(ledger, t);
            std::ofstream metrics(base.string() + ".metrics.json");
            write_metrics_json(metrics, r.metrics);
            if (!csv || !ledger || !metrics) throw SimError("cannot write output files for " + s.name);
        }
        if (opts.keep_traces) r.trace = std::move(t);
    } catch (const std::exception& ex) {
        r.error = ex.what();
    }
    return r;
}

std::vector<ScenarioResult> run_suite_serial(const std::vector<SuiteEntry>& entries, const SuiteOptions& opts) {
    std::vector<ScenarioResult> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(run_entry(e, opts));
    return out;
}

std::vector<ScenarioResult> run_suite_parallel(const std::vector<SuiteEntry>& entries, int workers,
                                               const SuiteOptions& opts) {
    std::vector<ScenarioResult> out(entries.size());
    const auto count = static_cast<std::int64_t>(entries.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(workers, 1))
    for (std::int64_t i = 0; i < count; ++i) out[i] = run_entry(entries[i], opts);
    return out;
}

int workers_from_env() {
    const char* v = std::getenv("MACSIM_WORKERS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1) throw SimError("MACSIM_WORKERS must be a positive integer");
    return static_cast<int>(n);
}

void write_summary_csv(std::ostream& os, const std::vector<ScenarioResult>& results) {
    os << "name,n,w,horizon,injected,heard,pending,max_queue_total,max_latency,collision_rounds,checks_failed,status,"
          "replay_hash\n";
    for (const auto& r : results) {
        std::size_t failed = 0;
        for (const auto& c : r.checks) failed += c.pass ? 0 : 1;
        const auto& m = r.metrics;
        os << r.name << ',' << m.n << ',' << m.w << ',' << m.horizon << ',' << m.injected << ',' << m.heard << ','
           << m.pending << ',' << m.max_queue_total << ',' << m.max_latency << ',' << m.collision_rounds << ','
           << failed << ',' << (r.error ? "error" : (r.ok() ? "pass" : "fail")) << ',' << r.digest << '\n';
    }
}

SweepGrid parse_grid(const json& doc) {
    allow_keys(doc, "$", {"n", "w", "horizon", "horizon_per_nw", "shares", "collision_detection", "seed", "checks"});
    SweepGrid g;
    for (const char* axis : {"n", "w"}) {
        const std::string path = std::string("$.") + axis;
        const auto& list = require(doc, "$", axis);
        if (!list.is_array()) throw SchemaError(path, "expected an array of positive integers");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto v = as_u32(list[i], path + "[" + std::to_string(i) + "]");
            if (v == 0) throw SchemaError(path + "[" + std::to_string(i) + "]", "expected a positive integer");
            (axis[0] == 'n' ? g.n : g.w).push_back(v);
        }
    }
    if (doc.contains("horizon")) g.horizon = as_uint(doc.at("horizon"), "$.horizon");
    if (doc.contains("horizon_per_nw")) g.horizon_per_nw = as_uint(doc.at("horizon_per_nw"), "$.horizon_per_nw");
    if (doc.contains("shares")) {
        const auto mode = as_string(doc.at("shares"), "$.shares");
        if (mode != "even" && mode != "single") throw SchemaError("$.shares", "expected \"even\" or \"single\"");
        g.single_share = mode == "single";
    }
    if (doc.contains("collision_detection")) {
        g.collision_detection = as_bool(doc.at("collision_detection"), "$.collision_detection");
    }
    if (doc.contains("seed")) g.seed = as_uint(doc.at("seed"), "$.seed");
    if (doc.contains("checks")) {
        const auto& checks = doc.at("checks");
        if (!checks.is_array()) throw SchemaError("$.checks", "expected an array");
        for (std::size_t i = 0; i < checks.size(); ++i) {
            g.checks.push_back(parse_check(checks[i], "$.checks[" + std::to_string(i) + "]"));
        }
    }
    return g;
}

SweepGrid load_grid(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw SimError("cannot read grid file " + file.string());
    try {
        return parse_grid(json::parse(in));
    } catch (const json::parse_error& e) {
        throw SchemaError("$", std::string("invalid JSON: ") + e.what());
    }
}

std::vector<SuiteEntry> sweep_entries(const AlgorithmSpec& algorithm, const SweepGrid& grid, StrategyKind strategy) {
    if (grid.n.empty() || grid.w.empty()) throw SimError("sweep grid is empty");
    if (strategy == StrategyKind::Scripted || strategy == StrategyKind::SingleOverload) {
        throw SimError("sweep supports the burst, uniform and random strategies");
    }
    const bool cd = grid.collision_detection.value_or(compatible(algorithm.kind, true) &&
                                                      !compatible(algorithm.kind, false));
    std::vector<SuiteEntry> out;
    for (NodeId n : grid.n) {
        for (std::uint32_t w : grid.w) {
            SuiteEntry e;
            Scenario& s = e.scenario;
            s.name = std::string(to_string(algorithm.kind)) + "_" + std::string(to_string(strategy)) + "_n" +
                     std::to_string(n) + "_w" + std::to_string(w);
            s.channel = {n, cd};
            s.algorithm = algorithm;
            s.adversary.window = w;
            if (grid.single_share) {
                s.adversary.shares.assign(n, 0);
                s.adversary.shares[0] = w;
            } else {
                s.adversary.shares = even_shares(n, w);
            }
            s.strategy.kind = strategy;
            s.horizon = std::max<Round>(grid.horizon, grid.horizon_per_nw * n * w);
            s.seed = grid.seed;
            e.checks = grid.checks;
            s.check();
            out.push_back(std::move(e));
        }
    }
    return out;
}

void write_sweep_csv(std::ostream& os, const std::vector<SuiteEntry>& entries,
                     const std::vector<ScenarioResult>& results) {
    os << "algorithm,strategy,n,w,horizon,max_latency,max_queue_total,pending,collision_rounds,min_bound,nw_bound,"
          "n_plus_w_bound,latency_ratio_min,latency_ratio_nw,queue_ratio_n_plus_w,checks_failed,status\n";
    for (std::size_t i = 0; i < entries.size() && i < results.size(); ++i) {
        const Scenario& s = entries[i].scenario;
        const auto& r = results[i];
        const auto& m = r.metrics;
        const NodeId n = s.channel.n;
        const std::uint32_t w = s.adversary.window;
        const double bmin = bound_value(BoundFamily::Min, n, w);
        const double bnw = bound_value(BoundFamily::NW, n, w);
        const double bnpw = bound_value(BoundFamily::NPlusW, n, w);
        std::size_t failed = 0;
        for (const auto& c : r.checks) failed += c.pass ? 0 : 1;
        std::ostringstream row;
        row.setf(std::ios::fixed);
        row.precision(4);
        row << to_string(s.algorithm.kind) << ',' << to_string(s.strategy.kind) << ',' << n << ',' << w << ','
            << s.horizon << ',' << m.max_latency << ',' << m.max_queue_total << ',' << m.pending << ','
            << m.collision_rounds << ',' << bmin << ',' << bnw << ',' << bnpw << ',' << m.max_latency / bmin << ','
            << m.max_latency / bnw << ',' << m.max_queue_total / bnpw << ',' << failed << ','
            << (r.error ? "error" : (r.ok() ? "pass" : "fail")) << '\n';
        os << row.str();
    }
}

std::vector<std::uint32_t> even_shares(NodeId n, std::uint32_t w) {
    std::vector<std::uint32_t> s(n, w / n);
    for (std::uint32_t i = 0; i < w % n; ++i) ++s[i];
    return s;
}

}  // namespace macsim
