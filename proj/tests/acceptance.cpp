// Acceptance gate: one pass/fail line per criterion, nonzero exit if any fails.
//
// Pinned empirical constants (calibrated on the grids below, burst and uniform):
//   NADS latency <= 32 * min(n + w, w (1 + lg n))
//   ADS  latency <= 8 * min(n + w, w (1 + lg n))
//   CN   queue <= 4 * (n + w), latency <= 4 * n w, makeup stage <= 4 * n w rounds

#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <omp.h>

#include "support.hpp"

using namespace macsim;
using namespace macsim::testing;

namespace {

constexpr double kNadsK = 32;
constexpr double kAdsK = 8;
constexpr double kCnQueueK = 4;
constexpr double kCnLatencyK = 4;
constexpr double kCnMakeupK = 4;
// Diagonal shape check: the largest size may exceed the two smallest by at most this factor.
constexpr double kDiagonalSlack = 1.25;

int failures = 0;

void report(int id, bool pass, const std::string& title, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s -- %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::uint32_t> acceptance_windows() {
    std::vector<std::uint32_t> w;
    for (std::uint32_t v = 2; v <= 64; v += 2) w.push_back(v);
    return w;
}

SweepGrid acceptance_grid(std::vector<CheckSpec> checks) {
    SweepGrid g;
    g.n = {4, 8, 16, 32, 64};
    g.w = acceptance_windows();
    g.horizon = 5000;
    g.horizon_per_nw = 10;
    g.checks = std::move(checks);
    return g;
}

struct GridRun {
    std::vector<SuiteEntry> entries;
    std::vector<ScenarioResult> results;
};

GridRun run_grid(AlgorithmKind alg, const std::vector<CheckSpec>& checks, int workers) {
    GridRun out;
    for (StrategyKind s : {StrategyKind::Burst, StrategyKind::Uniform}) {
        auto e = sweep_entries(AlgorithmSpec{alg, {}}, acceptance_grid(checks), s);
        out.entries.insert(out.entries.end(), e.begin(), e.end());
    }
    out.results = run_suite_parallel(out.entries, workers);
    return out;
}

std::string first_failure(const GridRun& g) {
    for (const auto& r : g.results) {
        if (r.error) return r.name + ": " + *r.error;
        for (const auto& c : r.checks) {
            if (!c.pass) return r.name + ": " + c.detail;
        }
    }
    return "";
}

double max_ratio(const GridRun& g, BoundFamily f, BoundMetric m) {
    double worst = 0;
    for (const auto& r : g.results) worst = std::max(worst, check_bound(r.metrics, {f, m, 1}).ratio);
    return worst;
}

// Latency ratio along n = w for n in {4, ..., 64}, burst then uniform.
bool diagonal_non_growth(const GridRun& g, std::string& detail) {
    bool ok = true;
    std::ostringstream os;
    for (StrategyKind s : {StrategyKind::Burst, StrategyKind::Uniform}) {
        std::vector<double> ratios;
        for (std::size_t i = 0; i < g.entries.size(); ++i) {
            const Scenario& sc = g.entries[i].scenario;
            if (sc.strategy.kind != s || sc.channel.n != sc.adversary.window) continue;
            ratios.push_back(check_bound(g.results[i].metrics, {BoundFamily::Min, BoundMetric::Latency, 1}).ratio);
        }
        os << to_string(s) << " diag";
        for (double r : ratios) os << ' ' << std::fixed << std::setprecision(2) << r;
        os << "; ";
        if (ratios.size() < 3 || ratios.back() > kDiagonalSlack * std::max(ratios[0], ratios[1])) ok = false;
    }
    detail = os.str();
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    const int workers = std::max(workers_from_env(), omp_get_num_procs());
    if (argc > 1 && std::strcmp(argv[1], "--print-digests") == 0) {
        for (const auto& s : golden_fixtures()) std::cout << s.name << ' ' << replay_hash(run(s)) << '\n';
        return 0;
    }

    // 1. CN conflict freedom over a randomized suite.
    std::vector<SuiteEntry> cn_random;
    {
        std::mt19937_64 rng(20240601);
        for (std::uint32_t i = 0; i < 210; ++i) {
            cn_random.push_back({random_scenario(rng, AlgorithmKind::CN, 32, 64, 20000, i), {}});
        }
        const auto t0 = std::chrono::steady_clock::now();
        const auto results = run_suite_parallel(cn_random, workers);
        const double secs = seconds_since(t0);
        std::uint64_t collisions = 0, errors = 0, max_span = 0;
        for (const auto& r : results) {
            collisions += r.metrics.collision_rounds;
            errors += r.error ? 1 : 0;
            max_span = std::max<std::uint64_t>(max_span, r.metrics.max_phase_span);
        }
        std::ostringstream os;
        os << cn_random.size() << " scenarios, " << collisions << " collision rounds, " << errors << " errors, "
           << std::fixed << std::setprecision(1) << secs << " s";
        report(1, collisions == 0 && errors == 0 && secs < 60, "CN is conflict free on a random suite", os.str());
        cn_random.clear();
        if (max_span > 2) std::printf("    note: random CN suite max phase span %llu\n", (unsigned long long)max_span);
    }

    // 4-6 grids, reused by 2 and 7.
    const auto t_nads = std::chrono::steady_clock::now();
    const GridRun nads = run_grid(AlgorithmKind::NADS, {{CheckSpec::Kind::Bound, {BoundFamily::Min, BoundMetric::Latency, kNadsK}, 0}}, workers);
    const double nads_secs = seconds_since(t_nads);
    const GridRun ads = run_grid(AlgorithmKind::ADS, {{CheckSpec::Kind::Bound, {BoundFamily::Min, BoundMetric::Latency, kAdsK}, 0}}, workers);
    const GridRun cn = run_grid(AlgorithmKind::CN,
                                {{CheckSpec::Kind::Bound, {BoundFamily::NPlusW, BoundMetric::Queue, kCnQueueK}, 0},
                                 {CheckSpec::Kind::Bound, {BoundFamily::NW, BoundMetric::Latency, kCnLatencyK}, 0},
                                 {CheckSpec::Kind::NoCollisions, {}, 0}},
                                workers);

    // 2 and 3. Estimates never exceed shares; D lists keep their invariants after every round.
    {
        std::mt19937_64 rng(777);
        std::vector<Scenario> suite;
        std::uint32_t idx = 0;
        for (AlgorithmKind k : {AlgorithmKind::SCU, AlgorithmKind::CCU, AlgorithmKind::NADS, AlgorithmKind::ADS,
                                AlgorithmKind::CN}) {
            for (std::uint32_t i = 0; i < 40; ++i) suite.push_back(random_scenario(rng, k, 16, 32, 5000, idx++));
        }
        std::vector<std::string> errors(suite.size());
        std::vector<std::uint64_t> rounds_checked(suite.size(), 0);
        const auto count = static_cast<std::int64_t>(suite.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
        for (std::int64_t i = 0; i < count; ++i) {
            Scenario s = suite[i];
            s.paranoid = i % 10 == 0;  // 20-scenario subsample with replicated-state checks
            try {
                Execution exec(s.channel, s.algorithm, &s.adversary, s.paranoid);
                auto strategy = make_strategy(s);
                std::vector<Injection> inj;
                for (Round r = 1; r <= s.horizon; ++r) {
                    inj.clear();
                    strategy->injections(r, inj);
                    exec.step(inj);
                    if (const auto* d = exec.protocol().lists()) {
                        d->check_invariants();
                        ++rounds_checked[i];
                    }
                }
            } catch (const std::exception& e) {
                errors[i] = s.name + ": " + e.what();
            }
        }
        std::string first;
        std::size_t bad = 0;
        for (const auto& e : errors) {
            if (!e.empty()) {
                ++bad;
                if (first.empty()) first = e;
            }
        }
        std::size_t grid_errors = 0;
        for (const GridRun* g : {&nads, &ads, &cn}) {
            for (const auto& r : g->results) grid_errors += r.error ? 1 : 0;
        }
        std::uint64_t checked = 0;
        for (auto c : rounds_checked) checked += c;
        std::ostringstream os;
        os << suite.size() << " random + " << nads.results.size() + ads.results.size() + cn.results.size()
           << " grid executions, " << bad + grid_errors << " assertion trips" << (first.empty() ? "" : " (" + first + ")");
        report(2, bad == 0 && grid_errors == 0, "C[i] <= s_i for SCU, CCU, NADS, ADS and CN", os.str());
        std::ostringstream os3;
        os3 << checked << " rounds checked, 20 paranoid executions, " << bad << " failures";
        report(3, bad == 0 && checked > 0, "D-list invariants after every round", os3.str());
    }

    // 4. NADS bound.
    {
        std::string diag;
        const bool shape = diagonal_non_growth(nads, diag);
        const std::string fail = first_failure(nads);
        std::ostringstream os;
        os << nads.results.size() << " runs, max ratio " << std::fixed << std::setprecision(3)
           << max_ratio(nads, BoundFamily::Min, BoundMetric::Latency) << " (K=" << kNadsK << "), " << diag
           << std::setprecision(1) << nads_secs << " s" << (fail.empty() ? "" : "; " + fail);
        report(4, fail.empty() && shape && nads_secs < 120, "NADS latency O(min(n+w, w(1+lg n)))", os.str());
    }

    // 5. ADS bound and oracle equivalence with NADS.
    {
        std::string diag;
        const bool shape = diagonal_non_growth(ads, diag);
        const std::string fail = first_failure(ads);
        bool same = true;
        for (NodeId n : {2u, 3u}) {
            const Trace a = run(oracle_fixture(n, AlgorithmKind::ADS));
            const Trace b = run(oracle_fixture(n, AlgorithmKind::NADS));
            same = same && heard_multiset(a) == heard_multiset(b) && !heard_multiset(a).empty();
        }
        std::ostringstream os;
        os << ads.results.size() << " runs, max ratio " << std::fixed << std::setprecision(3)
           << max_ratio(ads, BoundFamily::Min, BoundMetric::Latency) << " (K'=" << kAdsK << "), " << diag
           << "fixtures " << (same ? "equal" : "differ") << (fail.empty() ? "" : "; " + fail);
        report(5, fail.empty() && shape && same, "ADS latency bound and heard multiset equals NADS", os.str());
    }

    // 6. CN queue and latency bounds, stage lengths.
    {
        const std::string fail = first_failure(cn);
        std::string stage_fail;
        double worst_makeup = 0;
        std::uint64_t worst_update_excess = 0;
        for (std::size_t i = 0; i < cn.results.size(); ++i) {
            const auto& m = cn.results[i].metrics;
            const double nw = static_cast<double>(m.n) * m.w;
            if (auto it = m.stages.find("update"); it != m.stages.end()) {
                if (it->second.max_duration > m.n + m.w && stage_fail.empty()) {
                    stage_fail = cn.results[i].name + ": update stage of " + std::to_string(it->second.max_duration) + " rounds";
                }
                worst_update_excess = std::max<std::uint64_t>(worst_update_excess, it->second.max_duration);
            }
            if (auto it = m.stages.find("makeup"); it != m.stages.end()) {
                worst_makeup = std::max(worst_makeup, it->second.max_duration / nw);
                if (it->second.max_duration > kCnMakeupK * nw && stage_fail.empty()) {
                    stage_fail = cn.results[i].name + ": makeup stage of " + std::to_string(it->second.max_duration) + " rounds";
                }
            }
        }
        std::ostringstream os;
        os << cn.results.size() << " runs, max queue/(n+w) " << std::fixed << std::setprecision(3)
           << max_ratio(cn, BoundFamily::NPlusW, BoundMetric::Queue) << " (K=" << kCnQueueK << "), max latency/nw "
           << max_ratio(cn, BoundFamily::NW, BoundMetric::Latency) << " (K=" << kCnLatencyK << "), max makeup/nw "
           << worst_makeup << " (K=" << kCnMakeupK << ")" << (fail.empty() ? "" : "; " + fail)
           << (stage_fail.empty() ? "" : "; " + stage_fail);
        report(6, fail.empty() && stage_fail.empty(), "CN queues O(n+w), latency O(nw), stage lengths", os.str());
    }

    // 7. Phase residency.
    {
        std::uint32_t worst = 0;
        std::size_t with_phases = 0;
        for (const auto& r : cn.results) {
            worst = std::max(worst, r.metrics.max_phase_span);
            with_phases += r.metrics.phases >= 3 ? 1 : 0;
        }
        std::ostringstream os;
        os << with_phases << " executions with completed phases, max phase boundaries spanned " << worst;
        report(7, worst <= 2 && with_phases > 0, "CN packets span at most 2 phase boundaries", os.str());
    }

    // 8. Instability of the eager acknowledgment-based algorithm at rate 1.
    {
        const Trace t = run(make_scenario("ack_eager_jam", AlgorithmKind::AckEager, false, {1, 1}, 2, StrategyKind::Burst, 2000));
        const auto m = compute_metrics(t);
        report(8, m.pending >= 900, "AckEager queue grows at rate 1",
               "queued at horizon 2000: " + std::to_string(m.pending) + " (threshold 900)");
    }

    // 9. Pause-first oblivious sequence loses to one overloaded node.
    {
        Scenario s = make_scenario("pause_first_overload", AlgorithmKind::AckOblivious, false, {3}, 5, StrategyKind::SingleOverload, 5000);
        s.algorithm.sequences = {"01"};
        s.strategy.node = 1;
        s.strategy.num = 3;
        s.strategy.den = 5;
        const auto m = compute_metrics(run(s));
        report(9, m.pending >= 400, "pause-first sequence unstable at rate 3/5",
               "queued at horizon 5000: " + std::to_string(m.pending) + " (threshold 400)");
    }

    // 10. Heavy/maverick attack on CN.
    {
        const AlgorithmSpec alg{AlgorithmKind::CN, {}};
        const AttackPlan plan = attacker_heavy_maverick(alg, 16, 32);
        const AttackReport rep = execute_attack(alg, plan);
        std::ostringstream os;
        os << "case " << to_string(plan.which) << ", maverick " << plan.maverick << ", delay " << rep.delay
           << (rep.pending ? " (pending)" : "") << " vs (n-1)w/4 = " << rep.reference;
        report(10, plan.which != AttackCase::Unstable && rep.delay >= 120, "CN attack delay >= (n-1)w/4", os.str());
    }

    // 11. Determinism and golden digests.
    {
        bool repeat_ok = true;
        for (std::size_t i = 0; i < nads.entries.size(); i += 7) {
            repeat_ok = repeat_ok && replay_hash(run(nads.entries[i].scenario)) == nads.results[i].digest;
        }
        std::map<std::string, std::string> golden;
        std::ifstream in(std::string(MACSIM_GOLDEN_DIR) + "/digests.txt");
        std::string name, digest;
        while (in >> name >> digest) golden[name] = digest;
        std::size_t matched = 0;
        std::string mismatch;
        for (const auto& s : golden_fixtures()) {
            const std::string h1 = replay_hash(run(s));
            const std::string h2 = replay_hash(run(s));
            repeat_ok = repeat_ok && h1 == h2;
            if (golden.contains(s.name) && golden[s.name] == h1) {
                ++matched;
            } else if (mismatch.empty()) {
                mismatch = s.name + " digest " + h1;
            }
        }
        report(11, repeat_ok && matched == 5, "replay hashes are reproducible and match golden digests",
               std::to_string(matched) + "/5 golden digests match, re-runs " + (repeat_ok ? "identical" : "differ") +
                   (mismatch.empty() ? "" : "; " + mismatch));
    }

    // 12. Window validator against the brute-force scanner.
    {
        std::mt19937_64 rng(12);
        std::size_t agree = 0, violations = 0;
        for (int k = 0; k < 1000; ++k) {
            const NodeId n = std::uniform_int_distribution<NodeId>(1, 8)(rng);
            const std::uint32_t w = std::uniform_int_distribution<std::uint32_t>(1, 40)(rng);
            const Round horizon = std::uniform_int_distribution<Round>(1, 200)(rng);
            const AdversaryType t{random_shares(rng, n, w), w};
            const double density = std::uniform_real_distribution<double>(0.0, 0.3)(rng);
            const InjectionTrace trace = random_trace(rng, n, horizon + 5, density);
            const auto got = validate_trace(t, trace, horizon);
            const auto want = brute_force_violation(t, trace, horizon);
            agree += got == want ? 1 : 0;
            violations += want ? 1 : 0;
        }
        report(12, agree == 1000, "validate_trace equals brute-force scan",
               std::to_string(agree) + "/1000 agree (" + std::to_string(violations) + " with violations)");
    }

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
