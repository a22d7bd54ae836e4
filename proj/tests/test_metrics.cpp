// Metrics recomputed from traces and bound predicates.

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "support.hpp"

using namespace macsim;
using macsim::testing::make_scenario;

TEST_SUITE("metrics") {
    TEST_CASE("an idle execution has zero metrics") {
        const auto m = compute_metrics(run(make_scenario("idle", AlgorithmKind::CN, false, {0, 0}, 2,
                                                         StrategyKind::Burst, 30)));
        CHECK(m.injected == 0);
        CHECK(m.heard == 0);
        CHECK(m.pending == 0);
        CHECK(m.max_latency == 0);
        CHECK(m.max_queue_total == 0);
        CHECK(m.max_pending_age == 0);
        CHECK(m.silent_rounds == 30);
        CHECK(m.latency_histogram.empty());
    }

    TEST_CASE("eager acknowledgments under two saturated nodes") {
        const auto m = compute_metrics(run(make_scenario("jam", AlgorithmKind::AckEager, false, {1, 1}, 2,
                                                         StrategyKind::Burst, 100)));
        CHECK(m.collision_rounds >= 49);
        CHECK(m.max_queue_total >= 48);
        CHECK(m.pending >= 48);
    }

    TEST_CASE("bound values") {
        CHECK(bound_value(BoundFamily::Min, 16, 8) == doctest::Approx(24));
        CHECK(bound_value(BoundFamily::Min, 4, 1) == doctest::Approx(3));
        CHECK(bound_value(BoundFamily::NW, 16, 8) == doctest::Approx(128));
        CHECK(bound_value(BoundFamily::NPlusW, 16, 8) == doctest::Approx(24));
        CHECK(bound_value(BoundFamily::Min, 1024, 2) == doctest::Approx(22));
    }

    TEST_CASE("check_bound compares against K times the bound") {
        ExecutionMetrics m;
        m.n = 16;
        m.w = 8;
        m.max_latency = 40;
        const auto r = check_bound(m, {BoundFamily::Min, BoundMetric::Latency, 32});
        CHECK(r.pass);
        CHECK(r.bound == doctest::Approx(24));
        CHECK(r.ratio == doctest::Approx(40.0 / 24));
        CHECK_FALSE(check_bound(m, {BoundFamily::Min, BoundMetric::Latency, 1}).pass);
        m.max_queue_total = 24;
        CHECK(check_bound(m, {BoundFamily::NPlusW, BoundMetric::Queue, 1}).pass);
        m.max_queue_total = 25;
        CHECK_FALSE(check_bound(m, {BoundFamily::NPlusW, BoundMetric::Queue, 1}).pass);
    }

    TEST_CASE("names round-trip") {
        for (BoundFamily f : {BoundFamily::Min, BoundFamily::NW, BoundFamily::NPlusW}) {
            CHECK(bound_family_from_string(to_string(f)) == f);
        }
        for (BoundMetric x : {BoundMetric::Latency, BoundMetric::Queue}) {
            CHECK(bound_metric_from_string(to_string(x)) == x);
        }
        CHECK_FALSE(bound_family_from_string("log").has_value());
    }

    TEST_CASE("CN stage blocks and phases") {
        const auto m = compute_metrics(run(make_scenario("cn", AlgorithmKind::CN, false, {2, 1, 1}, 4,
                                                         StrategyKind::Burst, 400)));
        CHECK(m.stages.at("preparation").runs == 1);
        CHECK(m.stages.contains("pure"));
        CHECK(m.stages.contains("update"));
        CHECK(m.phases >= 2);
        // Three opportunities plus one round per heard upgrade in the first update stage.
        CHECK(m.stages.at("update").max_duration == 6);
        CHECK(m.final_gamma <= 4);
    }

    TEST_CASE("metrics JSON is flat") {
        const auto m = compute_metrics(run(make_scenario("cn", AlgorithmKind::CN, false, {0, 1, 0}, 2,
                                                         StrategyKind::Uniform, 50)));
        std::ostringstream os;
        write_metrics_json(os, m);
        const auto doc = nlohmann::json::parse(os.str());
        CHECK(doc["heard"] == 25);
        CHECK(doc["max_latency"] == m.max_latency);
        CHECK(doc.contains("stage_preparation_runs"));
        CHECK(doc["latency_histogram"].is_object());
    }

    TEST_CASE("property: recomputed counts match the engine and the histogram") {
        std::mt19937_64 rng(29);
        std::uint32_t index = 0;
        for (AlgorithmKind k : {AlgorithmKind::SCU, AlgorithmKind::NADS, AlgorithmKind::ADS, AlgorithmKind::CN,
                                AlgorithmKind::AckEager}) {
            for (int rep = 0; rep < 8; ++rep) {
                const Trace t = run(macsim::testing::random_scenario(rng, k, 8, 16, 800, index++));
                const auto m = compute_metrics(t);
                CHECK(m.injected == t.counters.injected);
                CHECK(m.heard == t.counters.heard);
                CHECK(m.pending == m.injected - m.heard);
                CHECK(m.silent_rounds == t.counters.silent_rounds);
                CHECK(m.heard_rounds == t.counters.heard_rounds);
                CHECK(m.collision_rounds == t.counters.collision_rounds);
                CHECK(m.max_queue_total == t.counters.max_queue_total);
                std::uint64_t total = 0, worst = 0;
                for (const auto& [latency, count] : m.latency_histogram) {
                    total += count;
                    worst = std::max(worst, latency);
                }
                CHECK(total == m.heard);
                CHECK(worst == m.max_latency);
                for (std::size_t i = 0; i < m.max_queue_per_node.size(); ++i) {
                    CHECK(m.max_queue_per_node[i] <= m.max_queue_total);
                }
                CHECK(compute_metrics(t) == m);
            }
        }
    }
}
