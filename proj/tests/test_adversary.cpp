// Window adversaries: validation, built-in strategies and their properties.

#include <doctest.h>

#include <sstream>

#include "support.hpp"

using namespace macsim;
using namespace macsim::testing;

namespace {

// Rounds (with multiplicity) in which `node` receives packets.
std::vector<Round> hits(InjectionStrategy& s, NodeId node, Round horizon) {
    std::vector<Round> out;
    std::vector<Injection> inj;
    for (Round r = 1; r <= horizon; ++r) {
        inj.clear();
        s.injections(r, inj);
        for (const auto& i : inj) {
            if (i.node == node) out.insert(out.end(), i.count, r);
        }
    }
    return out;
}

}  // namespace

TEST_SUITE("adversary") {
    TEST_CASE("adversary type derived quantities") {
        const AdversaryType t{{3, 1, 0}, 8};
        CHECK(t.burstiness() == 4);
        CHECK(t.rate() == doctest::Approx(0.5));
        CHECK_NOTHROW(t.check());
        CHECK_THROWS_AS((AdversaryType{{5, 4}, 8}.check()), SimError);
        CHECK_THROWS_AS((AdversaryType{{1}, 0}.check()), SimError);
    }

    TEST_CASE("odd-round pattern for two unit shares is valid") {
        InjectionTrace t;
        for (Round r = 1; r <= 99; r += 2) t.events.push_back({r, 1, 1}), t.events.push_back({r, 2, 1});
        CHECK_FALSE(validate_trace({{1, 1}, 2}, t, 100).has_value());
    }

    TEST_CASE("empty trace is valid") {
        CHECK_FALSE(validate_trace({{0, 0}, 3}, {}, 50).has_value());
    }

    TEST_CASE("two packets in two consecutive rounds exceed a unit share") {
        const InjectionTrace t{{{1, 1, 1}, {2, 1, 1}}};
        const auto v = validate_trace({{1, 0}, 2}, t, 10);
        REQUIRE(v.has_value());
        CHECK(*v == Violation{1, 1});
    }

    TEST_CASE("first violation is lexicographic in (node, window start)") {
        const InjectionTrace t{{{3, 2, 2}, {7, 1, 1}, {8, 1, 1}}};
        const auto v = validate_trace({{1, 1}, 3}, t, 20);
        REQUIRE(v.has_value());
        CHECK(*v == Violation{1, 6});
    }

    TEST_CASE("events after the horizon are ignored") {
        const InjectionTrace t{{{1, 1, 1}, {2, 1, 1}}};
        CHECK_FALSE(validate_trace({{1}, 2}, t, 1).has_value());
    }

    TEST_CASE("malformed traces are rejected") {
        CHECK_THROWS_AS(validate_trace({{1}, 2}, InjectionTrace{{{1, 2, 1}}}, 5), MalformedTrace);
        CHECK_THROWS_AS(validate_trace({{1}, 2}, InjectionTrace{{{1, 1, -1}}}, 5), MalformedTrace);
        CHECK_THROWS_AS(validate_trace({{1}, 2}, InjectionTrace{{{0, 1, 1}}}, 5), MalformedTrace);
    }

    TEST_CASE("burst strategy") {
        BurstStrategy b({{3, 0}, 4});
        CHECK(hits(b, 1, 12) == std::vector<Round>{1, 1, 1, 5, 5, 5, 9, 9, 9});
        BurstStrategy zero({{0, 0}, 4});
        CHECK(materialize(zero, 40).events.empty());
        BurstStrategy jam_a({{1, 1}, 2});
        CHECK(hits(jam_a, 1, 8) == std::vector<Round>{1, 3, 5, 7});
        BurstStrategy jam_b({{1, 1}, 2});
        CHECK(hits(jam_b, 2, 8) == std::vector<Round>{1, 3, 5, 7});
    }

    TEST_CASE("uniform strategy") {
        UniformStrategy u({{2, 0}, 4});
        CHECK(hits(u, 1, 8) == std::vector<Round>{1, 3, 5, 7});
        UniformStrategy zero({{0, 0, 0}, 5});
        CHECK(materialize(zero, 50).events.empty());
        UniformStrategy full({{4, 0}, 4});
        CHECK(hits(full, 1, 6) == std::vector<Round>{1, 2, 3, 4, 5, 6});
    }

    TEST_CASE("single overload strategy") {
        SingleOverloadStrategy s(1, 3, 5);
        CHECK(hits(s, 1, 10) == std::vector<Round>{1, 2, 3, 6, 7, 8});
        SingleOverloadStrategy full(1, 1, 1);
        CHECK(hits(full, 1, 4) == std::vector<Round>{1, 2, 3, 4});
        SingleOverloadStrategy two(2, 2, 3);
        CHECK(hits(two, 2, 9) == std::vector<Round>{1, 2, 4, 5, 7, 8});
        CHECK_THROWS_AS(SingleOverloadStrategy(1, 1, 2), SimError);
        CHECK_THROWS_AS(SingleOverloadStrategy(1, 2, 5), SimError);
        CHECK(SingleOverloadStrategy(2, 2, 3).adversary_type(3).shares == std::vector<std::uint32_t>{0, 2, 0});
    }

    TEST_CASE("scripted strategy replays its trace") {
        const InjectionTrace t{{{2, 1, 1}, {2, 2, 3}, {5, 1, 2}}};
        ScriptedStrategy s(t);
        CHECK(materialize(s, 10).events == t.events);
    }

    TEST_CASE("injection CSV round trip and errors") {
        const InjectionTrace t{{{1, 1, 2}, {4, 3, 1}}};
        std::ostringstream os;
        write_injection_csv(os, t);
        CHECK(os.str() == "round,node,count\n1,1,2\n4,3,1\n");
        std::istringstream is(os.str());
        CHECK(read_injection_csv(is, 3).events == t.events);
        std::istringstream no_header("1,1,1\n");
        CHECK_THROWS_AS(read_injection_csv(no_header, 3), MalformedTrace);
        std::istringstream descending("round,node,count\n4,1,1\n2,1,1\n");
        CHECK_THROWS_AS(read_injection_csv(descending, 3), MalformedTrace);
        std::istringstream outside("round,node,count\n1,4,1\n");
        CHECK_THROWS_AS(read_injection_csv(outside, 3), MalformedTrace);
    }

    TEST_CASE("property: built-in strategies respect their type") {
        std::mt19937_64 rng(99);
        for (int k = 0; k < 150; ++k) {
            const NodeId n = std::uniform_int_distribution<NodeId>(1, 16)(rng);
            const std::uint32_t w = std::uniform_int_distribution<std::uint32_t>(1, 64)(rng);
            const AdversaryType t{random_shares(rng, n, w), w};
            const Round horizon = 10ULL * w;
            BurstStrategy b(t);
            UniformStrategy u(t);
            RandomValidStrategy r(t, rng());
            for (InjectionStrategy* s : std::initializer_list<InjectionStrategy*>{&b, &u, &r}) {
                const auto trace = materialize(*s, horizon);
                const auto v = validate_trace(t, trace, horizon);
                CHECK_MESSAGE(!v.has_value(), s->name() << " n=" << n << " w=" << w);
            }
            // Burst and uniform saturate: every aligned window carries exactly the shares.
            BurstStrategy b2(t);
            UniformStrategy u2(t);
            CHECK(materialize(b2, w).total() == t.burstiness());
            CHECK(materialize(u2, w).total() == t.burstiness());
        }
    }

    TEST_CASE("property: validate_trace equals the brute-force scan") {
        std::mt19937_64 rng(5);
        for (int k = 0; k < 300; ++k) {
            const NodeId n = std::uniform_int_distribution<NodeId>(1, 8)(rng);
            const std::uint32_t w = std::uniform_int_distribution<std::uint32_t>(1, 30)(rng);
            const Round horizon = std::uniform_int_distribution<Round>(1, 120)(rng);
            const AdversaryType t{random_shares(rng, n, w), w};
            const auto trace = random_trace(rng, n, horizon, 0.2);
            CHECK(validate_trace(t, trace, horizon) == brute_force_violation(t, trace, horizon));
        }
    }
}
