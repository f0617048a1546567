#include <doctest.h>

#include "greencap/instance.hpp"
#include "support.hpp"

#include <filesystem>

using namespace greencap;
using namespace greencap::testing;

namespace {

bool has_field(const std::vector<Violation>& v, const std::string& f) {
    for (const Violation& x : v)
        if (x.field == f) return true;
    return false;
}

}  // namespace

TEST_SUITE("instance") {

TEST_CASE("base case validates") {
    Instance b = base_case();
    CHECK(validate(b).empty());
    MatrixXi init(3, 3);
    init << 3, 1, 2, 2, 0, 0, 0, 0, 2;
    CHECK(b.initial_lines == init);
    CHECK(b.m0() == 3 + 4 * 1);
}

TEST_CASE("shortage penalty above a production cost is one violation") {
    Instance b = base_case();
    b.shortage_cost(0) = 2.0;
    auto v = validate(b);
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == "shortage_cost");
    CHECK(v[0].indices[0] == 0);
}

TEST_CASE("initial green lines above initial lines") {
    Instance b = base_case();
    b.initial_green(0, 1) = 1;
    b.initial_lines(0, 1) = 0;
    auto v = validate(b);
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == "initial_green");
    CHECK(v[0].indices == std::vector<int>{0, 1});
}

TEST_CASE("other invariants are reported, never thrown") {
    Instance b = base_case();
    b.util_old(0, 0) = 0.0;
    b.big_m = 2;
    b.tau = 1.5;
    b.expand_cost.resize(2, 3);
    CHECK_NOTHROW(validate(b));
    CHECK(has_field(validate(b), "expand_cost"));
    b.expand_cost = base_case().expand_cost;
    auto v = validate(b);
    CHECK(has_field(v, "utilization"));
    CHECK(has_field(v, "big_m"));
    CHECK(has_field(v, "tau"));
    Instance empty;
    CHECK_FALSE(validate(empty).empty());
}

TEST_CASE("strategic cost") {
    Instance b = base_case();
    SUBCASE("holding the initial configuration costs nothing") {
        FirstStageDecision x = hold_initial(b);
        CHECK(check_decision(b, x).empty());
        CHECK(strategic_cost(b, x) == 0.0);
    }
    SUBCASE("one expansion of type I at factory 1") {
        FirstStageDecision x = hold_initial(b);
        x.Xp(x.idx(0, 0, 0)) = 1;
        for (int t = 1; t < 4; ++t) {
            x.X(x.idx(0, 0, t)) += 1;
            x.XO(x.idx(0, 0, t)) += 1;
        }
        CHECK(check_decision(b, x).empty());
        CHECK(strategic_cost(b, x) == doctest::Approx(55.00));
    }
    SUBCASE("upgrades and PV match the case-study green components") {
        // Factory 2 upgrades one type-I line; factory 3 builds a type-I line and upgrades it.
        FirstStageDecision x = hold_initial(b);
        x.XNp(x.idx(1, 0, 0)) = 1;
        for (int t = 1; t < 4; ++t) {
            x.XN(x.idx(1, 0, t)) = 1;
            x.XO(x.idx(1, 0, t)) -= 1;
        }
        x.Xp(x.idx(2, 0, 0)) = 1;
        x.X(x.idx(2, 0, 1)) = 1;
        x.XO(x.idx(2, 0, 1)) = 1;
        x.XNp(x.idx(2, 0, 1)) = 1;
        for (int t = 2; t < 4; ++t) {
            x.X(x.idx(2, 0, t)) = 1;
            x.XN(x.idx(2, 0, t)) = 1;
        }
        x.XBR(1) = x.XBR(2) = 1;
        REQUIRE(check_decision(b, x).empty());
        StrategicCost c = strategic_breakdown(b, x);
        CHECK(c.upgrade == doctest::Approx(11.00));
        CHECK(c.renewable == doctest::Approx(19.25));
        CHECK(c.adjustment == doctest::Approx(55.00));
        CHECK(c.total() == doctest::Approx(strategic_cost(b, x)));
        CHECK(first_stage_costs(b).dot(x.to_vector()) == doctest::Approx(c.total()));
    }
    SUBCASE("rule violations are rejected") {
        FirstStageDecision x = hold_initial(b);
        x.X(x.idx(0, 0, 2)) += 1;
        CHECK_FALSE(check_decision(b, x).empty());
        CHECK_THROWS_AS(strategic_cost(b, x), InvalidDecision);
        FirstStageDecision y = hold_initial(b);
        y.XBR(0) = 1;  // PV without any upgrade
        CHECK_FALSE(check_decision(b, y).empty());
    }
}

TEST_CASE("strategic cost is linear in the decision") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Instance in = tiny_instance(seed, 2, 2, 1, 3);
        FirstStageDecision x = generous_plan(in);
        REQUIRE(check_decision(in, x).empty());
        const VectorXd c = first_stage_costs(in);
        const VectorXd v = x.to_vector();
        double sum = 0.0;
        for (int q = 0; q < v.size(); ++q) sum += c(q) * v(q);
        CHECK(strategic_cost(in, x) == doctest::Approx(sum).epsilon(1e-12));
    }
}

TEST_CASE("perturbation") {
    Instance b = base_case();
    SUBCASE("degenerate ranges keep the data") {
        PerturbRanges r{1.0, 1.0, b.tau, b.tau, 1.0, 1.0};
        Instance p = perturb(b, 5, r);
        p.name = b.name;
        CHECK(p == b);
    }
    SUBCASE("deterministic in seed") {
        CHECK(perturb(b, 9) == perturb(b, 9));
        CHECK_FALSE(perturb(b, 9) == perturb(b, 10));
    }
    SUBCASE("tau and scale stay in range") {
        for (std::uint64_t s = 0; s < 5000; ++s) {
            Instance p = perturb(b, s);
            REQUIRE(p.tau >= 0.01);
            REQUIRE(p.tau <= 0.20);
            REQUIRE(p.ambiguity_scale >= 1.0);
            REQUIRE(p.ambiguity_scale <= 4.0);
        }
    }
    SUBCASE("costs move within the factor range") {
        Instance p = perturb(b, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double f = p.expand_cost(i, j) / b.expand_cost(i, j);
                CHECK(f >= 0.8);
                CHECK(f <= 1.2);
            }
    }
    SUBCASE("empty range") {
        PerturbRanges r;
        r.cost_lo = 2.0;
        CHECK_THROWS_AS(perturb(b, 1, r), InputError);
    }
}

TEST_CASE("json round trip is exact") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Instance p = perturb(base_case(), seed);
        Instance back = instance_from_json(nlohmann::json::parse(to_json(p).dump()));
        CHECK(back == p);
    }
    Instance t = tiny_instance(3, 2, 1, 2, 2);
    t.eligible(0, 1) = 0;
    // data of an ineligible cell is not stored; everything else survives
    Instance once = instance_from_json(to_json(t));
    CHECK(instance_from_json(to_json(once)) == once);
    CHECK(once.eligible == t.eligible);
    CHECK(once.cost_old[t.ijk(0, 0, 0)] == t.cost_old[t.ijk(0, 0, 0)]);
    CHECK(once.cost_green[t.ijk(1, 0, 0)] == t.cost_green[t.ijk(1, 0, 0)]);
    CHECK(once.util_old(0, 0) == t.util_old(0, 0));

    const auto path = std::filesystem::temp_directory_path() / "greencap_instance_rt.json";
    save_instance(base_case(), path.string());
    CHECK(load_instance(path.string()) == base_case());
    CHECK_THROWS_AS(load_instance("/nonexistent/x.json"), InputError);
}

TEST_CASE("ineligible cells are absent keys") {
    nlohmann::json j = to_json(base_case());
    Instance back = instance_from_json(j);
    CHECK(back.eligible(1, 0) == 0);
    CHECK(back.eligible(1, 2) == 1);
    CHECK(j.dump().find("\"II\"") != std::string::npos);
}

TEST_CASE("decision json round trip") {
    Instance b = base_case();
    FirstStageDecision x = hold_initial(b);
    x.XBR(2) = 1;
    CHECK(decision_from_json(to_json(x, b), b) == x);
}

}  // TEST_SUITE
