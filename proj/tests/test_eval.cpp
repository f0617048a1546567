#include <doctest.h>

#include "greencap/eval.hpp"
#include "support.hpp"

#include <sstream>

using namespace greencap;
using namespace greencap::testing;

namespace {

Instance roomy(std::uint64_t seed, int I, int J, int K, int T) {
    Instance in = tiny_instance(seed, I, J, K, T);
    in.initial_lines.setConstant(3);
    return in;
}

std::vector<ClusterSpec> two_clusters(const Instance& in, std::uint64_t seed) {
    std::vector<ClusterSpec> cl{tiny_cluster(in, seed, 0.4), tiny_cluster(in, seed + 77, 0.6)};
    cl[1].id = 1;
    return cl;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("worst-case evaluation of the DRO optimum reproduces its objective") {
    for (std::uint64_t seed : {1, 2, 3}) {
        Instance in = roomy(seed, 1, 2, 1, 2);
        auto cl = two_clusters(in, seed);
        SolveOutcome o = run_ccg_dro(in, cl);
        REQUIRE(o.status == CcgStatus::Optimal);
        EvaluationReport r = evaluate_worstcase(in, cl, o.x);
        CHECK(r.feasible);
        CHECK(std::abs(r.total - o.objective) <= 1e-5 * std::max(1.0, std::abs(o.objective)));
        CHECK(r.total >= o.lb - 1e-6);
        CHECK(r.total <= o.ub + 1e-6);
        CHECK(r.total == doctest::Approx(r.strategic.total() + r.tactical).epsilon(1e-9));
        CHECK(r.green_penetration >= 100.0 * in.tau - 1e-6);
        CHECK(r.service_level == doctest::Approx(100.0 * in.lambda).epsilon(1e-9));

        // the worst case dominates any in-box sampled distribution
        for (SamplerKind k : {SamplerKind::Uniform, SamplerKind::TruncatedGaussian}) {
            EvaluationReport s = evaluate_sampled(in, cl, o.x, draw_samples(cl, k, 40, seed));
            CHECK(s.feasible);
            CHECK(s.infeasible_scenarios == 0);
            CHECK(s.total <= r.total + 1e-6);
            CHECK(s.total == doctest::Approx(s.strategic.total() + s.tactical).epsilon(1e-9));
            CHECK(s.green_penetration >= 100.0 * in.tau - 1e-6);
        }
    }
}

TEST_CASE("no PV under a green share is infeasible") {
    Instance in = roomy(4, 2, 1, 1, 2);
    in.tau = 0.1;
    auto cl = two_clusters(in, 4);
    FirstStageDecision x = hold_initial(in);
    EvaluationReport r = evaluate_worstcase(in, cl, x);
    CHECK_FALSE(r.feasible);
    CHECK(r.total == kInf);
    for (const ClusterVerdict& v : r.clusters) {
        CHECK_FALSE(v.feasible);
        CHECK(v.violation > 0);
    }
    EvaluationReport s = evaluate_sampled(in, cl, x, draw_samples(cl, SamplerKind::Uniform, 5, 1));
    CHECK_FALSE(s.feasible);
    CHECK(s.infeasible_scenarios == s.scenarios);
}

TEST_CASE("single degenerate scenario matches the recourse solve") {
    Instance in = roomy(5, 1, 1, 2, 2);
    ClusterSpec c = tiny_cluster(in, 5);
    FirstStageDecision x = generous_plan(in);
    Scenario xi = c.gamma_mid();
    SampleSet set;
    set.scenarios = {{xi}};
    set.q = {1.0};
    EvaluationReport r = evaluate_sampled(in, {c}, x, set);
    RecourseSolution sol = solve_recourse(in, c, x, xi);
    CHECK(r.tactical == doctest::Approx(sol.objective).epsilon(1e-12));
    CHECK(r.total == doctest::Approx(strategic_cost(in, x) + sol.objective).epsilon(1e-12));
}

TEST_CASE("service level sits exactly at lambda when shortage is cheapest") {
    for (std::uint64_t seed : {6, 7}) {
        Instance in = roomy(seed, 2, 2, 2, 2);
        in.lambda = 0.99;
        auto cl = two_clusters(in, seed);
        SolveOutcome o = run_ccg_dro(in, cl);
        REQUIRE(o.status == CcgStatus::Optimal);
        EvaluationReport r = evaluate_worstcase(in, cl, o.x);
        CHECK(std::abs(r.service_level - 99.0) <= 0.01);
        EvaluationReport s = evaluate_sampled(in, cl, o.x, draw_samples(cl, SamplerKind::Uniform, 20, seed));
        CHECK(std::abs(s.service_level - 99.0) <= 0.01);
        for (const ScenarioMetric& m : s.per_scenario) CHECK(m.service == doctest::Approx(99.0).epsilon(1e-9));
    }
}

TEST_CASE("comparison table") {
    Instance in = roomy(8, 1, 1, 1, 2);
    auto cl = two_clusters(in, 8);
    SolveOutcome o = run_ccg_dro(in, cl);
    REQUIRE(o.status == CcgStatus::Optimal);
    EvaluationReport r = evaluate_worstcase(in, cl, o.x);
    EvaluationReport bad = evaluate_worstcase(in, cl, o.x);
    bad.feasible = false;
    bad.total = kInf;

    auto rows = compare({{"dro", {r, r}}, {"same", {r, r}}, {"sp", {r, bad}}});
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].delta_total == 0.0);
    CHECK(rows[1].averaged == 2);
    CHECK(rows[2].feasible == 1);
    CHECK(rows[2].averaged == 1);
    CHECK(rows[0].total == doctest::Approx(r.total));
    std::ostringstream os;
    write_comparison_csv(os, rows);
    CHECK(os.str().rfind("method,instances,feasible,averaged,total", 0) == 0);
    CHECK_THROWS_AS(compare({{"dro", {r}}}), InputError);
    CHECK_THROWS_AS(compare({{"dro", {r}}, {"sp", {r, r}}}), InputError);

    auto j = to_json(bad);
    CHECK(j["total"] == "inf");
    EvaluationReport back = report_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.total == kInf);
    CHECK_FALSE(back.feasible);
    CHECK(back.per_scenario.size() == bad.per_scenario.size());
    CHECK(report_from_json(to_json(r)).total == r.total);
    CHECK(to_json(r)["per_scenario"].size() == r.per_scenario.size());
}

TEST_CASE("DRO-feasible plans are SP-feasible and some SP plans fail the worst case") {
    int sp_worst_infeasible = 0, checked = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Instance in = tiny_instance(300 + seed, 1, 1, 1, 2);
        in.terminate_cost.setConstant(-2.0);
        auto cl = two_clusters(in, seed);
        SampleSet low;
        for (const ClusterSpec& c : cl) {
            low.scenarios.push_back({c.lower_corner()});
            low.q.push_back(c.q);
        }
        SaaOutcome sp = solve_saa(in, cl, low);
        SolveOutcome dro = run_ccg_dro(in, cl);
        if (sp.status != SolveStatus::Optimal || dro.status != CcgStatus::Optimal) continue;
        ++checked;
        SampleSet u = draw_samples(cl, SamplerKind::Uniform, 20, seed);
        EvaluationReport dro_s = evaluate_sampled(in, cl, dro.x, u);
        CHECK(dro_s.feasible);
        EvaluationReport sp_w = evaluate_worstcase(in, cl, sp.x);
        sp_worst_infeasible += !sp_w.feasible;
    }
    CHECK(checked >= 5);
    CHECK(sp_worst_infeasible >= 1);
}

}  // TEST_SUITE
