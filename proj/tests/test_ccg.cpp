#include <doctest.h>

#include "greencap/ccg.hpp"
#include "support.hpp"

#include <sstream>

using namespace greencap;
using namespace greencap::testing;

namespace {

double rel_tol(double v) { return 1e-5 * std::max(1.0, std::abs(v)); }

// Instance with enough capacity that every box corner of tiny_cluster is serviceable.
Instance roomy(std::uint64_t seed, int I, int J, int K, int T) {
    Instance in = tiny_instance(seed, I, J, K, T);
    in.initial_lines.setConstant(3);
    return in;
}

std::vector<ClusterSpec> clusters_for(const Instance& in, std::uint64_t seed, int S) {
    std::vector<ClusterSpec> out;
    for (int s = 0; s < S; ++s) {
        ClusterSpec c = tiny_cluster(in, seed * 31 + s, 1.0 / S);
        c.id = s;
        out.push_back(c);
    }
    return out;
}

struct Shape {
    int I, J, K, T, S;
};

}  // namespace

TEST_SUITE("ccg") {

TEST_CASE("master without cuts keeps the initial configuration at zero cost") {
    Instance in = roomy(3, 2, 2, 1, 3);
    in.terminate_cost.setConstant(0.5);
    auto cl = clusters_for(in, 3, 1);
    MasterLayout lay;
    Model mp = build_master(in, cl, CutPool(1), {}, &lay);
    SolveResult r = solve(mp);
    REQUIRE(r.optimal());
    CHECK(r.objective == doctest::Approx(0.0).epsilon(1e-9));
    VectorXd v = Eigen::Map<const VectorXd>(r.x.data(), lay.nx).array().round();
    FirstStageDecision x = FirstStageDecision::from_vector(in.dims(), v);
    CHECK(check_decision(in, x).empty());
    FirstStageDecision h = hold_initial(in);
    CHECK(x.X == h.X);
    CHECK(x.XN == h.XN);
    CHECK(x.XBR.sum() == 0);
}

TEST_CASE("DRO C&CG matches the corner monolith") {
    const Shape shapes[] = {{1, 1, 1, 2, 1}, {1, 2, 1, 2, 1}, {2, 1, 1, 2, 2},
                            {1, 1, 2, 2, 2}, {1, 1, 1, 3, 1}, {2, 2, 1, 2, 1}};
    int solved = 0;
    for (int n = 0; n < 6; ++n)
        for (std::uint64_t seed : {1, 2}) {
            const Shape& s = shapes[n];
            Instance in = roomy(seed * 7 + n, s.I, s.J, s.K, s.T);
            auto cl = clusters_for(in, seed + 11 * n, s.S);
            CAPTURE(n);
            CAPTURE(seed);
            MonolithResult ref = solve_monolith(in, cl);
            SolveOutcome o = run_ccg_dro(in, cl);
            if (ref.status == SolveStatus::Infeasible) {
                CHECK(o.status == CcgStatus::DroInfeasible);
                continue;
            }
            REQUIRE(ref.status == SolveStatus::Optimal);
            REQUIRE(o.status == CcgStatus::Optimal);
            CHECK(std::abs(o.objective - ref.objective) <= rel_tol(ref.objective));
            CHECK(o.ub - o.lb <= 1e-5);
            CHECK(check_decision(in, o.x).empty());
            // The returned plan's worst-case value reproduces the objective.
            auto ev = evaluate_plan(in, cl, o.x);
            double w = 0.0;
            for (int c = 0; c < s.S; ++c) {
                REQUIRE(ev[c].feasible);
                w += cl[c].q * ev[c].value;
            }
            CHECK(strategic_cost(in, o.x) + w == doctest::Approx(o.objective).epsilon(1e-7));
            ++solved;
        }
    CHECK(solved >= 8);
}

TEST_CASE("basic C&CG reaches the same objective") {
    for (std::uint64_t seed : {4, 5, 6}) {
        Instance in = roomy(seed, 1, 2, 1, 2);
        auto cl = clusters_for(in, seed, 2);
        SolveOutcome a = run_ccg_dro(in, cl);
        SolveOutcome b = run_basic_ccg(in, cl);
        REQUIRE(a.status == CcgStatus::Optimal);
        REQUIRE(b.status == CcgStatus::Optimal);
        CHECK(std::abs(a.objective - b.objective) <= rel_tol(a.objective));
        CHECK(b.iterations >= a.iterations);
    }
}

TEST_CASE("bounds are monotone along the trace") {
    for (std::uint64_t seed : {7, 8, 9}) {
        Instance in = roomy(seed, 2, 1, 1, 3);
        auto cl = clusters_for(in, seed, 2);
        SolveOutcome o = run_basic_ccg(in, cl);
        REQUIRE(!o.trace.empty());
        for (std::size_t k = 1; k < o.trace.size(); ++k) {
            CHECK(o.trace[k].lb >= o.trace[k - 1].lb - 1e-9);
            CHECK(o.trace[k].ub <= o.trace[k - 1].ub + 1e-9);
            CHECK(o.trace[k].cut_scenarios >= o.trace[k - 1].cut_scenarios);
        }
        for (const BoundRow& r : o.trace) CHECK(r.lb <= r.ub + 1e-6);
    }
}

TEST_CASE("repeated runs are identical") {
    Instance in = roomy(12, 2, 1, 1, 2);
    auto cl = clusters_for(in, 12, 2);
    CcgOptions opts;
    opts.threads = 2;
    SolveOutcome a = run_ccg_dro(in, cl, opts);
    SolveOutcome b = run_ccg_dro(in, cl, opts);
    CHECK(a.objective == b.objective);
    CHECK(a.x.to_vector() == b.x.to_vector());
    CHECK(a.iterations == b.iterations);
    CHECK(a.cut_scenarios == b.cut_scenarios);
}

TEST_CASE("demand beyond any reachable capacity is dro-infeasible") {
    Instance in = tiny_instance(21, 1, 1, 1, 2);
    in.lambda = 0.99;
    auto cl = clusters_for(in, 21, 1);
    cl[0].xi_hi.array() += 1e4;
    cl[0].gamma_hi.array() += 10.0;
    CHECK(solve_monolith(in, cl).status == SolveStatus::Infeasible);
    SolveOutcome o = run_ccg_dro(in, cl);
    CHECK(o.status == CcgStatus::DroInfeasible);
    CHECK(exit_code(o.status) == 2);
    CHECK(o.trace.back().lb == kInf);
    CHECK(o.cuts.feasibility[0].scenarios.size() >= 1);
}

TEST_CASE("green share forces renewable investment") {
    Instance in = roomy(30, 2, 1, 1, 2);
    for (double& c : in.cost_green) c = 3.0;
    for (double& c : in.cost_old) c = 1.0;
    auto cl = clusters_for(in, 30, 1);
    in.tau = 0.0;
    SolveOutcome none = run_ccg_dro(in, cl);
    REQUIRE(none.status == CcgStatus::Optimal);
    CHECK(none.x.XBR.sum() == 0);
    in.tau = 0.1;
    SolveOutcome some = run_ccg_dro(in, cl);
    REQUIRE(some.status == CcgStatus::Optimal);
    CHECK(some.x.XBR.sum() >= 1);
    CHECK(some.x.XN.sum() >= 1);
    CHECK(some.objective >= none.objective - 1e-9);
}

TEST_CASE("mismatched inputs are rejected") {
    Instance in = roomy(40, 1, 1, 1, 2);
    auto cl = clusters_for(in, 40, 2);
    cl[1].q = 0.9;
    CHECK_THROWS_AS(run_ccg_dro(in, cl), InputError);
    cl = clusters_for(in, 40, 1);
    cl[0].T = 3;
    CHECK_THROWS_AS(run_ccg_dro(in, cl), InputError);
    CHECK_THROWS_AS(run_ccg_dro(in, {}), InputError);
}

TEST_CASE("iteration limit reports status and a valid incumbent") {
    Instance in = roomy(50, 2, 1, 1, 3);
    auto cl = clusters_for(in, 50, 2);
    CcgOptions opts;
    opts.max_iterations = 1;
    SolveOutcome o = run_basic_ccg(in, cl, opts);
    if (o.status != CcgStatus::Optimal) {
        CHECK(o.status == CcgStatus::IterationLimit);
        CHECK(exit_code(o.status) == 3);
    }
    CHECK(check_decision(in, o.x).empty());
}

TEST_CASE("an exhausted time budget reports time-limit") {
    Instance in = roomy(50, 2, 1, 1, 3);
    auto cl = clusters_for(in, 50, 2);
    CcgOptions opts;
    opts.time_limit = 1e-9;
    SolveOutcome o = run_ccg_dro(in, cl, opts);
    CHECK(o.status == CcgStatus::TimeLimit);
    CHECK(exit_code(o.status) == 3);
}

TEST_CASE("trace csv and manifest") {
    Instance in = roomy(60, 1, 1, 1, 2);
    auto cl = clusters_for(in, 60, 1);
    CcgOptions opts;
    SolveOutcome o = run_ccg_dro(in, cl, opts);
    std::ostringstream os;
    write_bound_trace_csv(os, o);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "iteration,lb,ub,master_seconds,subproblem_seconds,cut_scenarios");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == static_cast<int>(o.trace.size()));
    auto j = run_manifest(in, cl, opts, o, "dro");
    CHECK(j["status"] == "optimal");
    CHECK(j["instance_hash"].get<std::string>().size() == 16);
    CHECK(j["objective"].get<double>() == doctest::Approx(o.objective));
    CHECK(j["strategic_cost"]["total"].get<double>() ==
          doctest::Approx(strategic_cost(in, o.x)));
}

}  // TEST_SUITE
