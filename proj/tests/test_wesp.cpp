#include <doctest.h>

#include "greencap/wesp.hpp"
#include "support.hpp"

#include <sstream>

using namespace greencap;
using namespace greencap::testing;

namespace {

ClusterSpec box(std::vector<double> lo, std::vector<double> hi, std::vector<double> glo,
                std::vector<double> ghi) {
    ClusterSpec c;
    c.K = 1;
    c.T = static_cast<int>(lo.size());
    c.omega = MatrixXd::Constant(1, c.T, 300.0);
    c.xi_lo = Eigen::Map<VectorXd>(lo.data(), lo.size());
    c.xi_hi = Eigen::Map<VectorXd>(hi.data(), hi.size());
    c.gamma_lo = Eigen::Map<VectorXd>(glo.data(), glo.size());
    c.gamma_hi = Eigen::Map<VectorXd>(ghi.data(), ghi.size());
    return c;
}

// Instance/plan pair whose recourse is feasible at every box point.
struct Case {
    Instance in;
    ClusterSpec cl;
    FirstStageDecision x;
};

Case feasible_case(std::uint64_t seed, int I, int J, int K, int T) {
    Case c{tiny_instance(seed, I, J, K, T), {}, {}};
    c.cl = tiny_cluster(c.in, seed);
    c.x = tiny_plan(c.in, seed);
    c.x.XO.setConstant(3);
    c.x.XN.setConstant(2);
    c.x.X.setConstant(5);
    c.x.XBR.setConstant(1);
    return c;
}

bool is_corner(const Scenario& xi, const ClusterSpec& c) {
    for (int e = 0; e < c.cells(); ++e)
        if (xi(e) != c.xi_lo(e) && xi(e) != c.xi_hi(e)) return false;
    return true;
}

}  // namespace

TEST_SUITE("wesp") {

TEST_CASE("master with one compatible column is a point mass") {
    ClusterSpec c = box({0.0}, {10.0}, {2.0}, {8.0});
    MasterResult m = solve_master({VectorXd::Constant(1, 5.0)}, {7.5}, c);
    CHECK(m.eta == doctest::Approx(7.5));
    CHECK(m.prob[0] == doctest::Approx(1.0));
}

TEST_CASE("two corner columns with a midpoint window split evenly") {
    ClusterSpec c = box({0.0}, {10.0}, {5.0}, {5.0});
    MasterResult m = solve_master({VectorXd::Constant(1, 0.0), VectorXd::Constant(1, 10.0)},
                                  {0.0, 1.0}, c);
    CHECK(m.eta == doctest::Approx(0.5));
    CHECK(m.prob[0] == doctest::Approx(0.5));
    CHECK(m.prob[1] == doctest::Approx(0.5));
    CHECK(m.beta_u.minCoeff() >= 0.0);
    CHECK(m.beta_l.minCoeff() >= 0.0);
    // basic columns price out at zero
    CHECK(m.reduced_cost(0.0, VectorXd::Constant(1, 0.0)) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m.reduced_cost(1.0, VectorXd::Constant(1, 10.0)) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("columns on one side of the window make the master infeasible") {
    ClusterSpec c = box({0.0}, {10.0}, {5.0}, {6.0});
    try {
        solve_master({VectorXd::Constant(1, 1.0), VectorXd::Constant(1, 2.0)}, {1.0, 2.0}, c);
        FAIL("expected master-infeasible");
    } catch (const WespError& e) {
        CHECK(e.kind() == WespError::Kind::MasterInfeasible);
    }
}

TEST_CASE("zero duals: optimality prices the upper corner, flat feasibility the lower") {
    Case k = feasible_case(3, 1, 1, 1, 2);
    RecourseSolver rs(k.in, k.cl, k.x);
    MasterResult du;
    du.alpha = 0.0;
    du.beta_u = du.beta_l = VectorXd::Zero(k.cl.cells());
    // With zero duals the reduced cost is Q itself, maximized at the upper corner by monotonicity.
    PricingResult p = solve_pricing(du, rs, k.cl, WespMode::Optimality);
    CHECK(p.xi == k.cl.upper_corner());
    // Feasibility mode has zero violation everywhere, so the tie-break picks the lower corner.
    PricingResult f = solve_pricing(du, rs, k.cl, WespMode::Feasibility);
    CHECK(f.reduced_cost == doctest::Approx(0.0));
    CHECK(f.xi == k.cl.lower_corner());
}

TEST_CASE("degenerate box prices to its only point") {
    Case k = feasible_case(4, 1, 1, 1, 1);
    k.cl.xi_hi = k.cl.xi_lo;
    k.cl.gamma_lo = k.cl.gamma_hi = k.cl.xi_lo;
    RecourseSolver rs(k.in, k.cl, k.x);
    MasterResult du;
    du.beta_u = du.beta_l = VectorXd::Zero(1);
    PricingResult p = solve_pricing(du, rs, k.cl, WespMode::Optimality);
    CHECK(p.xi == k.cl.xi_lo);
    CgReport r = run_cg(k.in, k.cl, k.x, WespMode::Optimality);
    CHECK(r.value == doctest::Approx(solve_recourse(k.in, k.cl, k.x, k.cl.xi_lo).objective));
    CHECK(oracle_wesp(k.in, k.cl, k.x, WespMode::Optimality) == doctest::Approx(r.value));
}

TEST_CASE("MILP pricing matches corner enumeration") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Case k = feasible_case(seed, 1, 2, 2, 2);  // 16 corners
        RecourseSolver rs(k.in, k.cl, k.x);
        std::mt19937_64 rng(seed);
        MasterResult du;
        du.alpha = uniform(rng, -1, 1);
        du.beta_u = VectorXd::Zero(4);
        du.beta_l = VectorXd::Zero(4);
        for (int e = 0; e < 4; ++e) (rng() % 2 ? du.beta_u : du.beta_l)(e) = uniform(rng, 0, 0.05);
        for (WespMode mode : {WespMode::Optimality, WespMode::Feasibility}) {
            PricingResult a = solve_pricing(du, rs, k.cl, mode, PricingMethod::Milp);
            // brute force over all corners with exact recourse values
            double best = -kInf;
            for (std::uint64_t mask = 0; mask < 16; ++mask) {
                Scenario xi = corner(k.cl, mask);
                double v = recourse_value(rs, xi, mode);
                best = std::max(best, du.reduced_cost(v, xi));
            }
            CHECK(a.reduced_cost == doctest::Approx(best).epsilon(1e-7));
            CHECK(is_corner(a.xi, k.cl));
            PricingResult b = solve_pricing(du, rs, k.cl, mode, PricingMethod::Enumerate);
            CHECK(b.reduced_cost == doctest::Approx(best).epsilon(1e-9));
            CHECK(b.xi == a.xi);
        }
    }
}

TEST_CASE("oracle on handcrafted corner values picks the maximum corner") {
    // Master over four corners with values 0..3 and a loose window is a Dirac on the largest.
    ClusterSpec c = box({0.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}, {1.0, 1.0});
    std::vector<Scenario> cols;
    std::vector<double> vals;
    for (std::uint64_t m = 0; m < 4; ++m) {
        cols.push_back(corner(c, m));
        vals.push_back(static_cast<double>(m));
    }
    MasterResult r = solve_master(cols, vals, c);
    CHECK(r.eta == doctest::Approx(3.0));
    CHECK(r.prob[3] == doctest::Approx(1.0));
}

TEST_CASE("column generation equals the corner oracle in both modes") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 16; ++seed) {
        const int K = 1 + seed % 2, T = 2 + seed % 2;
        Case k = feasible_case(seed, 1 + seed % 2, 1 + seed % 2, K, T);
        if (seed % 3 == 0) k.x = tiny_plan(k.in, seed);  // possibly infeasible corners
        for (WespMode mode : {WespMode::Optimality, WespMode::Feasibility}) {
            double oracle;
            try {
                oracle = oracle_wesp(k.in, k.cl, k.x, mode);
            } catch (const WespError&) {
                continue;  // no feasible corner fits the window
            }
            CgReport r = run_cg(k.in, k.cl, k.x, mode);
            CHECK(std::abs(r.value - oracle) <= 1e-6 * std::max(1.0, std::abs(oracle)));
            CHECK(r.reduced_costs.back() <= 1e-6 * std::max(1.0, std::abs(r.value)));
            CHECK(validate(r.distribution, k.cl).empty());
            for (std::size_t i = 1; i < r.trace.size(); ++i)
                CHECK(r.trace[i].master_value >= r.trace[i - 1].master_value - 1e-9);
            for (std::size_t i = r.seed_columns; i < r.columns.size(); ++i)
                CHECK(is_corner(r.columns[i], k.cl));
            ++checked;
        }
    }
    CHECK(checked >= 20);
}

TEST_CASE("feasibility mode is zero exactly when every corner is recourse-feasible") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        Instance in = tiny_instance(seed, 1, 1, 1, 2);
        in.tau = 0.15;
        ClusterSpec cl = tiny_cluster(in, seed);
        FirstStageDecision x = tiny_plan(in, seed);
        RecourseSolver rs(in, cl, x);
        bool all_feasible = true;
        for (std::uint64_t m = 0; m < 4; ++m) all_feasible &= rs.solve(corner(cl, m)).feasible;
        CgReport r = run_cg(in, cl, x, WespMode::Feasibility);
        CHECK((r.value <= 1e-7) == all_feasible);
    }
}

TEST_CASE("restarting from the final columns converges in one iteration") {
    Case k = feasible_case(5, 1, 2, 2, 2);
    CgReport first = run_cg(k.in, k.cl, k.x, WespMode::Optimality);
    CgReport again = run_cg(k.in, k.cl, k.x, WespMode::Optimality, first.columns);
    CHECK(again.iterations == 1);
    CHECK(again.value == doctest::Approx(first.value).epsilon(1e-9));
}

TEST_CASE("zero-probability columns price out non-positive") {
    Case k = feasible_case(6, 1, 2, 2, 2);
    RecourseSolver rs(k.in, k.cl, k.x);
    CgReport r = run_cg(rs, k.cl, WespMode::Optimality);
    MasterResult du;
    du.alpha = r.alpha;
    du.beta_u = r.beta_u;
    du.beta_l = r.beta_l;
    for (std::size_t i = 0; i < r.columns.size(); ++i)
        CHECK(du.reduced_cost(r.column_values[i], r.columns[i]) <= 1e-6);
}

TEST_CASE("tightness witness") {
    SUBCASE("Dirac at the upper corner with gamma_hi = xi_hi") {
        ClusterSpec c = box({0.0, 1.0}, {2.0, 3.0}, {0.0, 1.0}, {2.0, 3.0});
        DiscreteDistribution d{{c.upper_corner()}, {1.0}};
        auto w = check_tightness(d, {1.0}, c);
        REQUIRE(w.has_value());
    }
    SUBCASE("converged column generation on random instances") {
        int found = 0;
        for (std::uint64_t seed = 1; seed <= 8; ++seed) {
            Case k = feasible_case(seed, 1, 1, 2, 2);
            CgReport r = run_cg(k.in, k.cl, k.x, WespMode::Optimality);
            std::vector<double> vals;
            for (const Scenario& s : r.distribution.scenarios)
                for (std::size_t i = 0; i < r.columns.size(); ++i)
                    if (r.columns[i] == s) vals.push_back(r.column_values[i]);
            if (check_tightness(r.distribution, vals, k.cl)) ++found;
        }
        CHECK(found == 8);
    }
}

TEST_CASE("oracle guards the enumeration size") {
    Instance in = tiny_instance(1, 1, 1, 3, 7);  // 21 cells
    ClusterSpec cl = tiny_cluster(in, 1);
    CHECK_THROWS_AS(oracle_wesp(in, cl, tiny_plan(in, 1), WespMode::Optimality), WespError);
}

TEST_CASE("trace CSV has one row per iteration") {
    Case k = feasible_case(7, 1, 1, 2, 2);
    CgReport r = run_cg(k.in, k.cl, k.x, WespMode::Optimality);
    std::ostringstream os;
    write_trace_csv(os, r);
    int lines = 0;
    for (char ch : os.str()) lines += ch == '\n';
    CHECK(lines == r.iterations + 1);
}

}
