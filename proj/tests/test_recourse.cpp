#include <doctest.h>

#include "greencap/recourse.hpp"
#include "support.hpp"

#include <sstream>

using namespace greencap;
using namespace greencap::testing;

namespace {

ClusterSpec flat_cluster(const Instance& inst, double lo, double hi, double sun = 300.0) {
    const Dims d = inst.dims();
    ClusterSpec c;
    c.K = d.K;
    c.T = d.T;
    c.omega = MatrixXd::Constant(d.I, d.T, sun);
    c.xi_lo = VectorXd::Constant(d.kt(), lo);
    c.xi_hi = VectorXd::Constant(d.kt(), hi);
    c.gamma_lo = c.xi_lo;
    c.gamma_hi = c.xi_hi;
    return c;
}

VectorXd box_point(const ClusterSpec& c, std::mt19937_64& rng) {
    VectorXd xi(c.cells());
    for (int e = 0; e < c.cells(); ++e) xi(e) = uniform(rng, c.xi_lo(e), c.xi_hi(e));
    return xi;
}

}  // namespace

TEST_SUITE("recourse") {

TEST_CASE("row count on the minimal instance matches hand enumeration") {
    Instance in = tiny_instance(1, 1, 1, 1, 1);
    StandardForm sf = assemble_standard_form(in, tiny_cluster(in, 1));
    // 3 eligibility + 2 capacity + 1 green share + 2 demand + 1 service + 1 PV
    CHECK(sf.rows() == 10);
    CHECK(standard_form_rows(in.dims()) == 10);
    CHECK(sf.ny() == 4);
    CHECK(sf.BX.cols() == FirstStageLayout{in.dims()}.size());
    CHECK(sf.Bxi.cols() == 1);
}

TEST_CASE("row count formula on larger shapes") {
    for (auto [I, J, K, T] : {std::array{2, 3, 2, 4}, std::array{3, 3, 3, 4}, std::array{1, 2, 3, 2}}) {
        Instance in = tiny_instance(3, I, J, K, T);
        StandardForm sf = assemble_standard_form(in, tiny_cluster(in, 3));
        CHECK(sf.rows() == standard_form_rows(in.dims()));
        CHECK(sf.rows() == 3 * I * J * K * T + 2 * I * J * T + 1 + 3 * K * T + I * T);
    }
}

TEST_CASE("zero tau leaves the green-share row vacuous") {
    Instance in = tiny_instance(2, 2, 2, 2, 2);
    in.tau = 0.0;
    ClusterSpec cl = tiny_cluster(in, 2);
    StandardForm sf = assemble_standard_form(in, cl);
    VectorXd x = tiny_plan(in, 2).to_vector();
    VectorXd h = sf.h(x, cl.xi_hi);
    CHECK(h(sf.r_green) == 0.0);
    VectorXd lhs = sf.BY * VectorXd::Zero(sf.ny());
    CHECK(lhs(sf.r_green) >= h(sf.r_green));
}

TEST_CASE("zero lambda turns the service rows into shortage <= demand") {
    Instance in = tiny_instance(4, 1, 1, 2, 2);
    in.lambda = 0.0;
    ClusterSpec cl = tiny_cluster(in, 4);
    StandardForm sf = assemble_standard_form(in, cl);
    for (int e = 0; e < cl.cells(); ++e) {
        CHECK(sf.Bxi.coeff(sf.r_service + e, e) == 1.0);
        CHECK(sf.BY.coeff(sf.r_service + e, RecourseLayout{in.dims()}.U(e / cl.T, e % cl.T)) == -1.0);
    }
}

TEST_CASE("zero demand costs nothing") {
    Instance in = tiny_instance(5, 2, 2, 2, 2);
    ClusterSpec cl = tiny_cluster(in, 5);
    RecourseSolution s = solve_recourse(in, cl, tiny_plan(in, 5), VectorXd::Zero(cl.cells()));
    CHECK(s.objective == doctest::Approx(0.0));
    CHECK(s.Y.cwiseAbs().maxCoeff() <= 1e-9);
    FeasibilityRelaxSolution f = solve_feasibility(in, cl, tiny_plan(in, 5), VectorXd::Zero(cl.cells()));
    CHECK(f.violation == doctest::Approx(0.0));
}

TEST_CASE("low demand on the base case meets exactly the service level") {
    Instance in = base_case();
    in.tau = 0.0;
    ClusterSpec cl = flat_cluster(in, 0.0, 200.0);
    FirstStageDecision x = hold_initial(in);
    VectorXd xi = VectorXd::Constant(cl.cells(), 100.0);  // below one conventional line
    RecourseSolution s = solve_recourse(in, cl, x, xi);
    RecourseLayout L{in.dims()};
    double expected = 0.0;
    for (int k = 0; k < 3; ++k)
        for (int t = 0; t < 4; ++t) {
            CHECK(s.Y(L.U(k, t)) == doctest::Approx(0.01 * xi(cl.cell(k, t))).epsilon(1e-7));
            // cheapest conventional line making k, every product cheapest on type I
            double c_min = kInf;
            for (int j = 0; j < 3; ++j)
                if (in.eligible(j, k)) c_min = std::min(c_min, in.cost_old[in.ijk(0, j, k)]);
            expected += in.unit_scale() * (in.shortage_cost(k) * 0.01 + c_min * 0.99) * xi(cl.cell(k, t));
        }
    CHECK(s.objective == doctest::Approx(expected).epsilon(1e-7));
}

TEST_CASE("green target without PV is infeasible and the relaxation reports it") {
    Instance in = tiny_instance(6, 1, 1, 1, 2);
    in.tau = 0.10;
    ClusterSpec cl = tiny_cluster(in, 6);
    FirstStageDecision x = tiny_plan(in, 6);
    x.XO.setConstant(2);
    x.XN.setConstant(1);
    x.XBR.setZero();
    VectorXd xi = cl.xi_lo;
    CHECK_FALSE(RecourseSolver(in, cl, x).solve(xi).feasible);
    CHECK_THROWS_AS(solve_recourse(in, cl, x, xi), InfeasibleRecourse);
    FeasibilityRelaxSolution f = solve_feasibility(in, cl, x, xi);
    CHECK(f.violation > 1e-6);
    CHECK(f.violation == doctest::Approx(f.slack.sum()));
}

TEST_CASE("solution invariants, strong duality and feasibility semantics") {
    std::mt19937_64 rng(11);
    int feasible_seen = 0, infeasible_seen = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        Instance in = tiny_instance(seed, 1 + seed % 2, 1 + seed % 3, 1 + seed % 2, 2);
        ClusterSpec cl = tiny_cluster(in, seed);
        FirstStageDecision x = tiny_plan(in, seed);
        RecourseSolver rs(in, cl, x);
        const StandardForm& sf = rs.form();
        VectorXd xi = box_point(cl, rng);
        RecourseSolution s = rs.solve(xi);
        FeasibilityRelaxSolution f = rs.solve_feasibility(xi);
        CHECK(f.violation >= 0.0);
        CHECK(f.pi.minCoeff() >= 0.0);
        CHECK(f.pi.maxCoeff() <= 1.0 + 1e-9);
        if (!s.feasible) {
            ++infeasible_seen;
            CHECK(f.violation > 1e-7);
            continue;
        }
        ++feasible_seen;
        CHECK(f.violation <= 1e-7);
        CHECK(s.Y.minCoeff() >= -1e-9);
        CHECK(s.objective == doctest::Approx(sf.cY.dot(s.Y)).epsilon(1e-9));
        CHECK(s.pi.minCoeff() >= 0.0);
        VectorXd reduced = sf.cY - sf.BY.transpose() * s.pi;
        CHECK(reduced.minCoeff() >= -1e-6);
        const double dual = (sf.rhs_d - sf.BX * x.to_vector() - sf.Bxi * xi).dot(s.pi);
        CHECK(dual == doctest::Approx(s.objective).epsilon(1e-6));
        VectorXd slack = sf.BX * x.to_vector() + sf.BY * s.Y + sf.Bxi * xi - sf.rhs_d;
        CHECK(slack.minCoeff() >= -1e-6);
    }
    CHECK(feasible_seen > 0);
    CHECK(infeasible_seen > 0);
}

TEST_CASE("objective is monotone in each demand cell and convex along segments") {
    std::mt19937_64 rng(23);
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        Instance in = tiny_instance(seed, 1, 2, 2, 2);
        in.tau = 0.0;  // keeps every box point feasible for a well-provisioned plan
        ClusterSpec cl = tiny_cluster(in, seed);
        FirstStageDecision x = tiny_plan(in, seed);
        x.XO.setConstant(3);
        x.XN.setConstant(1);
        x.X.setConstant(4);
        RecourseSolver rs(in, cl, x);
        for (int c = 0; c < cl.cells(); ++c) {
            VectorXd xi = box_point(cl, rng);
            double prev = -kInf;
            for (int g = 0; g <= 6; ++g) {
                xi(c) = cl.xi_lo(c) + (cl.xi_hi(c) - cl.xi_lo(c)) * g / 6.0;
                RecourseSolution s = rs.solve(xi);
                REQUIRE(s.feasible);
                CHECK(s.objective >= prev - 1e-9);
                prev = s.objective;
            }
        }
        for (int rep = 0; rep < 5; ++rep) {
            VectorXd a = box_point(cl, rng), b = box_point(cl, rng);
            double qa = rs.solve(a).objective, qb = rs.solve(b).objective;
            double qm = rs.solve(0.5 * (a + b)).objective;
            CHECK(qm <= 0.5 * (qa + qb) + 1e-9);
        }
    }
}

TEST_CASE("PV rows use the cluster sunshine") {
    Instance in = tiny_instance(8, 2, 1, 1, 2);
    ClusterSpec cl = tiny_cluster(in, 8);
    StandardForm sf = assemble_standard_form(in, cl);
    FirstStageLayout X{in.dims()};
    for (int i = 0; i < 2; ++i)
        for (int t = 0; t < 2; ++t)
            CHECK(sf.BX.coeff(sf.r_pv + i * 2 + t, X.XBR() + i) ==
                  doctest::Approx(in.pv_capacity(i) * cl.omega(i, t) / in.product_unit));
}

TEST_CASE("triplet dump lists every nonzero") {
    Instance in = tiny_instance(9, 1, 1, 1, 1);
    StandardForm sf = assemble_standard_form(in, tiny_cluster(in, 9));
    std::ostringstream os;
    write_triplets(os, sf);
    std::istringstream is(os.str());
    std::string line;
    int n = 0;
    while (std::getline(is, line)) ++n;
    CHECK(n == sf.BX.nonZeros() + sf.BY.nonZeros() + sf.Bxi.nonZeros());
}

}
