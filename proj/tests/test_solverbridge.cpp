#include <doctest.h>

#include "greencap/solverbridge.hpp"
#include "support.hpp"

#include <cstdlib>
#include <sstream>

using namespace greencap;

TEST_SUITE("solverbridge") {

TEST_CASE("one-variable LP reports objective and unit dual") {
    Model m;
    int x = m.add_var(-kInf, kInf, 1.0);
    m.add_row(3.0, kInf, {x}, {1.0});
    SolveResult r = solve(m);
    REQUIRE(r.optimal());
    CHECK(r.objective == doctest::Approx(3.0));
    REQUIRE(r.has_duals);
    CHECK(r.row_duals()[0] == doctest::Approx(1.0));
}

TEST_CASE("maximization dual is the objective sensitivity") {
    Model m(ObjSense::Maximize);
    int x = m.add_var(-kInf, kInf, 2.0);
    m.add_row(-kInf, 3.0, {x}, {1.0});
    SolveResult r = solve(m);
    REQUIRE(r.optimal());
    CHECK(r.objective == doctest::Approx(6.0));
    CHECK(r.row_duals()[0] == doctest::Approx(2.0));
}

TEST_CASE("contradictory bounds are infeasible") {
    Model m(ObjSense::Maximize);
    int x = m.add_var(-kInf, kInf, 1.0);
    m.add_row(-kInf, 0.0, {x}, {1.0});
    m.add_row(1.0, kInf, {x}, {1.0});
    CHECK(solve(m).status == SolveStatus::Infeasible);
}

TEST_CASE("zero objective over a box") {
    Model m;
    m.add_var(0.0, 1.0, 0.0);
    SolveResult r = solve(m);
    REQUIRE(r.optimal());
    CHECK(r.objective == doctest::Approx(0.0));
}

TEST_CASE("unbounded LP is reported") {
    Model m(ObjSense::Maximize);
    int x = m.add_var(0.0, kInf, 1.0);
    m.add_row(0.0, kInf, {x}, {1.0});
    CHECK(solve(m).status == SolveStatus::Unbounded);
}

TEST_CASE("duals on a MIP are rejected") {
    Model m;
    int x = m.add_var(0.0, 5.0, 1.0, VarType::Integer);
    m.add_row(1.5, kInf, {x}, {1.0});
    SolveResult r = solve(m);
    REQUIRE(r.optimal());
    CHECK(r.objective == doctest::Approx(2.0));
    CHECK_FALSE(r.has_duals);
    CHECK_THROWS_AS(r.row_duals(), SolverError);
}

TEST_CASE("random LPs satisfy strong duality and resolve identically") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 6, m_rows = 5;
        Model m;
        std::vector<double> lb(n, 0.0), ub(n);
        for (int j = 0; j < n; ++j) {
            ub[j] = testing::uniform(rng, 1.0, 4.0);
            m.add_var(lb[j], ub[j], testing::uniform(rng, -2.0, 2.0));
        }
        std::vector<double> lo(m_rows), hi(m_rows);
        std::vector<std::vector<double>> A(m_rows, std::vector<double>(n));
        for (int i = 0; i < m_rows; ++i) {
            std::vector<int> idx;
            for (int j = 0; j < n; ++j) {
                A[i][j] = testing::uniform(rng, -1.0, 1.0);
                idx.push_back(j);
            }
            lo[i] = -testing::uniform(rng, 0.5, 2.0);
            hi[i] = testing::uniform(rng, 0.5, 2.0);
            m.add_row(lo[i], hi[i], idx, A[i]);
        }
        SolveResult r = solve(m);
        REQUIRE(r.optimal());
        // Dual objective from row and column duals at their active bounds.
        double dual_obj = 0.0;
        for (int i = 0; i < m_rows; ++i) {
            double y = r.row_duals()[i];
            dual_obj += y * (y > 0 ? lo[i] : hi[i]);
        }
        for (int j = 0; j < n; ++j) {
            double z = r.col_duals()[j];
            dual_obj += z * (z > 0 ? lb[j] : ub[j]);
        }
        CHECK(dual_obj == doctest::Approx(r.objective).epsilon(1e-6));
        SolveResult again = solve(m);
        CHECK(again.status == r.status);
        CHECK(again.objective == r.objective);
    }
}

TEST_CASE("LP session rewrites bounds between solves") {
    Model m;
    int x = m.add_var(0.0, kInf, 1.0);
    m.add_row(1.0, kInf, {x}, {1.0});
    LpSession s(m);
    CHECK(s.solve().objective == doctest::Approx(1.0));
    s.set_row_bounds(0, 4.0, kInf);
    CHECK(s.solve().objective == doctest::Approx(4.0));
    s.set_col_bounds(x, 0.0, 2.0);
    CHECK(s.solve().status == SolveStatus::Infeasible);
}

TEST_CASE("unknown backend is unavailable") {
    const std::string prev = selected_backend();
    select_backend("nosuchsolver");
    Model m;
    m.add_var(0.0, 1.0, 1.0);
    try {
        solve(m);
        FAIL("expected backend-unavailable");
    } catch (const SolverError& e) {
        CHECK(e.kind() == SolverError::Kind::BackendUnavailable);
    }
    select_backend(prev);
}

TEST_CASE("solve log writes line records") {
    std::ostringstream os;
    SolveLog log(&os);
    log.record(3, "master", 1.5, 0.25);
    CHECK(os.str().find("iteration=3") != std::string::npos);
    CHECK(os.str().find("phase=master") != std::string::npos);
}

}
