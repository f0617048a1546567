#include <doctest.h>

#include "greencap/eval.hpp"
#include "support.hpp"

using namespace greencap;
using namespace greencap::testing;

namespace {

Instance roomy(std::uint64_t seed, int I, int J, int K, int T) {
    Instance in = tiny_instance(seed, I, J, K, T);
    in.initial_lines.setConstant(3);
    return in;
}

ClusterSpec point_cluster(const ClusterSpec& c, const Scenario& xi) {
    ClusterSpec p = c;
    p.xi_lo = p.xi_hi = p.gamma_lo = p.gamma_hi = xi;
    return p;
}

// Symmetric pairs around the moment midpoint: the empirical mean sits inside the window.
SampleSet window_samples(const std::vector<ClusterSpec>& cl, int pairs, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SampleSet set;
    for (const ClusterSpec& c : cl) {
        const VectorXd mid = c.gamma_mid();
        const VectorXd room = (mid - c.xi_lo).cwiseMin(c.xi_hi - mid);
        std::vector<Scenario> sc;
        for (int k = 0; k < pairs; ++k) {
            VectorXd d = room.unaryExpr([&](double r) { return r * uniform(rng, -1, 1); });
            sc.push_back(mid + d);
            sc.push_back(mid - d);
        }
        set.scenarios.push_back(sc);
        set.q.push_back(c.q);
    }
    return set;
}

}  // namespace

TEST_SUITE("spbaseline") {

TEST_CASE("degenerate box samples the point") {
    Instance in = tiny_instance(1, 1, 1, 2, 2);
    ClusterSpec c = point_cluster(tiny_cluster(in, 1), tiny_cluster(in, 1).gamma_mid());
    for (SamplerKind k : {SamplerKind::Uniform, SamplerKind::TruncatedGaussian})
        for (const Scenario& xi : sample(c, k, 20, 3)) CHECK(xi == c.xi_lo);
}

TEST_CASE("uniform sample mean approaches the box centre") {
    Instance in = tiny_instance(2, 1, 1, 2, 2);
    ClusterSpec c = tiny_cluster(in, 2);
    const int n = 100000;
    auto s = sample(c, SamplerKind::Uniform, n, 5);
    VectorXd mean = VectorXd::Zero(c.cells());
    for (const Scenario& xi : s) {
        CHECK((xi.array() >= c.xi_lo.array()).all());
        CHECK((xi.array() <= c.xi_hi.array()).all());
        mean += xi / n;
    }
    for (int e = 0; e < c.cells(); ++e) {
        const double sigma = (c.xi_hi(e) - c.xi_lo(e)) / std::sqrt(12.0);
        CHECK(std::abs(mean(e) - 0.5 * (c.xi_lo(e) + c.xi_hi(e))) <= 3 * sigma / std::sqrt(double(n)));
    }
}

TEST_CASE("truncated gaussian rarely rejects") {
    Instance in = tiny_instance(3, 1, 1, 2, 3);
    ClusterSpec c = tiny_cluster(in, 3);
    SamplerStats st;
    auto s = sample(c, SamplerKind::TruncatedGaussian, 20000, 8, &st);
    CHECK(st.draws >= 20000L * c.cells());
    CHECK(double(st.rejections) / double(st.draws) < 0.01);
    for (const Scenario& xi : s) {
        CHECK((xi.array() >= c.xi_lo.array()).all());
        CHECK((xi.array() <= c.xi_hi.array()).all());
    }
}

TEST_CASE("sample sets are deterministic and sized as requested") {
    Instance in = tiny_instance(4, 1, 1, 1, 2);
    std::vector<ClusterSpec> cl{tiny_cluster(in, 4, 0.3), tiny_cluster(in, 5, 0.7)};
    SampleSet a = draw_samples(cl, SamplerKind::TruncatedGaussian, 100, 9);
    SampleSet b = draw_samples(cl, SamplerKind::TruncatedGaussian, 100, 9);
    CHECK(a.total() == 200);
    CHECK(a.scenarios == b.scenarios);
    double w = 0.0;
    for (int s = 0; s < 2; ++s) w += a.weight(s) * a.scenarios[s].size();
    CHECK(w == doctest::Approx(1.0));
    SampleSet back = sample_set_from_json(nlohmann::json::parse(to_json(a).dump()));
    CHECK(back.scenarios == a.scenarios);
    CHECK(back.kind == a.kind);
    CHECK(draw_samples(cl, SamplerKind::TruncatedGaussian, 100, 10).scenarios != a.scenarios);
}

TEST_CASE("single-scenario SAA equals the deterministic model") {
    for (std::uint64_t seed : {6, 7, 8}) {
        Instance in = roomy(seed, 1, 2, 1, 2);
        ClusterSpec c = tiny_cluster(in, seed);
        for (std::uint64_t mask : {0ULL, 3ULL}) {
            Scenario xi = corner(c, mask);
            SampleSet set;
            set.scenarios = {{xi}};
            set.q = {1.0};
            SaaOutcome sp = solve_saa(in, {c}, set);
            MonolithResult det = solve_monolith(in, {point_cluster(c, xi)});
            REQUIRE(det.status == SolveStatus::Optimal);
            REQUIRE(sp.status == SolveStatus::Optimal);
            CHECK(sp.objective == doctest::Approx(det.objective).epsilon(1e-7));
            CHECK(sp.strategic.total() + sp.expected_recourse == doctest::Approx(sp.objective).epsilon(1e-7));
            // repeated copies of one corner collapse to the same model
            set.scenarios = {{xi, xi, xi}};
            CHECK(solve_saa(in, {c}, set).objective == doctest::Approx(det.objective).epsilon(1e-7));
        }
    }
}

TEST_CASE("SP under an in-window empirical distribution never exceeds DRO") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        Instance in = roomy(40 + seed, 1 + seed % 2, 1, 1, 2);
        std::vector<ClusterSpec> cl{tiny_cluster(in, seed, 0.5), tiny_cluster(in, seed + 99, 0.5)};
        cl[1].id = 1;
        SampleSet set = window_samples(cl, 4, seed);
        for (std::size_t s = 0; s < cl.size(); ++s) {
            DiscreteDistribution d;
            d.scenarios = set.scenarios[s];
            d.prob.assign(d.scenarios.size(), 1.0 / d.scenarios.size());
            REQUIRE(validate(d, cl[s]).empty());
        }
        SolveOutcome dro = run_ccg_dro(in, cl);
        if (dro.status != CcgStatus::Optimal) continue;
        SaaOutcome sp = solve_saa(in, cl, set);
        REQUIRE(sp.status == SolveStatus::Optimal);
        CHECK(sp.objective <= dro.objective + 1e-6 * std::max(1.0, std::abs(dro.objective)));
        // the DRO plan is feasible on every in-box sample
        EvaluationReport ev = evaluate_sampled(in, cl, dro.x, draw_samples(cl, SamplerKind::Uniform, 30, seed));
        CHECK(ev.infeasible_scenarios == 0);
        ++checked;
    }
    CHECK(checked >= 5);
}

TEST_CASE("SAA reports infeasibility") {
    Instance in = tiny_instance(9, 1, 1, 1, 2);
    in.lambda = 0.99;
    ClusterSpec c = tiny_cluster(in, 9);
    SampleSet set;
    set.scenarios = {{c.upper_corner() * 1e4}};
    set.q = {1.0};
    CHECK(solve_saa(in, {c}, set).status == SolveStatus::Infeasible);
    set.scenarios = {};
    CHECK_THROWS_AS(solve_saa(in, {c}, set), InputError);
}

}  // TEST_SUITE
