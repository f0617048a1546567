#include <doctest.h>

#include "greencap/climate.hpp"
#include "support.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

using namespace greencap;
using namespace greencap::testing;

namespace {

std::vector<ClimateRecord> synthetic_records(int years, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<ClimateRecord> out;
    const double base[3] = {380.0, 340.0, 450.0};
    const double swing[3] = {60.0, 15.0, 70.0};
    for (int y = 0; y < years; ++y)
        for (int q = 1; q <= 4; ++q)
            for (int r = 0; r < 3; ++r) {
                const double season = (q == 2 || q == 3) ? 1.0 : -1.0;
                out.push_back({1992 + y, q, "R" + std::to_string(r + 1),
                               base[r] + season * swing[r] + uniform(rng, -10, 10)});
            }
    return out;
}

ClimateError::Kind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ClimateError& e) {
        return e.kind();
    }
    FAIL("expected a climate error");
    return ClimateError::Kind::BadInput;
}

}  // namespace

TEST_SUITE("climate") {

TEST_CASE("augmented features") {
    SUBCASE("constant period") {
        MatrixXd f = augment_features(std::vector<ClimateRecord>{
            {2000, 1, "R1", 10}, {2000, 1, "R2", 10}, {2000, 1, "R3", 10}});
        REQUIRE(f.rows() == 1);
        REQUIRE(f.cols() == 5);
        CHECK(f(0, 3) == 10.0);
        CHECK(f(0, 4) == 0.0);
    }
    SUBCASE("mean and range") {
        MatrixXd f = augment_features(std::vector<ClimateRecord>{
            {2000, 1, "R3", 12}, {2000, 1, "R1", 8}, {2000, 1, "R2", 10}});
        Eigen::RowVectorXd want(5);
        want << 8, 10, 12, 10, 4;
        CHECK(f.row(0) == want);
    }
    SUBCASE("one row per quarter of 1992-2022") {
        auto rec = synthetic_records(31, 1);
        CHECK(augment_features(rec).rows() == 124);
        ClimateTable t = tabulate(rec);
        CHECK(t.periods.front() == std::make_pair(1992, 1));
        CHECK(t.periods.back() == std::make_pair(2022, 4));
    }
    SUBCASE("missing region") {
        std::vector<ClimateRecord> rec{{2000, 1, "R1", 10}, {2000, 1, "R2", 10}, {2000, 2, "R1", 9}};
        CHECK(kind_of([&] { augment_features(rec); }) == ClimateError::Kind::MissingRegion);
    }
}

TEST_CASE("climate csv") {
    const auto dir = std::filesystem::temp_directory_path() / "greencap_climate";
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "ok.csv");
        f << "year,quarter,region,hours\n1992,1,R1,300.5\n1992,1,R2,280\n";
    }
    auto rec = load_climate_csv((dir / "ok.csv").string());
    REQUIRE(rec.size() == 2);
    CHECK(rec[0].hours == 300.5);
    CHECK(rec[1].region == "R2");
    {
        std::ofstream f(dir / "bad.csv");
        f << "year,quarter,region,hours\n1992,5,R1,300\n";
    }
    CHECK(kind_of([&] { load_climate_csv((dir / "bad.csv").string()); }) == ClimateError::Kind::BadInput);
    {
        std::ofstream f(dir / "neg.csv");
        f << "year,quarter,region,hours\n1992,1,R1,-3\n";
    }
    CHECK(kind_of([&] { load_climate_csv((dir / "neg.csv").string()); }) == ClimateError::Kind::BadInput);
    CHECK(kind_of([&] { load_climate_csv("/nonexistent.csv"); }) == ClimateError::Kind::BadInput);
}

TEST_CASE("k-means") {
    SUBCASE("one cluster is the column mean") {
        MatrixXd f = augment_features(synthetic_records(5, 2));
        KMeansResult r = kmeans(f, 1, 3);
        CHECK((r.centroids.row(0) - f.colwise().mean()).norm() <= 1e-9);
        CHECK((r.assignment.array() == 0).all());
    }
    SUBCASE("as many clusters as distinct rows") {
        MatrixXd f(6, 2);
        f << 0, 0, 1, 1, 0, 0, 5, 5, 1, 1, 9, 0;
        KMeansResult r = kmeans(f, 4, 7);
        CHECK(r.wcss == doctest::Approx(0.0));
        for (int i = 0; i < 6; ++i) CHECK((r.centroids.row(r.assignment(i)) - f.row(i)).norm() == 0.0);
    }
    SUBCASE("separated blobs are recovered") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> n(0.0, 1.0);
        MatrixXd f(60, 3);
        VectorXi truth(60);
        for (int i = 0; i < 60; ++i) {
            truth(i) = i % 2;
            for (int c = 0; c < 3; ++c) f(i, c) = n(rng) + (truth(i) ? 20.0 : 0.0);
        }
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            KMeansResult r = kmeans(f, 2, seed);
            const bool same = (r.assignment.array() == truth.array()).all();
            const bool flipped = (r.assignment.array() == 1 - truth.array()).all();
            CHECK((same || flipped));
        }
    }
    SUBCASE("each centroid is the mean of its members and none is empty") {
        MatrixXd f = augment_features(synthetic_records(31, 6));
        for (int S : {2, 3, 5}) {
            KMeansResult r = kmeans(f, S, 11);
            for (int s = 0; s < S; ++s) {
                Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(f.cols());
                int n = 0;
                for (int i = 0; i < f.rows(); ++i)
                    if (r.assignment(i) == s) sum += f.row(i), ++n;
                REQUIRE(n > 0);
                CHECK((r.centroids.row(s) - sum / n).norm() <= 1e-8);
            }
        }
    }
    SUBCASE("objective never increases across Lloyd iterations") {
        MatrixXd f = augment_features(synthetic_records(31, 8));
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            KMeansResult r = kmeans(f, 2 + seed % 4, seed);
            for (std::size_t k = 1; k < r.wcss_trace.size(); ++k)
                CHECK(r.wcss_trace[k] <= r.wcss_trace[k - 1] + 1e-9 * r.wcss_trace[k - 1]);
        }
    }
    SUBCASE("deterministic in seed") {
        MatrixXd f = augment_features(synthetic_records(10, 9));
        KMeansResult a = kmeans(f, 3, 42), b = kmeans(f, 3, 42);
        CHECK(a.assignment == b.assignment);
        CHECK(a.centroids == b.centroids);
    }
    SUBCASE("too few distinct rows") {
        MatrixXd f(4, 2);
        f << 1, 1, 1, 1, 2, 2, 2, 2;
        CHECK(kind_of([&] { kmeans(f, 3, 1); }) == ClimateError::Kind::DegenerateInput);
        CHECK(kind_of([&] { kmeans(f, 5, 1); }) == ClimateError::Kind::DegenerateInput);
    }
}

TEST_CASE("percentile") {
    std::vector<double> v(100);
    for (int i = 0; i < 100; ++i) v[i] = 100 - i;  // unsorted on purpose
    CHECK(percentile(v, 0) == 1.0);
    CHECK(percentile(v, 100) == 100.0);
    // sort-and-interpolate by hand: position p/100 * (n-1)
    for (double p : {10.0, 37.5, 90.0}) {
        std::vector<double> s = v;
        std::sort(s.begin(), s.end());
        const double pos = p / 100.0 * 99.0;
        const int lo = static_cast<int>(std::floor(pos));
        const double want = s[lo] + (pos - lo) * (s[std::min(lo + 1, 99)] - s[lo]);
        CHECK(percentile(v, p) == doctest::Approx(want).epsilon(1e-14));
    }
    CHECK(percentile(v, 10) == doctest::Approx(10.9));
    CHECK(percentile(v, 90) == doctest::Approx(90.1));
}

TEST_CASE("ambiguity boxes") {
    SUBCASE("identical samples give a degenerate box") {
        MatrixXd m = MatrixXd::Constant(5, 2, 7.5);
        auto c = build_ambiguity(VectorXi::Zero(5), {m}, 1, 2, 1.0);
        REQUIRE(c.size() == 1);
        for (const VectorXd* v : {&c[0].xi_lo, &c[0].xi_hi, &c[0].gamma_lo, &c[0].gamma_hi})
            CHECK((v->array() == 7.5).all());
        CHECK(validate(c[0]).empty());
    }
    SUBCASE("one hundred samples") {
        MatrixXd m(100, 1);
        for (int i = 0; i < 100; ++i) m(i, 0) = i + 1;
        auto c = build_ambiguity(VectorXi::Zero(100), {m}, 1, 1, 1.0);
        CHECK(c[0].xi_lo(0) == 1.0);
        CHECK(c[0].xi_hi(0) == 100.0);
        CHECK(c[0].gamma_lo(0) == doctest::Approx(10.9));
        CHECK(c[0].gamma_hi(0) == doctest::Approx(90.1));
    }
    SUBCASE("cluster probabilities are cardinality ratios") {
        VectorXi a(100);
        for (int i = 0; i < 100; ++i) a(i) = i < 30 ? 0 : 1;
        MatrixXd m = MatrixXd::Random(4, 2).array() + 5.0;
        auto c = build_ambiguity(a, {m, m}, 1, 2, 1.0);
        CHECK(c[0].q == 0.3);
        CHECK(c[1].q == 0.7);
        CHECK(std::abs(c[0].q + c[1].q - 1.0) <= 1e-12);
    }
    SUBCASE("ordering holds under any scale") {
        std::mt19937_64 rng(4);
        for (double scale : {0.2, 1.0, 2.5, 4.0}) {
            MatrixXd m(15, 6);
            for (int r = 0; r < m.rows(); ++r)
                for (int e = 0; e < 6; ++e) m(r, e) = uniform(rng, 0.5, 3.0);
            auto c = build_ambiguity(VectorXi::Zero(15), {m}, 2, 3, scale);
            CHECK(validate(c[0]).empty());
            CHECK((c[0].xi_lo.array() >= 0).all());
        }
    }
    SUBCASE("fewer than two samples") {
        MatrixXd m(1, 2);
        m << 1, 2;
        CHECK(kind_of([&] { build_ambiguity(VectorXi::Zero(1), {m}, 1, 2, 1.0); }) ==
              ClimateError::Kind::InsufficientSamples);
    }
}

TEST_CASE("clusters from the case study and synthetic climate") {
    Instance b = base_case();
    auto rec = synthetic_records(31, 12);
    ClusterSet cs = build_clusters(b, rec, 3, 5);
    REQUIRE(cs.clusters.size() == 3);
    double q = 0.0;
    for (const ClusterSpec& c : cs.clusters) {
        q += c.q;
        CHECK(validate(c).empty());
        CHECK(c.K == 3);
        CHECK(c.T == 4);
        for (int i = 0; i < 3; ++i)
            for (int t = 0; t < 4; ++t) CHECK(c.omega(i, t) == cs.kmeans.centroids(c.id, i));
    }
    CHECK(std::abs(q - 1.0) <= 1e-12);
    ClusterSet again = build_clusters(b, rec, 3, 5);
    CHECK(again.clusters == cs.clusters);

    const auto path = std::filesystem::temp_directory_path() / "greencap_clusters.json";
    save_clusters(cs.clusters, path.string());
    CHECK(load_clusters(path.string()) == cs.clusters);
    CHECK(clusters_from_json(nlohmann::json::parse(to_json(cs.clusters).dump())) == cs.clusters);
}

}  // TEST_SUITE
