#include <doctest.h>

#include "greencap/codec.hpp"
#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace greencap;
using namespace greencap::testing;
namespace fs = std::filesystem;

namespace {

ClusterSpec cells_cluster(int K, int T, std::uint64_t seed = 1) {
    Instance in = tiny_instance(seed, 1, 1, K, T);
    return tiny_cluster(in, seed);
}

DiscreteDistribution dist_of(std::vector<Scenario> s, std::vector<double> p = {}) {
    DiscreteDistribution d;
    d.scenarios = std::move(s);
    d.prob = p.empty() ? std::vector<double>(d.scenarios.size(), 1.0 / d.scenarios.size()) : p;
    return d;
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("greencap_codec_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("codec") {

TEST_CASE("corner labels") {
    ClusterSpec c = cells_cluster(1, 2);
    CHECK(encode_scenario(c.lower_corner(), c) == LabelVector::Zero(2));
    CHECK(encode_scenario(c.upper_corner(), c) == LabelVector::Ones(2));
    Scenario xi(2);
    xi << c.xi_hi(0), c.xi_lo(1);
    LabelVector b = encode_scenario(xi, c);
    CHECK(b(0) == 1);
    CHECK(b(1) == 0);
    CHECK(label_value(b) == 2);
}

TEST_CASE("non-boundary and mismatched scenarios are rejected") {
    ClusterSpec c = cells_cluster(1, 2);
    Scenario mid = 0.5 * (c.xi_lo + c.xi_hi);
    try {
        encode_scenario(mid, c);
        FAIL("expected an error");
    } catch (const CodecError& e) {
        CHECK(e.kind() == CodecError::Kind::NonBoundary);
    }
    CHECK_THROWS_AS(encode_scenario(Scenario::Zero(3), c), CodecError);
}

TEST_CASE("degenerate cells encode as zero") {
    ClusterSpec c = cells_cluster(1, 2);
    c.xi_hi(1) = c.xi_lo(1);
    c.gamma_lo(1) = c.gamma_hi(1) = c.xi_lo(1);
    LabelVector b = encode_scenario(c.upper_corner(), c);
    CHECK(b(0) == 1);
    CHECK(b(1) == 0);
    CHECK(decode_label(b, c) == c.upper_corner());
}

TEST_CASE("decode inverts encode on random corners") {
    std::mt19937_64 rng(3);
    for (int n = 0; n < 2000; ++n) {
        const int K = 1 + n % 2, T = 1 + n % 3;
        ClusterSpec c = cells_cluster(K, T, n);
        const std::uint64_t mask = rng() & ((1ULL << c.cells()) - 1);
        Scenario xi = corner(c, mask);
        REQUIRE(decode_label(encode_scenario(xi, c), c) == xi);
    }
}

TEST_CASE("image of a single scenario repeats it") {
    ClusterSpec c = cells_cluster(2, 3);
    ScenarioImage img = sample_image(dist_of({corner(c, 0b101001)}), c, 50, Weighting::Uniform, 9);
    CHECK(img.rows() == 50);
    CHECK(img.cols() == 6);
    for (int r = 1; r < 50; ++r) CHECK(img.row(r) == img.row(0));
}

TEST_CASE("two-point support splits roughly in half") {
    ClusterSpec c = cells_cluster(1, 3);
    DiscreteDistribution d = dist_of({c.lower_corner(), c.upper_corner()});
    double zeros = 0.0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        ScenarioImage img = sample_image(d, c, 50, Weighting::Uniform, seed);
        REQUIRE(rows_sorted(img));
        int z = 0;
        while (z < 50 && img.row(z).sum() == 0) ++z;
        for (int r = z; r < 50; ++r) REQUIRE(img.row(r).cast<int>().sum() == 3);
        zeros += z;
    }
    CHECK(std::abs(zeros / 1000.0 - 25.0) <= 1.5);
}

TEST_CASE("probability weighting follows the support probabilities") {
    ClusterSpec c = cells_cluster(1, 2);
    DiscreteDistribution d = dist_of({c.lower_corner(), c.upper_corner()}, {0.9, 0.1});
    double zeros = 0.0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        ScenarioImage img = sample_image(d, c, 50, Weighting::Probability, seed);
        for (int r = 0; r < 50; ++r) zeros += img.row(r).cast<int>().sum() == 0;
    }
    CHECK(zeros / (400.0 * 50.0) == doctest::Approx(0.9).epsilon(0.02));
}

TEST_CASE("sampling is deterministic, sorted and decodes into the support") {
    std::mt19937_64 rng(17);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        ClusterSpec c = cells_cluster(2, 2, seed % 7);
        std::vector<Scenario> sup;
        const int n = 1 + static_cast<int>(rng() % 5);
        for (int k = 0; k < n; ++k) sup.push_back(corner(c, rng() % 16));
        DiscreteDistribution d = dist_of(sup);
        ScenarioImage a = sample_image(d, c, 50, Weighting::Uniform, seed);
        ScenarioImage b = sample_image(d, c, 50, Weighting::Uniform, seed);
        REQUIRE(a == b);
        REQUIRE(rows_sorted(a));
        for (int r = 1; r < 50; ++r)
            REQUIRE(label_value(a.row(r - 1)) <= label_value(a.row(r)));
        for (const Scenario& xi : decode_image(a, c))
            REQUIRE(std::find(sup.begin(), sup.end(), xi) != sup.end());
    }
}

TEST_CASE("decoding keeps distinct rows in order") {
    ClusterSpec c = cells_cluster(1, 2);
    ScenarioImage zero = ScenarioImage::Zero(50, 2);
    auto one = decode_image(zero, c);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == c.lower_corner());

    ScenarioImage img(3, 2);
    img << 0, 0, 0, 1, 1, 1;
    auto three = decode_image(img, c);
    REQUIRE(three.size() == 3);
    CHECK(three[0] == corner(c, 0));
    CHECK(three[1] == corner(c, 0b10));  // second cell high
    CHECK(three[2] == corner(c, 0b11));

    try {
        decode_image(ScenarioImage::Zero(4, 3), c);
        FAIL("expected an error");
    } catch (const CodecError& e) {
        CHECK(e.kind() == CodecError::Kind::DimensionMismatch);
    }
}

TEST_CASE("pbm round trip and malformed input") {
    ScenarioImage img(3, 4);
    img << 0, 0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 1;
    std::string text = to_pbm(img);
    CHECK(text.rfind("P1\n", 0) == 0);
    std::istringstream is(text);
    CHECK(read_pbm(is) == img);

    std::istringstream packed("P1 4 1\n0110");
    ScenarioImage p = read_pbm(packed);
    CHECK(p.cols() == 4);
    CHECK(p(0, 1) == 1);

    for (const char* bad : {"P4 1 1\n0", "P1\n2 2\n0 1 0\n", "P1\n1 1\n2\n", "P1\n2 1\n0 1 1\n"}) {
        std::istringstream b(bad);
        CHECK_THROWS_AS(read_pbm(b), CodecError);
    }
}

TEST_CASE("features at the corpus mean project to zero") {
    Instance in = tiny_instance(4, 1, 2, 1, 2);
    ClusterSpec c = tiny_cluster(in, 4);
    FirstStageDecision x(in.dims());
    VectorXd r0 = raw_features(x, in, c);
    std::mt19937_64 rng(5);
    MatrixXd corpus(8, r0.size());
    for (int k = 0; k < 4; ++k) {
        VectorXd delta = VectorXd::NullaryExpr(r0.size(), [&] { return uniform(rng, -1, 1); });
        corpus.row(2 * k) = (r0 + delta).transpose();
        corpus.row(2 * k + 1) = (r0 - delta).transpose();
    }
    FeatureModel fm = FeatureModel::fit(corpus);
    VectorXd f = build_feature(x, in, c, fm);
    CHECK(f.size() == 50);
    CHECK(f.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(build_feature(x, in, c, fm) == f);
}

TEST_CASE("rank-3 corpus needs at most three components") {
    std::mt19937_64 rng(6);
    const int n = 40, p = 70;
    MatrixXd basis = MatrixXd::NullaryExpr(3, p, [&] { return uniform(rng, -1, 1); });
    MatrixXd coef = MatrixXd::NullaryExpr(n, 3, [&] { return uniform(rng, -5, 5); });
    MatrixXd corpus = coef * basis;
    corpus.col(7).setConstant(4.0);  // constant coordinate maps to 0
    FeatureModel fm = FeatureModel::fit(corpus);
    CHECK(fm.needed <= 3);
    CHECK(fm.components.cols() <= 3);
    CHECK(fm.explained.sum() >= 0.99);
    CHECK(fm.scale(7) == 0.0);
    for (int r = 0; r < n; ++r) {
        VectorXd f = fm.project(corpus.row(r).transpose());
        CHECK(f.tail(47).cwiseAbs().maxCoeff() == 0.0);
    }
    FeatureModel back = FeatureModel::from_json(nlohmann::json::parse(fm.to_json().dump()));
    CHECK(back.project(corpus.row(3).transpose()) == fm.project(corpus.row(3).transpose()));
}

TEST_CASE("wide corpus keeps 50 components and records the shortfall") {
    std::mt19937_64 rng(8);
    MatrixXd corpus = MatrixXd::NullaryExpr(120, 90, [&] { return uniform(rng, -1, 1); });
    FeatureModel fm = FeatureModel::fit(corpus);
    CHECK(fm.needed > 50);
    CHECK(fm.components.cols() == 50);
    CHECK(fm.project(corpus.row(0).transpose()).size() == 50);
}

TEST_CASE("unfitted model is rejected") {
    FeatureModel fm;
    try {
        fm.project(VectorXd::Zero(3));
        FAIL("expected an error");
    } catch (const CodecError& e) {
        CHECK(e.kind() == CodecError::Kind::UnfittedModel);
    }
}

TEST_CASE("dataset emission") {
    Instance in = tiny_instance(10, 1, 1, 1, 3);
    ClusterSpec c = tiny_cluster(in, 10);
    c.id = 4;
    Artifact a{"a0", in, ample_plan(in), c, dist_of({corner(c, 1), corner(c, 6)})};
    Artifact b = a;
    b.id = "b1";
    b.cluster.xi_hi(0) += 1.0;
    b.distribution = dist_of({corner(b.cluster, 2), corner(b.cluster, 5)});
    Artifact empty = a;
    empty.id = "e2";
    empty.distribution = {};

    SUBCASE("one item, three images") {
        fs::path dir = scratch("one");
        DatasetOptions o;
        o.images_per_item = 3;
        o.seed = 42;
        DatasetSummary s = emit_dataset({a}, dir.string(), o);
        CHECK(s.items == 1);
        CHECK(s.images == 3);
        std::istringstream csv(slurp(dir / "features.csv"));
        std::string line;
        int rows = 0;
        while (std::getline(csv, line)) {
            ++rows;
            CHECK(std::count(line.begin(), line.end(), ',') == 49);
        }
        CHECK(rows == 1);
        std::vector<nlohmann::json> sides;
        for (int k = 0; k < 3; ++k) {
            ScenarioImage img = read_pbm_file((dir / "images" / ("a0_" + std::to_string(k) + ".pbm")).string());
            CHECK(img.rows() == 50);
            CHECK(rows_sorted(img));
            sides.push_back(nlohmann::json::parse(slurp(dir / "images" / ("a0_" + std::to_string(k) + ".json"))));
            CHECK(sides.back()["cluster_id"] == 4);
        }
        CHECK(sides[0]["feature"] == sides[1]["feature"]);
        CHECK(sides[0]["seed"] != sides[1]["seed"]);
        auto man = nlohmann::json::parse(slurp(dir / "manifest.json"));
        CHECK(man["hash"] == s.hash);
        CHECK(man["sort"] == "ascending");
        CHECK(man["feature_blocks"].size() == feature_blocks(in.dims()).size());
    }
    SUBCASE("manifest hash is reproducible and skips empty items") {
        fs::path d1 = scratch("h1"), d2 = scratch("h2");
        DatasetOptions o;
        o.images_per_item = 2;
        o.seed = 7;
        o.threads = 3;
        std::ostringstream log;
        o.log = &log;
        DatasetSummary s1 = emit_dataset({a, empty, b}, d1.string(), o);
        o.threads = 1;
        DatasetSummary s2 = emit_dataset({a, empty, b}, d2.string(), o);
        CHECK(s1.hash == s2.hash);
        CHECK(s1.items == 2);
        CHECK(s1.skipped == 1);
        CHECK(log.str().find("e2") != std::string::npos);
        CHECK(slurp(d1 / "features.csv") == slurp(d2 / "features.csv"));
        o.seed = 8;
        CHECK(emit_dataset({a, b}, scratch("h3").string(), o).hash != s1.hash);
    }
    SUBCASE("no artifacts") { CHECK_THROWS_AS(emit_dataset({}, scratch("none").string()), InputError); }
}

}  // TEST_SUITE
