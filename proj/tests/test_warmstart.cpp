#include <doctest.h>

#include "greencap/warmstart.hpp"
#include "support.hpp"

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

using namespace greencap;
using namespace greencap::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("greencap_ws_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void put(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

ScenarioImage rows_of(const ClusterSpec& c, std::vector<std::uint64_t> masks) {
    std::sort(masks.begin(), masks.end(), [&](auto a, auto b) {
        return label_value(encode_scenario(corner(c, a), c)) < label_value(encode_scenario(corner(c, b), c));
    });
    ScenarioImage img(static_cast<int>(masks.size()), c.cells());
    for (std::size_t r = 0; r < masks.size(); ++r) img.row(r) = encode_scenario(corner(c, masks[r]), c);
    return img;
}

struct Tiny {
    Instance in;
    ClusterSpec cl;
    FirstStageDecision x;
};

Tiny tiny(std::uint64_t seed, int K = 1, int T = 3) {
    Tiny t{tiny_instance(seed, 1, 2, K, T), {}, {}};
    t.cl = tiny_cluster(t.in, seed);
    t.x = ample_plan(t.in);
    return t;
}

}  // namespace

TEST_SUITE("warmstart") {

TEST_CASE("loading a file-drop directory") {
    Tiny t = tiny(1);
    SUBCASE("three valid images") {
        fs::path d = scratch("three");
        for (int k = 0; k < 3; ++k) put(d / ("g" + std::to_string(k) + ".pbm"), to_pbm(rows_of(t.cl, {0, 5, 7})));
        GeneratedBatch b = load_batch(d.string(), t.cl);
        CHECK(b.images.size() == 3);
        CHECK(b.warnings.empty());
    }
    SUBCASE("wrong width is dropped with a warning") {
        fs::path d = scratch("width");
        put(d / "a.pbm", to_pbm(rows_of(t.cl, {1})));
        put(d / "b.pbm", to_pbm(ScenarioImage::Zero(5, 2)));
        put(d / "c.pbm", "P1\n3 2\n0 1\n");
        std::ostringstream log;
        GeneratedBatch b = load_batch(d.string(), t.cl, &log);
        CHECK(b.images.size() == 1);
        CHECK(b.warnings.size() == 2);
        CHECK(log.str().find("b.pbm") != std::string::npos);
    }
    SUBCASE("sidecars select the cluster") {
        fs::path d = scratch("side");
        fs::create_directories(d / "images");
        put(d / "images" / "x_0.pbm", to_pbm(rows_of(t.cl, {1})));
        put(d / "images" / "x_0.json", nlohmann::json{{"cluster_id", t.cl.id}, {"feature", {1.0, 2.0}}}.dump());
        put(d / "images" / "y_0.pbm", to_pbm(rows_of(t.cl, {2})));
        put(d / "images" / "y_0.json", nlohmann::json{{"cluster_id", t.cl.id + 1}}.dump());
        GeneratedBatch b = load_batch(d.string(), t.cl);
        REQUIRE(b.images.size() == 1);
        CHECK(decode_image(b.images[0], t.cl)[0] == corner(t.cl, 1));
        CHECK(b.feature.size() == 2);
    }
    SUBCASE("empty directory") {
        try {
            load_batch(scratch("empty").string(), t.cl);
            FAIL("expected an error");
        } catch (const WarmstartError& e) {
            CHECK(e.kind() == WarmstartError::Kind::NoValidImages);
        }
    }
}

TEST_CASE("initial columns are augmented with the default seeds") {
    Tiny t = tiny(2);
    GeneratedBatch b;
    b.images.push_back(ScenarioImage::Zero(50, t.cl.cells()));
    auto cols = to_initial_columns(b, t.cl);
    REQUIRE(cols.size() == 3);
    CHECK(cols[0] == t.cl.lower_corner());
    CHECK(cols[1] == t.cl.upper_corner());
    CHECK(cols[2] == t.cl.gamma_mid());
}

TEST_CASE("feeding back a solved support converges in one round") {
    for (std::uint64_t seed : {3, 4, 5}) {
        Tiny t = tiny(seed, 2, 2);
        CgReport cold = run_cg(t.in, t.cl, t.x, WespMode::Optimality);
        GeneratedBatch b;
        b.images.push_back(sample_image(cold.distribution, t.cl, 50, Weighting::Uniform, seed));
        std::vector<Scenario> cols = to_initial_columns(b, t.cl);
        CgReport warm = run_cg(t.in, t.cl, t.x, WespMode::Optimality, cols);
        CHECK(warm.iterations == 1);
        CHECK(std::abs(warm.value - cold.value) <= 1e-6 * std::max(1.0, std::abs(cold.value)));
        CHECK(static_cast<int>(warm.columns.size()) <= static_cast<int>(cold.columns.size()) + static_cast<int>(cols.size()));
    }
}

TEST_CASE("garbage warm starts do not change CG values") {
    std::mt19937_64 rng(11);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Tiny t = tiny(100 + seed, 1 + seed % 2, 2 + seed % 2);
        for (WespMode mode : {WespMode::Optimality, WespMode::Feasibility}) {
            CgReport cold = run_cg(t.in, t.cl, t.x, mode);
            GeneratedBatch b;
            std::vector<std::uint64_t> masks;
            for (int k = 0; k < 6; ++k) masks.push_back(rng() % (1ULL << t.cl.cells()));
            b.images.push_back(rows_of(t.cl, masks));
            CgReport warm = run_cg(t.in, t.cl, t.x, mode, to_initial_columns(b, t.cl));
            CHECK(std::abs(warm.value - cold.value) <= 1e-6 * std::max(1.0, std::abs(cold.value)));
        }
    }
}

TEST_CASE("surrogate bound") {
    SUBCASE("converged support reproduces the value and is tight") {
        for (std::uint64_t seed : {6, 7, 8}) {
            Tiny t = tiny(seed, 1, 3);
            CgReport r = run_cg(t.in, t.cl, t.x, WespMode::Optimality);
            SurrogateBound sb = surrogate_bound(t.in, t.cl, t.x, r.distribution.scenarios);
            CHECK(sb.value == doctest::Approx(r.value).epsilon(1e-7));
            CHECK(sb.tight);
        }
    }
    SUBCASE("a corner inside the window forces a point mass") {
        Tiny t = tiny(9, 1, 2);
        t.cl.gamma_lo = t.cl.xi_lo;
        SurrogateBound sb = surrogate_bound(t.in, t.cl, t.x, {t.cl.lower_corner()});
        CHECK(sb.value == doctest::Approx(solve_recourse(t.in, t.cl, t.x, t.cl.lower_corner()).objective));
    }
    SUBCASE("columns outside the window give the sentinel") {
        Tiny t = tiny(10, 1, 2);
        SurrogateBound sb = surrogate_bound(t.in, t.cl, t.x, {t.cl.lower_corner()});
        CHECK(sb.value == -kInf);
        CHECK_FALSE(sb.tight);
    }
    SUBCASE("never above the CG value") {
        std::mt19937_64 rng(12);
        for (std::uint64_t seed = 0; seed < 15; ++seed) {
            Tiny t = tiny(200 + seed, 2, 2);
            CgReport r = run_cg(t.in, t.cl, t.x, WespMode::Optimality);
            std::vector<Scenario> cols = default_columns(t.cl);
            for (int k = 0; k < 3; ++k) cols.push_back(corner(t.cl, rng() % 16));
            SurrogateBound sb = surrogate_bound(t.in, t.cl, t.x, cols);
            CHECK(sb.value <= r.value + 1e-7 * std::max(1.0, std::abs(r.value)));
        }
    }
}

TEST_CASE("file-drop provider in the C&CG loop keeps the objective") {
    for (std::uint64_t seed : {20, 21}) {
        Instance in = tiny_instance(seed, 1, 2, 1, 2);
        in.initial_lines.setConstant(3);
        std::vector<ClusterSpec> cl{tiny_cluster(in, seed, 0.5), tiny_cluster(in, seed + 50, 0.5)};
        cl[1].id = 1;
        fs::path d = scratch("prov" + std::to_string(seed));
        fs::create_directories(d / "cluster_0");
        put(d / "cluster_0" / "g.pbm", to_pbm(rows_of(cl[0], {0, 1, 3})));
        put(d / "cluster_1" / "g.pbm", "garbage");
        std::ostringstream log;
        FileDropProvider prov(d.string(), &log);
        CHECK(prov.propose(in, cl[0], hold_initial(in), WespMode::Optimality).size() == 3);
        SolveOutcome cold = run_ccg_dro(in, cl);
        CcgOptions opts;
        opts.provider = &prov;
        SolveOutcome warm = run_ccg_dro(in, cl, opts);
        REQUIRE(cold.status == CcgStatus::Optimal);
        REQUIRE(warm.status == CcgStatus::Optimal);
        CHECK(std::abs(warm.objective - cold.objective) <= 1e-5 * std::max(1.0, std::abs(cold.objective)));
        opts.surrogate_only = true;
        opts.augment_master = true;
        SolveOutcome sur = run_ccg_dro(in, cl, opts);
        REQUIRE(sur.status == CcgStatus::Optimal);
        CHECK(std::abs(sur.objective - cold.objective) <= 1e-5 * std::max(1.0, std::abs(cold.objective)));
    }
}

TEST_CASE("http provider contract") {
    Tiny t = tiny(30, 1, 3);
    const std::string pbm = to_pbm(rows_of(t.cl, {0, 2, 7}));
    httplib::Server srv;
    std::atomic<int> hits{0};
    std::atomic<int> bad{0};
    srv.Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        auto j = nlohmann::json::parse(req.body, nullptr, false);
        if (j.is_discarded() || !j.contains("cluster_id") || j["feature"].size() != 50) {
            ++bad;
            res.status = 400;
            return;
        }
        nlohmann::json out = {{"images", {pbm, pbm}}, {"metadata", {{"checkpoint", "toy"}}}};
        res.set_content(out.dump(), "application/json");
    });
    srv.Post("/raw", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(pbm, "image/x-portable-bitmap");
    });
    const int port = srv.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread th([&] { srv.listen_after_bind(); });
    srv.wait_until_ready();

    Instance in = t.in;
    MatrixXd corpus(3, raw_features(t.x, in, t.cl).size());
    for (int r = 0; r < 3; ++r) {
        FirstStageDecision x = t.x;
        x.XO.array() += r;
        corpus.row(r) = raw_features(x, in, t.cl).transpose();
    }
    FeatureModel fm = FeatureModel::fit(corpus);
    const std::string base = "http://127.0.0.1:" + std::to_string(port);

    HttpProvider prov(base + "/generate", fm);
    std::vector<std::vector<Scenario>> got(8);
    std::vector<std::thread> pool;
    for (int k = 0; k < 8; ++k)
        pool.emplace_back([&, k] { got[k] = prov.propose(in, t.cl, t.x, WespMode::Optimality); });
    for (auto& p : pool) p.join();
    for (const auto& g : got) {
        REQUIRE(g.size() == 3);
        CHECK(g[1] == corner(t.cl, 2));
        CHECK(g == got[0]);
    }
    CHECK(hits == 8);
    CHECK(bad == 0);

    HttpProvider raw(base + "/raw", fm);
    CHECK(raw.propose(in, t.cl, t.x, WespMode::Feasibility).size() == 3);

    std::ostringstream log;
    HttpProvider missing(base + "/nothing", fm, &log);
    CHECK(missing.propose(in, t.cl, t.x, WespMode::Optimality).empty());
    CHECK(log.str().find("404") != std::string::npos);

    srv.stop();
    th.join();
}

}  // TEST_SUITE
