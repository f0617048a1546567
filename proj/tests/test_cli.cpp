#include <doctest.h>

#include "greencap/codec.hpp"
#include "greencap/eval.hpp"
#include "support.hpp"

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace greencap;
using namespace greencap::testing;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::string kCli = GREENCAP_CLI;
const std::string kData = GREENCAP_DATA_DIR;

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("greencap_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(const std::string& args, const fs::path& log = {}) {
    std::string cmd = kCli + " " + args;
    cmd += log.empty() ? " > /dev/null 2>&1" : " > '" + log.string() + "' 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

struct Fixture {
    fs::path dir;
    Instance in;
    std::vector<ClusterSpec> cl;
    std::string inst, clusters;
};

Fixture tiny_files(const std::string& name, std::uint64_t seed, int S = 2) {
    Fixture f{scratch(name), tiny_instance(seed, 1, 2, 1, 2), {}, {}, {}};
    f.in.initial_lines.setConstant(3);
    for (int s = 0; s < S; ++s) {
        ClusterSpec c = tiny_cluster(f.in, seed * 31 + s, 1.0 / S);
        c.id = s;
        f.cl.push_back(c);
    }
    f.inst = (f.dir / "instance.json").string();
    f.clusters = (f.dir / "clusters.json").string();
    save_instance(f.in, f.inst);
    save_clusters(f.cl, f.clusters);
    return f;
}

std::string paths(const Fixture& f) { return "--instance " + f.inst + " --clusters " + f.clusters; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("cluster on the shipped climate file") {
    fs::path d = scratch("cluster");
    const std::string climate = kData + "/climate_synthetic.csv";
    REQUIRE(run("cluster --climate " + climate + " --S 10 --seed 3 --out " + (d / "c10.json").string()) == 0);
    auto c10 = load_clusters((d / "c10.json").string());
    CHECK(c10.size() == 10);
    double q = 0.0;
    for (const ClusterSpec& c : c10) {
        q += c.q;
        CHECK(validate(c).empty());
    }
    CHECK(std::abs(q - 1.0) <= 1e-12);

    REQUIRE(run("cluster --climate " + climate + " --S 1 --out " + (d / "c1.json").string()) == 0);
    auto c1 = load_clusters((d / "c1.json").string());
    REQUIRE(c1.size() == 1);
    CHECK(c1[0].q == 1.0);

    CHECK(run("cluster --climate " + climate + " --S 1000 --out " + (d / "cx.json").string()) == 4);
    CHECK_FALSE(fs::exists(d / "cx.json"));
    CHECK(run("cluster --climate /nonexistent.csv --S 2 --out " + (d / "cy.json").string()) == 4);
}

TEST_CASE("shipped base case matches the built-in case study") {
    CHECK(load_instance(kData + "/base_case.json") == base_case());
}

TEST_CASE("solve writes reproducible artifacts and matches the oracle") {
    Fixture f = tiny_files("solve", 7);
    MonolithResult ref = solve_monolith(f.in, f.cl);
    REQUIRE(ref.status == SolveStatus::Optimal);
    const double tol = 1e-5 * std::max(1.0, std::abs(ref.objective));

    for (std::string method : {"ccg-dro", "basic-ccg"}) {
        fs::path out = f.dir / method;
        REQUIRE(run("solve " + paths(f) + " --method " + method + " --out " + out.string()) == 0);
        for (const char* file : {"manifest.json", "decision.json", "bound_trace.csv", "support.json"})
            CHECK(fs::exists(out / file));
        json m = load(out / "manifest.json");
        CHECK(m["method"] == method);
        CHECK(m["status"] == "optimal");
        CHECK(std::abs(m["objective"].get<double>() - ref.objective) <= tol);
        CHECK(m["instance_hash"] == instance_hash(f.in));
        CHECK(m["clusters_hash"] == clusters_hash(f.cl));
        CHECK(m["tol"] == 1e-5);
        CHECK(m["solver"] == "highs");
        FirstStageDecision x = decision_from_json(load(out / "decision.json"), f.in);
        CHECK(strategic_cost(f.in, x) == doctest::Approx(m["strategic_cost"]["total"].get<double>()));
        CHECK(load(out / "support.json").size() == f.cl.size());
    }

    // the same command reproduces the decision bit for bit
    fs::path again = f.dir / "again";
    REQUIRE(run("solve " + paths(f) + " --out " + again.string()) == 0);
    CHECK(slurp(again / "decision.json") == slurp(f.dir / "ccg-dro" / "decision.json"));
    CHECK(slurp(again / "support.json") == slurp(f.dir / "ccg-dro" / "support.json"));

    fs::path sp = f.dir / "sp";
    REQUIRE(run("solve " + paths(f) + " --method saa-sp --samples 8 --sampler truncated_gaussian --seed 4 --out " +
                sp.string()) == 0);
    json m = load(sp / "manifest.json");
    CHECK(m["sampler"]["kind"] == "truncated_gaussian");
    CHECK(m["sampler"]["count"] == 8);
    CHECK(m["sampler"]["seed"] == 4);
    CHECK(fs::exists(sp / "samples.json"));
    CHECK(m["objective"].get<double>() <= ref.objective + tol);
}

TEST_CASE("exit codes") {
    Fixture f = tiny_files("exit", 9);
    CHECK(run("solve " + paths(f) + " --max-iterations 1 --method basic-ccg --out " + (f.dir / "lim").string()) == 3);
    CHECK(load(f.dir / "lim" / "manifest.json")["status"] == "iteration-limit");

    Fixture g = tiny_files("infeasible", 21, 1);
    g.in.lambda = 0.99;
    g.cl[0].xi_hi.array() += 1e4;
    g.cl[0].gamma_hi.array() += 10.0;
    save_instance(g.in, g.inst);
    save_clusters(g.cl, g.clusters);
    CHECK(run("solve " + paths(g) + " --out " + (g.dir / "o").string()) == 2);
    CHECK(load(g.dir / "o" / "manifest.json")["status"] == "dro-infeasible");

    CHECK(run("solve --instance /nonexistent.json --clusters " + f.clusters + " --out " + (f.dir / "x").string()) == 4);
    CHECK(run("solve " + paths(f) + " --method nope --out " + (f.dir / "x").string()) == 4);
    CHECK(run("solve " + paths(f) + " --bogus-flag --out " + (f.dir / "x").string()) == 4);
    CHECK(run("--solver nope solve " + paths(f) + " --out " + (f.dir / "x").string()) == 4);
    CHECK(run("solve " + paths(f) + " --out " + (f.dir / "x").string() + " --warmstart-dir /nonexistent") == 4);
    CHECK(run("--help") == 0);

    Instance bad = f.in;
    bad.tau = 3.0;
    save_instance(bad, (f.dir / "bad.json").string());
    CHECK(run("solve --instance " + (f.dir / "bad.json").string() + " --clusters " + f.clusters + " --out " +
              (f.dir / "x").string()) == 4);
}

TEST_CASE("solver backend from the environment") {
    Fixture f = tiny_files("env", 10);
    CHECK(run("solve " + paths(f) + " --out " + (f.dir / "a").string()) == 0);
    const std::string cmd = "GREENCAP_SOLVER=nope " + kCli + " solve " + paths(f) + " --out " +
                            (f.dir / "b").string() + " > /dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(st) == 4);
}

TEST_CASE("config file overrides flags") {
    Fixture f = tiny_files("config", 11);
    std::ofstream(f.dir / "cfg.json") << R"({"method": "ccg-dro", "solve": {"max_iterations": 50}})";
    REQUIRE(run("solve " + paths(f) + " --method basic-ccg --max-iterations 1 --config " +
                (f.dir / "cfg.json").string() + " --out " + (f.dir / "o").string()) == 0);
    json m = load(f.dir / "o" / "manifest.json");
    CHECK(m["method"] == "ccg-dro");
    CHECK(m["limits"]["max_iterations"] == 50);
    std::ofstream(f.dir / "bad.json") << R"({"no_such_option": 1})";
    CHECK(run("solve " + paths(f) + " --config " + (f.dir / "bad.json").string() + " --out " +
              (f.dir / "p").string()) == 4);
}

TEST_CASE("evaluate and compare") {
    Fixture f = tiny_files("eval", 12);
    REQUIRE(run("solve " + paths(f) + " --out " + (f.dir / "dro").string()) == 0);
    REQUIRE(run("solve " + paths(f) + " --method saa-sp --samples 5 --out " + (f.dir / "sp").string()) == 0);
    for (std::string m : {"dro", "sp"})
        REQUIRE(run("evaluate " + paths(f) + " --decision " + (f.dir / m / "decision.json").string() +
                    " --out " + (f.dir / (m + ".json")).string()) == 0);
    json dro = load(f.dir / "dro.json");
    const double obj = load(f.dir / "dro" / "manifest.json")["objective"].get<double>();
    CHECK(dro["total"].get<double>() == doctest::Approx(obj).epsilon(1e-5));

    REQUIRE(run("evaluate " + paths(f) + " --decision " + (f.dir / "dro" / "decision.json").string() +
                " --mode sampled --samples 10 --sampler uniform --out " + (f.dir / "s.json").string()) == 0);
    json s = load(f.dir / "s.json");
    CHECK(s["scenarios"] == 20);
    CHECK(s["total"].get<double>() <= obj + 1e-6);

    const std::string d = (f.dir / "dro.json").string(), p = (f.dir / "sp.json").string();
    REQUIRE(run("compare --method dro=" + d + "," + d + " --method sp=" + p + "," + p + " --out " +
                (f.dir / "comparison.csv").string()) == 0);
    std::istringstream csv(slurp(f.dir / "comparison.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line.rfind("method,instances,feasible,averaged,total", 0) == 0);
    std::getline(csv, line);
    CHECK(line.rfind("dro,2,", 0) == 0);
    CHECK(run("compare --method dro=" + d) == 4);
}

TEST_CASE("encode-dataset from solve output") {
    Fixture f = tiny_files("encode", 13);
    REQUIRE(run("solve " + paths(f) + " --out " + (f.dir / "run").string()) == 0);
    fs::path ds = f.dir / "ds";
    REQUIRE(run("encode-dataset --run " + (f.dir / "run").string() + " --images-per-item 3 --rows 20 --seed 5 --out " +
                ds.string()) == 0);
    json m = load(ds / "manifest.json");
    CHECK(m["items"] == 2);
    CHECK(m["images"] == 6);
    CHECK(m["rows"] == 20);
    CHECK(fs::exists(ds / "feature_model.json"));
    CHECK(fs::exists(ds / "features.csv"));
    const std::string first = m["item_ids"][0].get<std::string>();
    ScenarioImage img = read_pbm_file((ds / "images" / (first + "_0.pbm")).string());
    CHECK(img.rows() == 20);
    CHECK(img.cols() == f.cl[0].cells());

    fs::path ds2 = f.dir / "ds2";
    REQUIRE(run("encode-dataset --run " + (f.dir / "run").string() + " --images-per-item 3 --rows 20 --seed 5 --out " +
                ds2.string()) == 0);
    CHECK(load(ds2 / "manifest.json")["hash"] == m["hash"]);

    // the dataset doubles as a file-drop warm start source
    fs::path drop = f.dir / "drop";
    fs::create_directories(drop / "cluster_0");
    fs::copy_file(ds / "images" / (first + "_0.pbm"), drop / "cluster_0" / "a.pbm");
    REQUIRE(run("solve " + paths(f) + " --warmstart-dir " + drop.string() + " --out " + (f.dir / "warm").string()) == 0);
    const double cold = load(f.dir / "run" / "manifest.json")["objective"].get<double>();
    const double warm = load(f.dir / "warm" / "manifest.json")["objective"].get<double>();
    CHECK(std::abs(cold - warm) <= 1e-5 * std::max(1.0, std::abs(cold)));
}

TEST_CASE("gen-instances is deterministic") {
    fs::path d = scratch("gen");
    REQUIRE(run("gen-instances --count 3 --seed 8 --out " + (d / "a").string()) == 0);
    REQUIRE(run("gen-instances --count 3 --seed 8 --out " + (d / "b").string()) == 0);
    for (const char* file : {"inst_000.json", "inst_002.json", "manifest.json"})
        CHECK(slurp(d / "a" / file) == slurp(d / "b" / file));
    Instance p = load_instance((d / "a" / "inst_001.json").string());
    CHECK(p.tau >= 0.01);
    CHECK(p.tau <= 0.20);
    CHECK(validate(p).empty());
}

TEST_CASE("experiment smoke batch") {
    Fixture f = tiny_files("exp", 14);
    fs::path drop = f.dir / "drop";
    fs::create_directories(drop);
    std::ofstream(drop / "g.pbm") << "P1\n2 1\n0 1\n";
    const std::string common = "experiment --base " + f.inst + " --clusters " + f.clusters +
                               " --count 10 --seed 2 --jobs 4 --methods ccg-dro,basic-ccg --warmstart-dir " +
                               drop.string() + " --out ";
    REQUIRE(run(common + (f.dir / "a").string()) == 0);
    REQUIRE(run(common + (f.dir / "b").string()) == 0);
    const std::string agg = slurp(f.dir / "a" / "aggregate.csv");
    CHECK(agg == slurp(f.dir / "b" / "aggregate.csv"));
    int rows = -1;
    std::istringstream is(agg);
    for (std::string line; std::getline(is, line);) ++rows;
    CHECK(rows == 30);
    for (int i = 0; i < 10; ++i) {
        std::ostringstream name;
        name << "inst_00" << i;
        CHECK(fs::exists(f.dir / "a" / name.str() / "ccg-dro" / "manifest.json"));
    }
    std::istringstream paired(slurp(f.dir / "a" / "paired.csv"));
    rows = -1;
    for (std::string line; std::getline(paired, line);) ++rows;
    CHECK(rows == 10);
    CHECK(fs::exists(f.dir / "a" / "comparison.csv"));
    CHECK(fs::exists(f.dir / "a" / "timings.csv"));
}

}  // TEST_SUITE
