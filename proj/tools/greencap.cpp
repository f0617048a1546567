// greencap: command-line driver for clustering, solving, evaluation and experiments.
#include "greencap/climate.hpp"
#include "greencap/codec.hpp"
#include "greencap/eval.hpp"
#include "greencap/warmstart.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

using namespace greencap;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kInternal = 1, kInfeasible = 2, kLimit = 3, kInput = 4 };

json num(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double num_from(const json& v) {
    if (v.is_string()) return v.get<std::string>() == "-inf" ? -kInf : kInf;
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return v.get<double>();
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_text(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw InputError("cannot write " + p.string());
    out << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

const std::string& with_parent(const std::string& path) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return path;
}

Instance instance_or_base(const std::string& path) {
    return path.empty() ? base_case() : load_instance(path);
}

std::string absolute(const std::string& p) { return p.empty() ? p : fs::absolute(p).string(); }

std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

std::string self_path(const char* argv0) {
    std::error_code ec;
    fs::path p = fs::read_symlink("/proc/self/exe", ec);
    return ec ? fs::absolute(argv0).string() : p.string();
}

// ---- config file ----------------------------------------------------------------------

std::string as_arg(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
}

bool set_option(CLI::App* app, std::string key, const json& v) {
    std::replace(key.begin(), key.end(), '_', '-');
    CLI::Option* opt = nullptr;
    try {
        opt = app->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
        return false;
    }
    opt->clear();
    if (v.is_array())
        for (const json& e : v) opt->add_result(as_arg(e));
    else
        opt->add_result(as_arg(v));
    opt->run_callback();
    return true;
}

// Values from the JSON config replace whatever the command line set. Top-level scalars go
// to the active subcommand (then the global options); an object named after a subcommand
// applies only there.
void apply_config(const std::string& path, CLI::App& app, CLI::App* active) {
    json cfg = read_json(path);
    if (!cfg.is_object()) throw InputError(path + ": config must be a JSON object");
    for (auto& [key, v] : cfg.items()) {
        if (v.is_object()) {
            if (active && key == active->get_name())
                for (auto& [k2, v2] : v.items())
                    if (!set_option(active, k2, v2))
                        throw InputError(path + ": unknown option '" + k2 + "' for " + key);
            continue;
        }
        if (key == "config") continue;
        if (active && set_option(active, key, v)) continue;
        if (set_option(&app, key, v)) continue;
        throw InputError(path + ": unknown option '" + key + "'");
    }
}

// ---- solve artifacts -----------------------------------------------------------------

json distribution_json(const DiscreteDistribution& d, const std::vector<double>& values) {
    json sc = json::array();
    for (const Scenario& xi : d.scenarios) sc.push_back(std::vector<double>(xi.data(), xi.data() + xi.size()));
    return {{"scenarios", sc}, {"prob", d.prob}, {"values", values}};
}

json support_json(const SolveOutcome& o) {
    json out = json::array();
    for (const ClusterResult& r : o.clusters) {
        json e = distribution_json(r.support, r.support_values);
        e["cluster"] = r.cluster;
        e["feasible"] = r.feasible;
        e["value"] = num(r.value);
        e["violation"] = r.violation;
        e["cg_iterations"] = r.cg_iterations;
        e["cell_order"] = "k-major";
        out.push_back(e);
    }
    return out;
}

DiscreteDistribution distribution_from_json(const json& e) {
    DiscreteDistribution d;
    for (const json& s : e.at("scenarios")) {
        std::vector<double> v = s.get<std::vector<double>>();
        d.scenarios.push_back(Eigen::Map<VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    d.prob = e.at("prob").get<std::vector<double>>();
    if (d.prob.size() != d.scenarios.size()) throw InputError("support JSON: prob/scenario mismatch");
    return d;
}

// ---- warm start ----------------------------------------------------------------------

struct WarmstartFlags {
    std::string dir, url, feature_model;
    double timeout = 10.0;
    bool surrogate_only = false, augment_master = false;

    bool any() const { return !dir.empty() || !url.empty(); }
};

FeatureModel load_feature_model(const std::string& path) {
    json j = read_json(path);
    if (j.contains("normalization")) j = j["normalization"];
    return FeatureModel::from_json(j);
}

std::unique_ptr<ScenarioProvider> make_provider(const WarmstartFlags& w, std::ostream* log) {
    if (!w.dir.empty() && !w.url.empty())
        throw InputError("give either --warmstart-dir or --warmstart-url, not both");
    if (!w.dir.empty()) {
        if (!fs::is_directory(w.dir)) throw InputError("warm-start directory not found: " + w.dir);
        return std::make_unique<FileDropProvider>(w.dir, log);
    }
    if (!w.url.empty()) {
        if (w.feature_model.empty()) throw InputError("--warmstart-url needs --feature-model");
        return std::make_unique<HttpProvider>(w.url, load_feature_model(w.feature_model), log, w.timeout);
    }
    if (w.surrogate_only || w.augment_master)
        throw InputError("--surrogate-only and --augment-master need a warm-start source");
    return nullptr;
}

void add_warmstart_flags(CLI::App* sub, WarmstartFlags& w) {
    sub->add_option("--warmstart-dir", w.dir, "Directory polled for generated PBM images");
    sub->add_option("--warmstart-url", w.url, "Generator endpoint for JSON POST requests");
    sub->add_option("--feature-model", w.feature_model,
                    "Feature model JSON (or dataset manifest) used to build request features");
    sub->add_option("--warmstart-timeout", w.timeout, "HTTP timeout in seconds");
    sub->add_flag("--surrogate-only", w.surrogate_only,
                  "Use restricted masters over generated columns until they stall");
    sub->add_flag("--augment-master", w.augment_master,
                  "Seed the master cut sets with generated columns");
}

std::vector<std::string> warmstart_args(const WarmstartFlags& w) {
    std::vector<std::string> a;
    if (!w.dir.empty()) a.insert(a.end(), {"--warmstart-dir", absolute(w.dir)});
    if (!w.url.empty()) a.insert(a.end(), {"--warmstart-url", w.url});
    if (!w.feature_model.empty()) a.insert(a.end(), {"--feature-model", absolute(w.feature_model)});
    if (w.surrogate_only) a.push_back("--surrogate-only");
    if (w.augment_master) a.push_back("--augment-master");
    return a;
}

// ---- subcommands ---------------------------------------------------------------------

struct GenFlags {
    std::string base, out, write_base;
    int count = 10;
    std::uint64_t seed = 1;
    std::vector<double> cost_range{0.8, 1.2}, tau_range{0.01, 0.20}, scale_range{1.0, 4.0};
};

int cmd_gen(const GenFlags& f) {
    if (!f.write_base.empty()) save_instance(base_case(), with_parent(f.write_base));
    if (f.count == 0) return kOk;
    if (f.count < 0) throw InputError("--count must be nonnegative");
    if (f.out.empty()) throw InputError("--out is required");
    const Instance base = instance_or_base(f.base);
    if (auto v = validate(base); !v.empty()) throw InputError("base instance invalid: " + v.front().field);
    PerturbRanges r{f.cost_range[0], f.cost_range[1], f.tau_range[0], f.tau_range[1],
                    f.scale_range[0], f.scale_range[1]};
    fs::create_directories(f.out);
    json items = json::array();
    for (int i = 0; i < f.count; ++i) {
        const std::uint64_t s = derive_seed(f.seed, i, 0);
        Instance p = perturb(base, s, r);
        std::ostringstream name;
        name << "inst_" << std::setw(3) << std::setfill('0') << i;
        p.name = name.str();
        save_instance(p, (fs::path(f.out) / (p.name + ".json")).string());
        items.push_back({{"file", p.name + ".json"}, {"seed", s}, {"hash", instance_hash(p)},
                         {"tau", p.tau}, {"ambiguity_scale", p.ambiguity_scale}});
    }
    write_json(fs::path(f.out) / "manifest.json",
               {{"version", kVersion}, {"base", f.base.empty() ? "case-study" : f.base},
                {"base_hash", instance_hash(base)}, {"seed", f.seed},
                {"ranges", {{"cost", f.cost_range}, {"tau", f.tau_range}, {"scale", f.scale_range}}},
                {"items", items}});
    std::cout << "wrote " << f.count << " instances to " << f.out << "\n";
    return kOk;
}

struct ClusterFlags {
    std::string instance, climate, out;
    int S = 10;
    std::uint64_t seed = 1;
    int samples_per_member = 20;
};

ClusterSet run_cluster(const Instance& inst, const ClusterFlags& f) {
    auto records = load_climate_csv(f.climate);
    DemandModel dm;
    dm.samples_per_member = f.samples_per_member;
    return build_clusters(inst, records, f.S, f.seed, dm);
}

int cmd_cluster(const ClusterFlags& f) {
    if (f.climate.empty()) throw InputError("--climate is required");
    if (f.out.empty()) throw InputError("--out is required");
    if (f.S < 1) throw InputError("--S must be at least 1");
    const Instance inst = instance_or_base(f.instance);
    ClusterSet cs = run_cluster(inst, f);
    save_clusters(cs.clusters, with_parent(f.out));
    double q = 0.0;
    for (const ClusterSpec& c : cs.clusters) q += c.q;
    std::cout << "clusters " << cs.clusters.size() << " wcss " << cs.kmeans.wcss << " sum_q "
              << std::setprecision(17) << q << "\n";
    return kOk;
}

struct LimitFlags {
    double tol = 1e-5;
    int max_iterations = 100;
    double time_limit = 3000.0;
    int threads = 0;
};

void add_limit_flags(CLI::App* sub, LimitFlags& l) {
    sub->add_option("--tol", l.tol, "Absolute UB-LB gap for termination")->check(CLI::PositiveNumber);
    sub->add_option("--max-iterations", l.max_iterations, "C&CG iteration limit")->check(CLI::PositiveNumber);
    sub->add_option("--time-limit", l.time_limit, "Wall-clock limit in seconds")->check(CLI::PositiveNumber);
    sub->add_option("--threads", l.threads, "Worker threads for cluster subproblems (0: auto)");
}

CcgOptions ccg_options(const LimitFlags& l) {
    CcgOptions o;
    o.tol = l.tol;
    o.max_iterations = l.max_iterations;
    o.time_limit = l.time_limit;
    o.threads = l.threads;
    return o;
}

struct SamplerFlags {
    int samples = 50;
    std::string sampler = "uniform";
    std::uint64_t seed = 1;
};

void add_sampler_flags(CLI::App* sub, SamplerFlags& s) {
    sub->add_option("--samples", s.samples, "Samples per cluster")->check(CLI::PositiveNumber);
    sub->add_option("--sampler", s.sampler, "uniform | truncated_gaussian");
    sub->add_option("--seed", s.seed, "Sampling seed");
}

struct SolveFlags {
    std::string instance, clusters, out, method = "ccg-dro";
    LimitFlags limits;
    SamplerFlags sampler;
    WarmstartFlags warm;
    bool verbose = false;
};

int saa_exit(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal: return kOk;
    case SolveStatus::Infeasible: return kInfeasible;
    case SolveStatus::TimeLimit:
    case SolveStatus::IterationLimit: return kLimit;
    default: return kInternal;
    }
}

int cmd_solve(const SolveFlags& f, const std::vector<std::string>& argv) {
    if (f.clusters.empty()) throw InputError("--clusters is required");
    if (f.out.empty()) throw InputError("--out is required");
    const Instance inst = instance_or_base(f.instance);
    if (auto v = validate(inst); !v.empty())
        throw InputError("instance invalid: " + v.front().field + " " + v.front().rule);
    const std::vector<ClusterSpec> clusters = load_clusters(f.clusters);
    fs::create_directories(f.out);
    const fs::path out(f.out);
    json common = {{"version", kVersion},
                   {"argv", argv},
                   {"instance_path", f.instance.empty() ? "" : absolute(f.instance)},
                   {"clusters_path", absolute(f.clusters)}};

    if (f.method == "saa-sp") {
        SampleSet set = draw_samples(clusters, sampler_from_string(f.sampler.sampler), f.sampler.samples,
                                     f.sampler.seed);
        SolveOptions lim;
        lim.time_limit = f.limits.time_limit;
        SaaOutcome o = solve_saa(inst, clusters, set, lim);
        json m = common;
        m.update({{"method", "saa-sp"},
                  {"instance", inst.name},
                  {"instance_hash", instance_hash(inst)},
                  {"clusters_hash", clusters_hash(clusters)},
                  {"clusters", clusters.size()},
                  {"solver", selected_backend()},
                  {"sampler", {{"kind", to_string(set.kind)}, {"count", f.sampler.samples},
                               {"seed", f.sampler.seed}, {"draws", set.stats.draws},
                               {"rejections", set.stats.rejections}}},
                  {"limits", {{"time_limit", num(f.limits.time_limit)}}},
                  {"status", to_string(o.status)},
                  {"objective", num(o.objective)},
                  {"bound", num(o.bound)},
                  {"seconds", {{"total", o.seconds}}},
                  {"strategic_cost", {{"adjustment", o.strategic.adjustment},
                                      {"upgrade", o.strategic.upgrade},
                                      {"renewable", o.strategic.renewable},
                                      {"total", o.strategic.total()}}},
                  {"expected_recourse", num(o.expected_recourse)}});
        if (o.status == SolveStatus::Optimal) {
            m["plan"] = to_json(o.x, inst);
            write_json(out / "decision.json", to_json(o.x, inst));
        }
        write_json(out / "samples.json", to_json(set));
        write_json(out / "manifest.json", m);
        std::cout << "saa-sp " << to_string(o.status) << " objective " << std::setprecision(10)
                  << o.objective << "\n";
        return saa_exit(o.status);
    }

    CcgOptions opts = ccg_options(f.limits);
    if (f.verbose) opts.log = &std::cerr;
    auto provider = make_provider(f.warm, &std::cerr);
    opts.provider = provider.get();
    opts.surrogate_only = f.warm.surrogate_only;
    opts.augment_master = f.warm.augment_master;
    SolveOutcome o;
    if (f.method == "ccg-dro")
        o = run_ccg_dro(inst, clusters, opts);
    else if (f.method == "basic-ccg")
        o = run_basic_ccg(inst, clusters, opts);
    else
        throw InputError("unknown method '" + f.method + "' (ccg-dro | basic-ccg | saa-sp)");

    json m = run_manifest(inst, clusters, opts, o, f.method);
    m.update(common);
    if (f.warm.any())
        m["warmstart"] = {{"source", f.warm.dir.empty() ? f.warm.url : absolute(f.warm.dir)},
                          {"surrogate_only", f.warm.surrogate_only},
                          {"augment_master", f.warm.augment_master}};
    write_json(out / "manifest.json", m);
    write_json(out / "decision.json", to_json(o.x, inst));
    std::ostringstream trace;
    write_bound_trace_csv(trace, o);
    write_text(out / "bound_trace.csv", trace.str());
    write_json(out / "support.json", support_json(o));
    std::cout << f.method << " " << to_string(o.status) << " objective " << std::setprecision(10)
              << o.objective << " lb " << o.lb << " iterations " << o.iterations << "\n";
    return exit_code(o.status);
}

struct EvalFlags {
    std::string instance, clusters, decision, mode = "worstcase", samples_file, out;
    SamplerFlags sampler;
    LimitFlags limits;
};

EvaluationReport run_evaluate(const EvalFlags& f) {
    if (f.clusters.empty() || f.decision.empty()) throw InputError("--clusters and --decision are required");
    const Instance inst = instance_or_base(f.instance);
    const auto clusters = load_clusters(f.clusters);
    json dj = read_json(f.decision);
    if (dj.contains("plan")) dj = dj["plan"];
    const FirstStageDecision x = decision_from_json(dj, inst);
    if (f.mode == "worstcase") return evaluate_worstcase(inst, clusters, x, ccg_options(f.limits));
    if (f.mode == "sampled") {
        SampleSet set = f.samples_file.empty()
                            ? draw_samples(clusters, sampler_from_string(f.sampler.sampler),
                                           f.sampler.samples, f.sampler.seed)
                            : sample_set_from_json(read_json(f.samples_file));
        return evaluate_sampled(inst, clusters, x, set, f.limits.threads);
    }
    throw InputError("unknown mode '" + f.mode + "' (worstcase | sampled)");
}

int cmd_evaluate(const EvalFlags& f) {
    EvaluationReport r = run_evaluate(f);
    if (f.out.empty())
        std::cout << to_json(r).dump(2) << "\n";
    else
        write_json(f.out, to_json(r));
    std::cerr << "evaluate " << f.mode << (r.feasible ? " feasible" : " infeasible") << " total "
              << std::setprecision(10) << r.total << "\n";
    return kOk;
}

struct EncodeFlags {
    std::vector<std::string> runs;
    std::string out, weighting = "uniform", feature_model;
    int images_per_item = 12, rows = 50, threads = 0;
    std::uint64_t seed = 1;
};

std::string artifact_id(const fs::path& run, int cluster) {
    std::string s = run.parent_path().filename().string() + "_" + run.filename().string();
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '-';
    return s + "_c" + std::to_string(cluster);
}

int cmd_encode(const EncodeFlags& f) {
    if (f.runs.empty()) throw InputError("--run is required");
    if (f.out.empty()) throw InputError("--out is required");
    std::vector<Artifact> items;
    for (const std::string& dir : f.runs) {
        const fs::path run = fs::absolute(dir).lexically_normal();
        const json m = read_json((run / "manifest.json").string());
        const Instance inst = instance_or_base(m.value("instance_path", ""));
        const auto clusters = load_clusters(m.at("clusters_path").get<std::string>());
        const FirstStageDecision x = decision_from_json(read_json((run / "decision.json").string()), inst);
        for (const json& e : read_json((run / "support.json").string())) {
            if (!e.value("feasible", true)) continue;
            const int c = e.at("cluster").get<int>();
            items.push_back({artifact_id(run, c), inst, x, clusters.at(c), distribution_from_json(e)});
        }
    }
    DatasetOptions opts;
    opts.images_per_item = f.images_per_item;
    opts.rows = f.rows;
    if (f.weighting == "probability")
        opts.weighting = Weighting::Probability;
    else if (f.weighting != "uniform")
        throw InputError("--weighting must be uniform or probability");
    opts.seed = f.seed;
    opts.threads = f.threads;
    opts.log = &std::cerr;
    FeatureModel model;
    if (!f.feature_model.empty()) {
        model = load_feature_model(f.feature_model);
        opts.model = &model;
    }
    DatasetSummary s = emit_dataset(items, f.out, opts);
    write_json(fs::path(f.out) / "feature_model.json", s.model.to_json());
    std::cout << "dataset items " << s.items << " images " << s.images << " skipped " << s.skipped
              << " hash " << s.hash << "\n";
    return kOk;
}

struct CompareFlags {
    std::vector<std::string> methods;
    std::string out;
};

int cmd_compare(const CompareFlags& f) {
    std::vector<MethodReports> methods;
    for (const std::string& spec : f.methods) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw InputError("--method expects NAME=report.json[,report.json...]");
        MethodReports m{spec.substr(0, eq), {}};
        std::stringstream ss(spec.substr(eq + 1));
        std::string file;
        while (std::getline(ss, file, ','))
            if (!file.empty()) m.reports.push_back(report_from_json(read_json(file)));
        methods.push_back(std::move(m));
    }
    auto rows = compare(methods);
    std::ostringstream csv;
    write_comparison_csv(csv, rows);
    if (f.out.empty())
        std::cout << csv.str();
    else
        write_text(f.out, csv.str());
    return kOk;
}

// ---- experiment harness -------------------------------------------------------------

struct ExperimentFlags {
    std::string base, climate, clusters, out;
    int count = 10, S = 10, jobs = 1, samples_per_member = 20;
    std::uint64_t seed = 1;
    std::vector<std::string> methods{"ccg-dro", "basic-ccg"};
    LimitFlags limits;
    SamplerFlags sampler;
    WarmstartFlags warm;
    bool evaluate = true;
};

struct RunRecord {
    std::string instance, method;
    int exit = -1;
    json manifest = json::object();
    json report;
};

std::string csv_num(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    std::ostringstream os;
    os << std::setprecision(17) << v.get<double>();
    return os.str();
}

int cmd_experiment(const ExperimentFlags& f, const std::string& exe) {
    if (f.out.empty()) throw InputError("--out is required");
    if (f.count < 1) throw InputError("--count must be positive");
    if (f.climate.empty() == f.clusters.empty()) throw InputError("give exactly one of --climate or --clusters");
    for (const std::string& m : f.methods)
        if (m != "ccg-dro" && m != "basic-ccg" && m != "saa-sp") throw InputError("unknown method '" + m + "'");
    const Instance base = instance_or_base(f.base);
    const fs::path root = fs::absolute(f.out);
    fs::create_directories(root);

    std::vector<std::string> names;
    std::vector<std::string> methods = f.methods;
    if (f.warm.any()) methods.push_back("ccg-dro-warm");
    for (int i = 0; i < f.count; ++i) {
        std::ostringstream name;
        name << "inst_" << std::setw(3) << std::setfill('0') << i;
        const fs::path dir = root / name.str();
        fs::create_directories(dir);
        Instance p = perturb(base, derive_seed(f.seed, i, 0));
        p.name = name.str();
        save_instance(p, (dir / "instance.json").string());
        if (f.clusters.empty()) {
            ClusterFlags cf{"", f.climate, "", f.S, derive_seed(f.seed, i, 1), f.samples_per_member};
            save_clusters(run_cluster(p, cf).clusters, (dir / "clusters.json").string());
        } else {
            fs::copy_file(f.clusters, dir / "clusters.json", fs::copy_options::overwrite_existing);
        }
        names.push_back(name.str());
    }

    std::vector<RunRecord> runs;
    for (const std::string& n : names)
        for (const std::string& m : methods) runs.push_back({n, m, -1, json::object(), {}});

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < runs.size(); r = next++) {
            RunRecord& rec = runs[r];
            const fs::path dir = root / rec.instance;
            const fs::path rd = dir / rec.method;
            const int idx = static_cast<int>(&rec - runs.data()) / static_cast<int>(methods.size());
            std::vector<std::string> args{exe, "solve", "--instance", (dir / "instance.json").string(),
                                          "--clusters", (dir / "clusters.json").string(),
                                          "--out", rd.string(), "--method",
                                          rec.method == "ccg-dro-warm" ? "ccg-dro" : rec.method};
            auto add = [&](const std::string& k, const std::string& v) { args.insert(args.end(), {k, v}); };
            std::ostringstream tol;
            tol << std::setprecision(17) << f.limits.tol;
            add("--tol", tol.str());
            add("--max-iterations", std::to_string(f.limits.max_iterations));
            add("--time-limit", std::to_string(f.limits.time_limit));
            add("--threads", std::to_string(f.limits.threads));
            add("--solver", selected_backend());
            if (rec.method == "saa-sp") {
                add("--samples", std::to_string(f.sampler.samples));
                add("--sampler", f.sampler.sampler);
                add("--seed", std::to_string(derive_seed(f.seed, idx, 2)));
            }
            if (rec.method == "ccg-dro-warm")
                for (const std::string& a : warmstart_args(f.warm)) args.push_back(a);
            std::string cmd;
            for (const std::string& a : args) cmd += quote(a) + " ";
            cmd += "> " + quote((rd.string() + ".log")) + " 2>&1";
            fs::create_directories(rd);
            const int st = std::system(cmd.c_str());
            rec.exit = WIFEXITED(st) ? WEXITSTATUS(st) : kInternal;
            if (fs::exists(rd / "manifest.json")) rec.manifest = read_json((rd / "manifest.json").string());
            if (f.evaluate && fs::exists(rd / "decision.json")) {
                std::string ev = quote(exe) + " evaluate --mode worstcase --instance " +
                                 quote((dir / "instance.json").string()) + " --clusters " +
                                 quote((dir / "clusters.json").string()) + " --decision " +
                                 quote((rd / "decision.json").string()) + " --threads " +
                                 std::to_string(f.limits.threads) + " --solver " +
                                 quote(selected_backend()) + " --out " +
                                 quote((rd / "report.json").string()) + " >> " +
                                 quote(rd.string() + ".log") + " 2>&1";
                if (std::system(ev.c_str()) == 0) rec.report = read_json((rd / "report.json").string());
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < std::max(1, f.jobs); ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    // Deterministic columns only; wall-clock times go to timings.csv.
    std::ostringstream agg, times;
    agg << "instance,method,exit_code,status,objective,lb,ub,iterations,cut_scenarios,"
           "eval_feasible,eval_total,green_penetration,service_level\n";
    times << "instance,method,total_seconds,master_seconds,subproblem_seconds\n";
    for (const RunRecord& r : runs) {
        const json& m = r.manifest;
        agg << r.instance << ',' << r.method << ',' << r.exit << ',' << m.value("status", "missing") << ','
            << csv_num(m.value("objective", json())) << ',' << csv_num(m.value("lb", m.value("bound", json())))
            << ',' << csv_num(m.value("ub", m.value("objective", json()))) << ','
            << m.value("iterations", 0) << ',' << m.value("cut_scenarios", 0) << ',';
        if (r.report.is_null())
            agg << ",,,\n";
        else
            agg << (r.report["feasible"].get<bool>() ? 1 : 0) << ',' << csv_num(r.report["total"]) << ','
                << csv_num(r.report["green_penetration"]) << ',' << csv_num(r.report["service_level"]) << '\n';
        const json sec = m.value("seconds", json::object());
        times << r.instance << ',' << r.method << ',' << csv_num(sec.value("total", json()))
              << ',' << csv_num(sec.value("master", json())) << ','
              << csv_num(sec.value("subproblem", json())) << '\n';
    }
    write_text(root / "aggregate.csv", agg.str());
    write_text(root / "timings.csv", times.str());

    if (f.warm.any()) {
        std::ostringstream paired;
        paired << "instance,cold_iterations,warm_iterations,delta_iterations,cold_seconds,warm_seconds,"
                  "delta_seconds\n";
        for (const RunRecord& cold : runs) {
            if (cold.method != "ccg-dro") continue;
            for (const RunRecord& warm : runs) {
                if (warm.method != "ccg-dro-warm" || warm.instance != cold.instance) continue;
                const int ci = cold.manifest.value("iterations", 0), wi = warm.manifest.value("iterations", 0);
                const double cs = num_from(cold.manifest.value("seconds", json::object()).value("total", json(0.0)));
                const double ws = num_from(warm.manifest.value("seconds", json::object()).value("total", json(0.0)));
                paired << cold.instance << ',' << ci << ',' << wi << ',' << wi - ci << ',' << cs << ','
                       << ws << ',' << ws - cs << '\n';
            }
        }
        write_text(root / "paired.csv", paired.str());
    }

    if (f.evaluate && methods.size() >= 2) {
        std::vector<MethodReports> cmp;
        bool complete = true;
        for (const std::string& m : methods) {
            MethodReports mr{m, {}};
            for (const RunRecord& r : runs) {
                if (r.method != m) continue;
                if (r.report.is_null()) {
                    EvaluationReport missing;
                    missing.feasible = false;
                    missing.total = kInf;
                    mr.reports.push_back(missing);
                } else {
                    mr.reports.push_back(report_from_json(r.report));
                }
            }
            complete = complete && !mr.reports.empty();
            cmp.push_back(std::move(mr));
        }
        if (complete) {
            std::ostringstream csv;
            write_comparison_csv(csv, compare(cmp));
            write_text(root / "comparison.csv", csv.str());
        }
    }

    write_json(root / "manifest.json",
               {{"version", kVersion}, {"seed", f.seed}, {"count", f.count},
                {"base", f.base.empty() ? "case-study" : absolute(f.base)},
                {"base_hash", instance_hash(base)},
                {"climate", absolute(f.climate)}, {"clusters", absolute(f.clusters)}, {"S", f.S},
                {"methods", methods}, {"tol", f.limits.tol},
                {"max_iterations", f.limits.max_iterations}, {"time_limit", f.limits.time_limit},
                {"solver", selected_backend()}, {"instances", names}});
    int failed = 0;
    for (const RunRecord& r : runs) failed += r.exit != kOk;
    std::cout << "experiment runs " << runs.size() << " nonzero_exit " << failed << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage distributionally robust capacity planning for green manufacturing"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand
    std::string solver, config;
    app.add_option("--solver", solver, "LP/MILP backend (default highs)")->envname("GREENCAP_SOLVER");
    app.add_option("--config", config, "JSON file whose values override command-line flags");

    GenFlags gen;
    auto* g = app.add_subcommand("gen-instances", "Perturbed instances around a base instance");
    g->add_option("--base", gen.base, "Base instance JSON (default: built-in case study)");
    g->add_option("--count", gen.count, "Number of instances");
    g->add_option("--seed", gen.seed, "Master seed");
    g->add_option("--out", gen.out, "Output directory");
    g->add_option("--write-base", gen.write_base, "Also write the built-in case study to this file");
    g->add_option("--cost-range", gen.cost_range, "Cost factor range")->expected(2);
    g->add_option("--tau-range", gen.tau_range, "Green share range")->expected(2);
    g->add_option("--scale-range", gen.scale_range, "Ambiguity scale range")->expected(2);

    ClusterFlags cl;
    auto* c = app.add_subcommand("cluster", "Cluster climate records and build ambiguity sets");
    c->add_option("--instance", cl.instance, "Instance JSON (default: built-in case study)");
    c->add_option("--climate", cl.climate, "Climate CSV: year,quarter,region,hours");
    c->add_option("--S", cl.S, "Number of clusters");
    c->add_option("--seed", cl.seed, "k-means and demand sampling seed");
    c->add_option("--samples-per-member", cl.samples_per_member, "Demand draws per clustered period");
    c->add_option("--out", cl.out, "Cluster JSON output");

    SolveFlags sf;
    auto* s = app.add_subcommand("solve", "Solve one instance");
    s->add_option("--instance", sf.instance, "Instance JSON (default: built-in case study)");
    s->add_option("--clusters", sf.clusters, "Cluster JSON");
    s->add_option("--method", sf.method, "ccg-dro | basic-ccg | saa-sp");
    s->add_option("--out", sf.out, "Output directory");
    s->add_flag("--verbose", sf.verbose, "Log iterations to stderr");
    add_limit_flags(s, sf.limits);
    add_sampler_flags(s, sf.sampler);
    add_warmstart_flags(s, sf.warm);

    EvalFlags ef;
    auto* e = app.add_subcommand("evaluate", "Evaluate a first-stage decision");
    e->add_option("--instance", ef.instance, "Instance JSON (default: built-in case study)");
    e->add_option("--clusters", ef.clusters, "Cluster JSON");
    e->add_option("--decision", ef.decision, "decision.json (or a solve manifest)");
    e->add_option("--mode", ef.mode, "worstcase | sampled");
    e->add_option("--samples-file", ef.samples_file, "Sample set JSON for sampled mode");
    e->add_option("--out", ef.out, "report.json path (default: stdout)");
    add_sampler_flags(e, ef.sampler);
    add_limit_flags(e, ef.limits);

    EncodeFlags enc;
    auto* d = app.add_subcommand("encode-dataset", "Encode solved supports as PBM images and features");
    d->add_option("--run", enc.runs, "Solve output directory (repeatable)");
    d->add_option("--out", enc.out, "Dataset directory");
    d->add_option("--images-per-item", enc.images_per_item, "Images per solved cluster");
    d->add_option("--rows", enc.rows, "Rows per image");
    d->add_option("--weighting", enc.weighting, "uniform | probability");
    d->add_option("--seed", enc.seed, "Image sampling seed");
    d->add_option("--threads", enc.threads, "Worker threads");
    d->add_option("--feature-model", enc.feature_model, "Reuse a fitted feature model");

    ExperimentFlags xf;
    auto* x = app.add_subcommand("experiment", "Batch runs over perturbed instances");
    x->add_option("--base", xf.base, "Base instance JSON (default: built-in case study)");
    x->add_option("--count", xf.count, "Number of instances");
    x->add_option("--seed", xf.seed, "Master seed");
    x->add_option("--climate", xf.climate, "Climate CSV; clusters are rebuilt per instance");
    x->add_option("--clusters", xf.clusters, "Fixed cluster JSON used for every instance");
    x->add_option("--S", xf.S, "Number of clusters");
    x->add_option("--samples-per-member", xf.samples_per_member, "Demand draws per clustered period");
    x->add_option("--methods", xf.methods, "Methods to run")->delimiter(',');
    x->add_option("--jobs", xf.jobs, "Concurrent solver processes");
    x->add_option("--samples", xf.sampler.samples, "SAA samples per cluster");
    x->add_option("--sampler", xf.sampler.sampler, "SAA sampler");
    x->add_option("--evaluate", xf.evaluate, "Evaluate each plan in the worst case");
    x->add_option("--out", xf.out, "Output directory");
    add_limit_flags(x, xf.limits);
    add_warmstart_flags(x, xf.warm);

    CompareFlags cf;
    auto* p = app.add_subcommand("compare", "Average evaluation reports per method");
    p->add_option("--method", cf.methods, "NAME=report.json[,report.json...]; first is the reference");
    p->add_option("--out", cf.out, "comparison.csv path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForVersion& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return kInput;
    }

    std::vector<std::string> args(argv, argv + argc);
    try {
        CLI::App* active = app.get_subcommands().front();
        if (!config.empty()) apply_config(config, app, active);
        if (!solver.empty()) {
            const auto names = available_backends();
            if (std::find(names.begin(), names.end(), solver) == names.end())
                throw InputError("solver backend '" + solver + "' is not available");
            select_backend(solver);
        }
        if (active == g) return cmd_gen(gen);
        if (active == c) return cmd_cluster(cl);
        if (active == s) return cmd_solve(sf, args);
        if (active == e) return cmd_evaluate(ef);
        if (active == d) return cmd_encode(enc);
        if (active == x) return cmd_experiment(xf, self_path(argv[0]));
        if (active == p) return cmd_compare(cf);
    } catch (const InputError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kInput;
    } catch (const ClimateError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kInput;
    } catch (const CodecError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kInput;
    } catch (const WarmstartError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kInput;
    } catch (const InvalidDecision& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kInput;
    } catch (const CLI::ParseError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kInput;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kInternal;
    }
    return kInternal;
}
