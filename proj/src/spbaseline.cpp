#include "greencap/spbaseline.hpp"

#include "greencap/codec.hpp"

#include <random>

namespace greencap {

const char* to_string(SamplerKind k) {
    return k == SamplerKind::Uniform ? "uniform" : "truncated_gaussian";
}

SamplerKind sampler_from_string(const std::string& s) {
    if (s == "uniform") return SamplerKind::Uniform;
    if (s == "truncated_gaussian" || s == "gaussian") return SamplerKind::TruncatedGaussian;
    throw InputError("unknown sampler '" + s + "'");
}

std::vector<Scenario> sample(const ClusterSpec& cluster, SamplerKind kind, int count,
                             std::uint64_t seed, SamplerStats* stats) {
    if (count < 1) throw InputError("sample count must be at least 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int C = cluster.cells();
    std::vector<Scenario> out(count, Scenario(C));
    SamplerStats local;
    for (Scenario& xi : out)
        for (int c = 0; c < C; ++c) {
            const double lo = cluster.xi_lo(c), hi = cluster.xi_hi(c);
            if (hi <= lo) {
                xi(c) = lo;
                continue;
            }
            if (kind == SamplerKind::Uniform) {
                xi(c) = lo + (hi - lo) * unit(rng);
                ++local.draws;
                continue;
            }
            const double mid = 0.5 * (lo + hi), sigma = (hi - lo) / 6.0;
            for (;;) {
                const double v = mid + sigma * normal(rng);
                ++local.draws;
                if (v >= lo && v <= hi) {
                    xi(c) = v;
                    break;
                }
                ++local.rejections;
            }
        }
    if (stats) {
        stats->draws += local.draws;
        stats->rejections += local.rejections;
    }
    return out;
}

int SampleSet::total() const {
    int n = 0;
    for (const auto& s : scenarios) n += static_cast<int>(s.size());
    return n;
}

SampleSet draw_samples(const std::vector<ClusterSpec>& clusters, SamplerKind kind, int count,
                       std::uint64_t seed) {
    SampleSet set;
    set.kind = kind;
    set.seed = seed;
    for (std::size_t s = 0; s < clusters.size(); ++s) {
        set.scenarios.push_back(sample(clusters[s], kind, count, derive_seed(seed, s, 0), &set.stats));
        set.q.push_back(clusters[s].q);
    }
    return set;
}

nlohmann::json to_json(const SampleSet& set) {
    nlohmann::json clusters = nlohmann::json::array();
    for (std::size_t s = 0; s < set.scenarios.size(); ++s) {
        nlohmann::json sc = nlohmann::json::array();
        for (const Scenario& xi : set.scenarios[s])
            sc.push_back(std::vector<double>(xi.data(), xi.data() + xi.size()));
        clusters.push_back({{"q", set.q[s]}, {"scenarios", sc}});
    }
    return {{"sampler", {{"kind", to_string(set.kind)}, {"seed", set.seed}, {"sigma_fraction", 1.0 / 6.0}}},
            {"draws", set.stats.draws},
            {"rejections", set.stats.rejections},
            {"clusters", clusters}};
}

SampleSet sample_set_from_json(const nlohmann::json& j) {
    SampleSet set;
    set.kind = sampler_from_string(j.at("sampler").at("kind").get<std::string>());
    set.seed = j.at("sampler").value("seed", std::uint64_t{0});
    set.stats.draws = j.value("draws", 0L);
    set.stats.rejections = j.value("rejections", 0L);
    for (const auto& c : j.at("clusters")) {
        set.q.push_back(c.at("q").get<double>());
        std::vector<Scenario> sc;
        for (const auto& v : c.at("scenarios")) {
            std::vector<double> a = v.get<std::vector<double>>();
            sc.emplace_back(Eigen::Map<VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())));
        }
        if (sc.empty()) throw InputError("sample set has a cluster without scenarios");
        set.scenarios.push_back(std::move(sc));
    }
    return set;
}

SaaOutcome solve_saa(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                     const SampleSet& samples, const SolveOptions& limits) {
    const int S = static_cast<int>(clusters.size());
    if (samples.scenarios.size() != clusters.size() || samples.total() == 0)
        throw InputError("sample set does not match the clusters");
    Stopwatch sw;
    MasterLayout lay;
    // Empty cut pool: the first-stage set, plus eta columns that stay at zero.
    Model m = build_master(inst, clusters, CutPool(S), {}, &lay);
    std::vector<std::vector<int>> y0(S);
    std::vector<StandardForm> forms;
    for (int s = 0; s < S; ++s) {
        forms.push_back(assemble_standard_form(inst, clusters[s]));
        for (const Scenario& xi : samples.scenarios[s]) {
            if (xi.size() != clusters[s].cells()) throw InputError("sample dimension mismatch");
            y0[s].push_back(append_recourse_block(m, forms[s], xi, samples.weight(s)));
        }
    }
    SaaOutcome out;
    SolveResult r = solve(m, limits);
    out.status = r.status;
    out.seconds = sw.seconds();
    out.bound = r.dual_bound;
    if (r.x.empty()) return out;
    VectorXd xv(lay.nx);
    for (int i = 0; i < lay.nx; ++i) xv(i) = std::round(r.x[i]);
    out.x = FirstStageDecision::from_vector(inst.dims(), xv);
    out.strategic = strategic_breakdown(inst, out.x);
    out.recourse.resize(S);
    for (int s = 0; s < S; ++s)
        for (int b : y0[s]) {
            double c = 0.0;
            for (int j = 0; j < forms[s].ny(); ++j) c += forms[s].cY(j) * r.x[b + j];
            out.recourse[s].push_back(c);
            out.expected_recourse += samples.weight(s) * c;
        }
    out.objective = r.objective;
    return out;
}

}  // namespace greencap
