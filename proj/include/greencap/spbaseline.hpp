#pragma once

#include "greencap/ccg.hpp"

namespace greencap {

enum class SamplerKind { Uniform, TruncatedGaussian };
const char* to_string(SamplerKind k);
SamplerKind sampler_from_string(const std::string& s);

struct SamplerStats {
    long draws = 0;
    long rejections = 0;
};

// Uniform over the box, or per-cell Gaussian at the box centre with sigma = width / 6,
// truncated to the box by rejection. Deterministic in seed.
std::vector<Scenario> sample(const ClusterSpec& cluster, SamplerKind kind, int count,
                             std::uint64_t seed, SamplerStats* stats = nullptr);

struct SampleSet {
    SamplerKind kind = SamplerKind::Uniform;
    std::uint64_t seed = 0;
    std::vector<std::vector<Scenario>> scenarios;  // per cluster
    std::vector<double> q;                         // cluster probabilities
    SamplerStats stats;

    // Weight of each scenario of cluster s.
    double weight(int s) const { return q[s] / static_cast<double>(scenarios[s].size()); }
    int total() const;
};

SampleSet draw_samples(const std::vector<ClusterSpec>& clusters, SamplerKind kind, int count,
                       std::uint64_t seed);

nlohmann::json to_json(const SampleSet& set);
SampleSet sample_set_from_json(const nlohmann::json& j);

struct SaaOutcome {
    SolveStatus status = SolveStatus::Error;
    FirstStageDecision x;
    double objective = kInf;
    double bound = -kInf;
    StrategicCost strategic;
    double expected_recourse = 0.0;
    std::vector<std::vector<double>> recourse;  // C_Y Y per scenario
    double seconds = 0.0;
};

// Extensive-form SAA model over every sampled scenario.
SaaOutcome solve_saa(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                     const SampleSet& samples, const SolveOptions& limits = {});

}  // namespace greencap
