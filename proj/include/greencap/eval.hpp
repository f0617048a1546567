#pragma once

#include "greencap/spbaseline.hpp"

#include <iosfwd>

namespace greencap {

struct ClusterVerdict {
    int cluster = 0;
    bool feasible = true;
    double violation = 0.0;  // F-WESP value (worst case) or largest scenario violation
    double value = 0.0;      // worst-case or sample-average recourse cost
    int scenarios = 0;
    int infeasible_scenarios = 0;
};

// One evaluated scenario with its probability under the evaluated distribution.
struct ScenarioMetric {
    int cluster = 0;
    double weight = 0.0;
    bool feasible = true;
    double cost = 0.0;
    double green = 0.0;    // % of production on green lines; NaN without production
    double service = 0.0;  // % of demand met
};

struct EvaluationReport {
    std::string distribution;  // "worstcase" or a sample-set descriptor
    bool feasible = true;
    StrategicCost strategic;
    double tactical = 0.0;  // +inf when infeasible
    double total = 0.0;
    double green_penetration = 0.0;  // probability-weighted mean of per-scenario shares, %
    double service_level = 0.0;      // 100 (1 - E[sum U] / E[sum xi])
    int scenarios = 0, infeasible_scenarios = 0;
    std::vector<ClusterVerdict> clusters;
    std::vector<ScenarioMetric> per_scenario;
};

// Per cluster F-WESP then O-WESP; metrics under the worst-case distributions found.
EvaluationReport evaluate_worstcase(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                                    const FirstStageDecision& x, const CcgOptions& opts = {});

EvaluationReport evaluate_sampled(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                                  const FirstStageDecision& x, const SampleSet& samples,
                                  int threads = 0);

nlohmann::json to_json(const EvaluationReport& r);
EvaluationReport report_from_json(const nlohmann::json& j);

// Reports of one method over an instance family, aligned by instance.
struct MethodReports {
    std::string label;
    std::vector<EvaluationReport> reports;
};

struct ComparisonRow {
    std::string label;
    int instances = 0;
    int feasible = 0;
    int averaged = 0;  // instances feasible for both this method and the reference
    double total = 0.0, strategic = 0.0, tactical = 0.0, green = 0.0, service = 0.0;
    double delta_total = 0.0;  // against the reference on the averaged subset
};

// The first entry is the reference; averages run over instances it finds feasible.
std::vector<ComparisonRow> compare(const std::vector<MethodReports>& methods);
void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);

}  // namespace greencap
