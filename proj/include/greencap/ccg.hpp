#pragma once

#include "greencap/wesp.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>

namespace greencap {

struct CutSet {
    int cluster = 0;
    WespMode kind = WespMode::Optimality;
    std::vector<Scenario> scenarios;

    // Adds scenarios not already present; returns how many were new.
    int merge(const std::vector<Scenario>& add);
};

// Cut sets for every cluster, optimality then feasibility per cluster.
struct CutPool {
    std::vector<CutSet> optimality, feasibility;

    explicit CutPool(int clusters = 0);
    int scenario_count() const;
};

// Column layout of the master MILP.
struct MasterLayout {
    Dims d;
    int nx = 0;                  // first-stage block, FirstStageLayout order
    std::vector<int> eta;        // per cluster
    int num_vars = 0;
};

struct MasterOptions {
    double eta_lower = 0.0;  // -inf leaves eta free
    // Adjustment and upgrade variables of the last period change no later state; fix them at 0.
    bool fix_last_period = true;
};

// First-stage feasible set plus per-cluster dual-form cut blocks.
Model build_master(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                   const CutPool& cuts, const MasterOptions& opts = {},
                   MasterLayout* layout = nullptr);

// Supplies candidate scenarios for a cluster at a given plan; must be thread-safe.
class ScenarioProvider {
public:
    virtual ~ScenarioProvider() = default;
    virtual std::vector<Scenario> propose(const Instance& inst, const ClusterSpec& cluster,
                                          const FirstStageDecision& x, WespMode mode) = 0;
};

enum class CcgStatus { Optimal, DroInfeasible, IterationLimit, TimeLimit, Stalled };
const char* to_string(CcgStatus s);
int exit_code(CcgStatus s);

struct BoundRow {
    int iteration = 0;
    double lb = -kInf, ub = kInf;
    double master_seconds = 0.0, subproblem_seconds = 0.0;
    int cut_scenarios = 0;
};

struct ClusterResult {
    int cluster = 0;
    bool feasible = true;
    double value = 0.0;      // w (or +inf)
    double violation = 0.0;  // F-WESP value
    int cg_iterations = 0;
    DiscreteDistribution support;
    std::vector<double> support_values;  // Q or violation per support scenario
};

struct SolveOutcome {
    CcgStatus status = CcgStatus::IterationLimit;
    FirstStageDecision x;
    double objective = kInf;  // UB at exit
    double lb = -kInf, ub = kInf;
    std::vector<BoundRow> trace;
    int iterations = 0;
    int cut_scenarios = 0;
    double master_seconds = 0.0, subproblem_seconds = 0.0, total_seconds = 0.0;
    std::vector<ClusterResult> clusters;  // last subproblem phase at the incumbent
    StrategicCost strategic;
    double expected_recourse = 0.0;       // sum q_s w_s at the incumbent
    CutPool cuts;
};

struct CcgOptions {
    double tol = 1e-5;
    int max_iterations = 100;
    double time_limit = kInf;
    int threads = 0;  // 0: one per cluster up to hardware concurrency
    double feasibility_threshold = 1e-6;
    CgOptions cg;
    MasterOptions master;
    ScenarioProvider* provider = nullptr;
    // Experimental, need a provider. surrogate_only replaces the optimality CG with the
    // restricted master over cuts and proposals until it stalls or the gap is within
    // 10 tol; exact passes still decide termination. augment_master adds proposals at
    // the initial plan to the optimality cut sets before the first master solve.
    bool surrogate_only = false;
    bool augment_master = false;
    std::ostream* log = nullptr;
};

SolveOutcome run_ccg_dro(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                         const CcgOptions& opts = {});

// Baseline: each iteration adds only the highest-value new support scenario per cluster.
SolveOutcome run_basic_ccg(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                           const CcgOptions& opts = {});

// Worst-case evaluation of a fixed plan: per-cluster F-WESP then O-WESP.
std::vector<ClusterResult> evaluate_plan(const Instance& inst,
                                         const std::vector<ClusterSpec>& clusters,
                                         const FirstStageDecision& x, const CcgOptions& opts = {});

void write_bound_trace_csv(std::ostream& out, const SolveOutcome& o);
nlohmann::json run_manifest(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                            const CcgOptions& opts, const SolveOutcome& o,
                            const std::string& method);

std::string instance_hash(const Instance& inst);
std::string clusters_hash(const std::vector<ClusterSpec>& clusters);

}  // namespace greencap
