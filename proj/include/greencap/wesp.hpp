#pragma once

#include "greencap/climate.hpp"
#include "greencap/instance.hpp"
#include "greencap/recourse.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace greencap {

// Demand vector over the K*T cells, k-major.
using Scenario = VectorXd;

enum class WespMode { Optimality, Feasibility };
const char* to_string(WespMode m);

struct DiscreteDistribution {
    std::vector<Scenario> scenarios;
    std::vector<double> prob;

    int size() const { return static_cast<int>(scenarios.size()); }
    VectorXd mean() const;
};

// Checks simplex and moment window; returns descriptions of violated conditions.
std::vector<std::string> validate(const DiscreteDistribution& p, const ClusterSpec& c,
                                  double moment_tol = 1e-6);

struct MasterResult {
    double eta = 0.0;
    std::vector<double> prob;  // one per column
    double alpha = 0.0;
    VectorXd beta_u, beta_l;   // >= 0
    // v - alpha - (beta_u - beta_l).xi for a column with value v.
    double reduced_cost(double v, const Scenario& xi) const;
};

class WespError : public std::runtime_error {
public:
    enum class Kind { MasterInfeasible, IterationLimit, TooLarge, Internal };
    WespError(Kind k, const std::string& what) : std::runtime_error(what), kind_(k) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

MasterResult solve_master(const std::vector<Scenario>& columns, const std::vector<double>& values,
                          const ClusterSpec& cluster);

enum class PricingMethod { Milp, Enumerate };

struct PricingResult {
    double reduced_cost = 0.0;
    Scenario xi;
    double value = 0.0;  // Q or violation at xi
    bool found = false;
};

// Evaluates Q (optimality) or the feasibility violation at one scenario; +inf when the
// optimality recourse is infeasible.
double recourse_value(RecourseSolver& rs, const Scenario& xi, WespMode mode);

PricingResult solve_pricing(const MasterResult& duals, RecourseSolver& rs,
                            const ClusterSpec& cluster, WespMode mode,
                            PricingMethod method = PricingMethod::Milp);

struct CgOptions {
    double epsilon = 1e-6;   // relative to max(1, |eta|)
    int max_iterations = 0;  // 0: 2^(K*T) + 10, capped
    PricingMethod pricing = PricingMethod::Milp;
};

struct CgTraceRow {
    int iteration = 0;
    double master_value = 0.0;
    double reduced_cost = 0.0;
    double pricing_seconds = 0.0;
    double master_seconds = 0.0;
};

struct CgReport {
    WespMode mode = WespMode::Optimality;
    double value = 0.0;
    DiscreteDistribution distribution;  // support with P > 0
    double alpha = 0.0;
    VectorXd beta_u, beta_l;
    int iterations = 0;
    std::vector<double> reduced_costs;
    std::vector<CgTraceRow> trace;
    std::vector<Scenario> columns;  // every column generated, in order
    std::vector<double> column_values;
    int seed_columns = 0;  // leading columns not produced by pricing
    double master_seconds = 0.0, pricing_seconds = 0.0;
    int lp_solves = 0;
};

CgReport run_cg(const Instance& inst, const ClusterSpec& cluster, const FirstStageDecision& x,
                WespMode mode, const std::vector<Scenario>& initial_columns = {},
                const CgOptions& opts = {});
CgReport run_cg(RecourseSolver& rs, const ClusterSpec& cluster, WespMode mode,
                const std::vector<Scenario>& initial_columns = {}, const CgOptions& opts = {});

// Default seeds: all-lower and all-upper corners.
std::vector<Scenario> default_columns(const ClusterSpec& cluster);

// Corner scenario xi^L + (xi^U - xi^L) o z, bit c of mask set for z_c = 1.
Scenario corner(const ClusterSpec& cluster, std::uint64_t mask);

// Master over a fixed column set only: a lower bound on the WESP value at the plan.
// Columns with infeasible optimality recourse are dropped; eta = -inf when no
// distribution over the rest meets the moment window.
struct RestrictedValue {
    bool feasible = false;
    double eta = -kInf;
    DiscreteDistribution distribution;  // support with P > 0
    std::vector<double> values;         // per support scenario
};
RestrictedValue restricted_wesp(RecourseSolver& rs, const ClusterSpec& cluster,
                                const std::vector<Scenario>& columns, WespMode mode);

// Solves the master over every box corner. Requires K*T <= 20.
double oracle_wesp(const Instance& inst, const ClusterSpec& cluster, const FirstStageDecision& x,
                   WespMode mode);

// Cell (k-major index) where the moment upper bound is attained by some optimal
// distribution over the given support, if any.
std::optional<int> check_tightness(const DiscreteDistribution& dist,
                                   const std::vector<double>& values, const ClusterSpec& cluster,
                                   double tol = 1e-6);

void write_trace_csv(std::ostream& out, const CgReport& report);

}  // namespace greencap
