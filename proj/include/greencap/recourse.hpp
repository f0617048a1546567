#pragma once

#include "greencap/climate.hpp"
#include "greencap/instance.hpp"
#include "greencap/solverbridge.hpp"

#include <Eigen/Sparse>

#include <iosfwd>
#include <memory>

namespace greencap {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Recourse variables: YOT, YNT, YNG (each I*J*K*T, index ((i*J + j)*K + k)*T + t) then YU (K*T).
struct RecourseLayout {
    Dims d;
    int OT(int i, int j, int k, int t) const { return ((i * d.J + j) * d.K + k) * d.T + t; }
    int NT(int i, int j, int k, int t) const { return d.ijkt() + OT(i, j, k, t); }
    int NG(int i, int j, int k, int t) const { return 2 * d.ijkt() + OT(i, j, k, t); }
    int U(int k, int t) const { return 3 * d.ijkt() + k * d.T + t; }
    int size() const { return 3 * d.ijkt() + d.kt(); }
};

// Y feasible  <=>  BX x + BY Y + Bxi xi >= d, Y >= 0. All rows are ">=".
struct StandardForm {
    Dims d;
    SpMat BX, BY, Bxi;
    VectorXd rhs_d;
    VectorXd cY;
    // First row of each block: eligibility, capacity, green share, demand (>=), demand (<=),
    // service level, PV energy.
    int r_elig = 0, r_cap = 0, r_green = 0, r_dem_lo = 0, r_dem_hi = 0, r_service = 0, r_pv = 0;

    int rows() const { return static_cast<int>(BY.rows()); }
    int ny() const { return static_cast<int>(BY.cols()); }
    // Right-hand side for the recourse variables: d - BX x - Bxi xi.
    VectorXd h(const VectorXd& x, const VectorXd& xi) const;
    VectorXd h0(const VectorXd& x) const;
};

StandardForm assemble_standard_form(const Instance& inst, const ClusterSpec& cluster);

// Expected row count from set sizes alone.
int standard_form_rows(const Dims& d);

void write_triplets(std::ostream& out, const StandardForm& sf);

// Appends Y >= 0 for one scenario with rows BX x + BY Y (+ slack) >= d - Bxi xi, the
// first-stage columns being 0..BX.cols()-1. Y costs weight * cY. Returns the first Y column.
int append_recourse_block(Model& m, const StandardForm& sf, const VectorXd& xi, double weight,
                          int* slack0 = nullptr);

struct RecourseSolution {
    bool feasible = false;
    VectorXd Y;
    double objective = 0.0;
    VectorXd pi;
};

struct FeasibilityRelaxSolution {
    VectorXd Y;
    VectorXd slack;
    double violation = 0.0;
    VectorXd pi;
};

class InfeasibleRecourse : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Holds the recourse and feasibility LPs for one (instance, cluster, x) so that many
// scenarios can be evaluated by rewriting right-hand sides only.
class RecourseSolver {
public:
    RecourseSolver(const Instance& inst, const ClusterSpec& cluster, const FirstStageDecision& x);
    RecourseSolver(std::shared_ptr<const StandardForm> sf, const VectorXd& x);

    RecourseSolution solve(const VectorXd& xi);
    FeasibilityRelaxSolution solve_feasibility(const VectorXd& xi);

    const StandardForm& form() const { return *sf_; }
    const VectorXd& x() const { return x_; }
    int lp_count() const { return lp_count_; }

private:
    void init();
    std::shared_ptr<const StandardForm> sf_;
    VectorXd x_;
    VectorXd h0_;
    std::unique_ptr<LpSession> opt_, feas_;
    int lp_count_ = 0;
};

// One-shot wrappers. solve_recourse throws InfeasibleRecourse when Y(x, xi) is empty.
RecourseSolution solve_recourse(const Instance& inst, const ClusterSpec& cluster,
                                const FirstStageDecision& x, const VectorXd& xi);
FeasibilityRelaxSolution solve_feasibility(const Instance& inst, const ClusterSpec& cluster,
                                           const FirstStageDecision& x, const VectorXd& xi);

// Summary metrics of a recourse solution.
struct ProductionMetrics {
    double total = 0.0;
    double green = 0.0;
    double unmet = 0.0;
    double demand = 0.0;
};
ProductionMetrics production_metrics(const StandardForm& sf, const VectorXd& Y, const VectorXd& xi);

}  // namespace greencap
