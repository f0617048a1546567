#pragma once

#include <chrono>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace greencap {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tolerances shared by every model built on the bridge.
namespace tol {
constexpr double lp_feasibility = 1e-6;
constexpr double pricing_gap = 1e-9;
constexpr double master_gap = 1e-6;
constexpr double backend_feasibility = 1e-9;
}  // namespace tol

enum class VarType { Continuous, Integer, Binary };
enum class ObjSense { Minimize, Maximize };
enum class SolveStatus { Optimal, Infeasible, Unbounded, TimeLimit, IterationLimit, Error };

const char* to_string(SolveStatus s);

class SolverError : public std::runtime_error {
public:
    enum class Kind { BackendUnavailable, NumericalFailure, DualsUnavailable, BadModel };
    SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Row-wise sparse model: lo <= a.x <= hi per row, lb <= x <= ub per column.
class Model {
public:
    explicit Model(ObjSense sense = ObjSense::Minimize) : sense_(sense) {}

    int add_var(double lb, double ub, double cost, VarType type = VarType::Continuous,
                std::string name = {});
    // Adds n variables sharing bounds/type; returns the first index.
    int add_vars(int n, double lb, double ub, double cost, VarType type = VarType::Continuous);
    int add_row(double lo, double hi, const std::vector<int>& idx, const std::vector<double>& val,
                std::string name = {});

    void set_cost(int j, double c) { cost_.at(j) = c; }
    void set_bounds(int j, double lb, double ub);
    void set_row_bounds(int i, double lo, double hi);
    void set_sense(ObjSense s) { sense_ = s; }
    void set_offset(double c) { offset_ = c; }

    int num_vars() const { return static_cast<int>(cost_.size()); }
    int num_rows() const { return static_cast<int>(row_lo_.size()); }
    bool is_mip() const;

    ObjSense sense() const { return sense_; }
    double offset() const { return offset_; }
    const std::vector<double>& cost() const { return cost_; }
    const std::vector<double>& lb() const { return lb_; }
    const std::vector<double>& ub() const { return ub_; }
    const std::vector<VarType>& types() const { return type_; }
    const std::vector<double>& row_lo() const { return row_lo_; }
    const std::vector<double>& row_hi() const { return row_hi_; }
    const std::vector<int>& row_start() const { return start_; }
    const std::vector<int>& row_index() const { return index_; }
    const std::vector<double>& row_value() const { return value_; }
    const std::vector<std::string>& var_names() const { return var_names_; }
    const std::vector<std::string>& row_names() const { return row_names_; }

private:
    ObjSense sense_;
    double offset_ = 0.0;
    std::vector<double> cost_, lb_, ub_;
    std::vector<VarType> type_;
    std::vector<std::string> var_names_;
    std::vector<double> row_lo_, row_hi_;
    std::vector<int> start_{0}, index_;
    std::vector<double> value_;
    std::vector<std::string> row_names_;
};

struct SolveOptions {
    double time_limit = kInf;
    double mip_rel_gap = tol::master_gap;
    double mip_abs_gap = 0.0;
    double feasibility_tol = tol::backend_feasibility;
    int seed = 0;
};

struct SolveResult {
    SolveStatus status = SolveStatus::Error;
    double objective = 0.0;
    double dual_bound = 0.0;  // MIP: best proven bound; LP: equals objective
    std::vector<double> x;
    bool has_duals = false;
    double seconds = 0.0;

    // d objective / d (active row bound); only for LPs solved to optimality.
    const std::vector<double>& row_duals() const;
    // d objective / d (active column bound).
    const std::vector<double>& col_duals() const;

    std::vector<double> row_dual_;
    std::vector<double> col_dual_;

    bool optimal() const { return status == SolveStatus::Optimal; }
};

// Name of the backend chosen by --solver / GREENCAP_SOLVER (default "highs").
std::string selected_backend();
void select_backend(const std::string& name);
std::vector<std::string> available_backends();

SolveResult solve(const Model& model, const SolveOptions& opts = {});

// Keeps one backend instance alive so row/column bounds can change between solves
// without rebuilding. Used by the recourse evaluations that dominate run time.
class LpSession {
public:
    LpSession(const Model& model, const SolveOptions& opts = {});
    ~LpSession();
    LpSession(const LpSession&) = delete;
    LpSession& operator=(const LpSession&) = delete;

    void set_row_bounds(int row, double lo, double hi);
    void set_row_bounds(const std::vector<double>& lo, const std::vector<double>& hi);
    void set_col_bounds(int col, double lb, double ub);
    SolveResult solve();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Line-oriented solve log: "iteration=.. phase=.. objective=.. time=..".
class SolveLog {
public:
    explicit SolveLog(std::ostream* out = nullptr) : out_(out) {}
    void record(int iteration, const std::string& phase, double objective, double seconds) const;
    bool enabled() const { return out_ != nullptr; }

private:
    std::ostream* out_;
};

class Stopwatch {
public:
    Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }
    void reset() { t0_ = std::chrono::steady_clock::now(); }

private:
    std::chrono::steady_clock::time_point t0_;
};

}  // namespace greencap
