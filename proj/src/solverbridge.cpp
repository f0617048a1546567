#include "greencap/solverbridge.hpp"

#include <Highs.h>

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <mutex>
#include <sstream>

namespace greencap {

const char* to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::TimeLimit: return "time-limit";
    case SolveStatus::IterationLimit: return "iteration-limit";
    case SolveStatus::Error: return "error";
    }
    return "error";
}

int Model::add_var(double lb, double ub, double cost, VarType type, std::string name) {
    if (lb > ub)
        throw SolverError(SolverError::Kind::BadModel, "variable bounds cross: " + name);
    if (type == VarType::Binary) {
        lb = std::max(lb, 0.0);
        ub = std::min(ub, 1.0);
    }
    cost_.push_back(cost);
    lb_.push_back(lb);
    ub_.push_back(ub);
    type_.push_back(type);
    var_names_.push_back(std::move(name));
    return num_vars() - 1;
}

int Model::add_vars(int n, double lb, double ub, double cost, VarType type) {
    int first = num_vars();
    for (int k = 0; k < n; ++k) add_var(lb, ub, cost, type);
    return first;
}

int Model::add_row(double lo, double hi, const std::vector<int>& idx,
                   const std::vector<double>& val, std::string name) {
    if (idx.size() != val.size())
        throw SolverError(SolverError::Kind::BadModel, "row index/value length mismatch");
    for (size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] < 0 || idx[k] >= num_vars())
            throw SolverError(SolverError::Kind::BadModel, "row references unknown variable");
        if (val[k] == 0.0) continue;
        index_.push_back(idx[k]);
        value_.push_back(val[k]);
    }
    start_.push_back(static_cast<int>(index_.size()));
    row_lo_.push_back(lo);
    row_hi_.push_back(hi);
    row_names_.push_back(std::move(name));
    return num_rows() - 1;
}

void Model::set_bounds(int j, double lb, double ub) {
    lb_.at(j) = lb;
    ub_.at(j) = ub;
}

void Model::set_row_bounds(int i, double lo, double hi) {
    row_lo_.at(i) = lo;
    row_hi_.at(i) = hi;
}

bool Model::is_mip() const {
    return std::any_of(type_.begin(), type_.end(),
                       [](VarType t) { return t != VarType::Continuous; });
}

const std::vector<double>& SolveResult::row_duals() const {
    if (!has_duals)
        throw SolverError(SolverError::Kind::DualsUnavailable,
                          "dual values requested but the model has integer variables or was not "
                          "solved to optimality");
    return row_dual_;
}

const std::vector<double>& SolveResult::col_duals() const {
    if (!has_duals)
        throw SolverError(SolverError::Kind::DualsUnavailable,
                          "dual values requested but the model has integer variables or was not "
                          "solved to optimality");
    return col_dual_;
}

namespace {

std::mutex g_backend_mutex;
std::string g_backend;

HighsLp to_highs(const Model& m) {
    HighsLp lp;
    lp.num_col_ = m.num_vars();
    lp.num_row_ = m.num_rows();
    lp.col_cost_ = m.cost();
    lp.col_lower_ = m.lb();
    lp.col_upper_ = m.ub();
    lp.row_lower_ = m.row_lo();
    lp.row_upper_ = m.row_hi();
    lp.offset_ = m.offset();
    lp.sense_ = m.sense() == ObjSense::Maximize ? ::ObjSense::kMaximize : ::ObjSense::kMinimize;
    lp.a_matrix_.format_ = MatrixFormat::kRowwise;
    lp.a_matrix_.num_col_ = lp.num_col_;
    lp.a_matrix_.num_row_ = lp.num_row_;
    lp.a_matrix_.start_.assign(m.row_start().begin(), m.row_start().end());
    lp.a_matrix_.index_.assign(m.row_index().begin(), m.row_index().end());
    lp.a_matrix_.value_ = m.row_value();
    if (m.is_mip()) {
        lp.integrality_.resize(lp.num_col_);
        for (int j = 0; j < lp.num_col_; ++j)
            lp.integrality_[j] = m.types()[j] == VarType::Continuous ? HighsVarType::kContinuous
                                                                     : HighsVarType::kInteger;
    }
    return lp;
}

void configure(Highs& h, const SolveOptions& o, bool mip) {
    h.setOptionValue("output_flag", false);
    h.setOptionValue("threads", 1);
    h.setOptionValue("random_seed", o.seed);
    if (o.time_limit < kInf) h.setOptionValue("time_limit", o.time_limit);
    h.setOptionValue("primal_feasibility_tolerance", o.feasibility_tol);
    h.setOptionValue("dual_feasibility_tolerance", o.feasibility_tol);
    if (mip) {
        h.setOptionValue("mip_rel_gap", o.mip_rel_gap);
        h.setOptionValue("mip_abs_gap", o.mip_abs_gap);
        h.setOptionValue("mip_feasibility_tolerance", o.feasibility_tol);
    }
}

SolveStatus map_status(HighsModelStatus s) {
    switch (s) {
    case HighsModelStatus::kOptimal: return SolveStatus::Optimal;
    case HighsModelStatus::kInfeasible: return SolveStatus::Infeasible;
    case HighsModelStatus::kUnbounded: return SolveStatus::Unbounded;
    case HighsModelStatus::kTimeLimit: return SolveStatus::TimeLimit;
    case HighsModelStatus::kIterationLimit: return SolveStatus::IterationLimit;
    case HighsModelStatus::kModelEmpty: return SolveStatus::Optimal;
    default: return SolveStatus::Error;
    }
}

// HiGHS duals are already d(objective)/d(active bound) in the model's own sense.
SolveResult harvest(Highs& h, const Model& m, double seconds) {
    SolveResult r;
    r.seconds = seconds;
    HighsModelStatus ms = h.getModelStatus();
    if (ms == HighsModelStatus::kUnboundedOrInfeasible) {
        // Disambiguate with a zero-objective feasibility solve.
        Highs probe;
        HighsLp lp = to_highs(m);
        std::fill(lp.col_cost_.begin(), lp.col_cost_.end(), 0.0);
        probe.setOptionValue("output_flag", false);
        probe.setOptionValue("threads", 1);
        probe.setOptionValue("presolve", "off");
        probe.passModel(lp);
        probe.run();
        ms = probe.getModelStatus() == HighsModelStatus::kOptimal ? HighsModelStatus::kUnbounded
                                                                  : HighsModelStatus::kInfeasible;
    }
    r.status = map_status(ms);
    if (ms == HighsModelStatus::kNotset || ms == HighsModelStatus::kSolveError ||
        ms == HighsModelStatus::kLoadError || ms == HighsModelStatus::kModelError ||
        ms == HighsModelStatus::kPresolveError || ms == HighsModelStatus::kPostsolveError)
        throw SolverError(SolverError::Kind::NumericalFailure,
                          "backend returned no usable status: " + h.modelStatusToString(ms));

    const HighsInfo& info = h.getInfo();
    const HighsSolution& sol = h.getSolution();
    bool mip = m.is_mip();
    if (sol.value_valid) r.x = sol.col_value;
    r.objective = info.objective_function_value;
    r.dual_bound = mip ? info.mip_dual_bound : r.objective;
    if (ms == HighsModelStatus::kModelEmpty) {
        r.objective = m.offset();
        r.dual_bound = r.objective;
        r.x.assign(m.num_vars(), 0.0);
        for (int j = 0; j < m.num_vars(); ++j)
            r.x[j] = std::clamp(0.0, m.lb()[j], m.ub()[j]);
    }
    if (!mip && r.status == SolveStatus::Optimal && sol.dual_valid) {
        r.has_duals = true;
        r.row_dual_ = sol.row_dual;
        r.col_dual_ = sol.col_dual;
    }
    return r;
}

void ensure_backend() {
    std::string b = selected_backend();
    if (b != "highs")
        throw SolverError(SolverError::Kind::BackendUnavailable,
                          "solver backend '" + b + "' is not available (built with: highs)");
}

}  // namespace

std::string selected_backend() {
    std::lock_guard<std::mutex> lock(g_backend_mutex);
    if (!g_backend.empty()) return g_backend;
    const char* env = std::getenv("GREENCAP_SOLVER");
    return env && *env ? std::string(env) : std::string("highs");
}

void select_backend(const std::string& name) {
    std::lock_guard<std::mutex> lock(g_backend_mutex);
    g_backend = name;
}

std::vector<std::string> available_backends() { return {"highs"}; }

SolveResult solve(const Model& model, const SolveOptions& opts) {
    ensure_backend();
    if (model.num_vars() == 0)
        throw SolverError(SolverError::Kind::BadModel, "model has no variables");
    Stopwatch sw;
    Highs h;
    configure(h, opts, model.is_mip());
    if (h.passModel(to_highs(model)) == HighsStatus::kError)
        throw SolverError(SolverError::Kind::BadModel, "backend rejected the model");
    h.run();
    return harvest(h, model, sw.seconds());
}

struct LpSession::Impl {
    Model model;
    Highs highs;
};

LpSession::LpSession(const Model& model, const SolveOptions& opts) : impl_(new Impl) {
    ensure_backend();
    if (model.is_mip())
        throw SolverError(SolverError::Kind::BadModel, "LpSession accepts continuous models only");
    impl_->model = model;
    configure(impl_->highs, opts, false);
    impl_->highs.passModel(to_highs(model));
}

LpSession::~LpSession() = default;

void LpSession::set_row_bounds(int row, double lo, double hi) {
    impl_->model.set_row_bounds(row, lo, hi);
    impl_->highs.changeRowBounds(row, lo, hi);
}

void LpSession::set_row_bounds(const std::vector<double>& lo, const std::vector<double>& hi) {
    std::vector<HighsInt> rows(lo.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        rows[i] = static_cast<HighsInt>(i);
        impl_->model.set_row_bounds(static_cast<int>(i), lo[i], hi[i]);
    }
    impl_->highs.changeRowsBounds(static_cast<HighsInt>(rows.size()), rows.data(), lo.data(),
                                  hi.data());
}

void LpSession::set_col_bounds(int col, double lb, double ub) {
    impl_->model.set_bounds(col, lb, ub);
    impl_->highs.changeColBounds(col, lb, ub);
}

SolveResult LpSession::solve() {
    Stopwatch sw;
    impl_->highs.run();
    SolveResult r = harvest(impl_->highs, impl_->model, sw.seconds());
    if (r.status == SolveStatus::Error || r.status == SolveStatus::IterationLimit) {
        // A stale basis occasionally stalls; retry from scratch before giving up.
        impl_->highs.clearSolver();
        sw.reset();
        impl_->highs.run();
        r = harvest(impl_->highs, impl_->model, sw.seconds());
    }
    return r;
}

void SolveLog::record(int iteration, const std::string& phase, double objective,
                      double seconds) const {
    if (!out_) return;
    std::ostringstream line;
    line << "iteration=" << iteration << " phase=" << phase << " objective="
         << std::setprecision(12) << objective << " time=" << std::setprecision(6) << seconds
         << '\n';
    *out_ << line.str();
}

}  // namespace greencap
