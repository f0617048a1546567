#include "greencap/recourse.hpp"

#include <cmath>
#include <ostream>

namespace greencap {

using Trip = Eigen::Triplet<double>;

int standard_form_rows(const Dims& d) {
    return 3 * d.ijkt() + 2 * d.ijt() + 1 + 2 * d.kt() + d.kt() + d.it();
}

VectorXd StandardForm::h0(const VectorXd& x) const { return rhs_d - BX * x; }

VectorXd StandardForm::h(const VectorXd& x, const VectorXd& xi) const {
    return rhs_d - BX * x - Bxi * xi;
}

StandardForm assemble_standard_form(const Instance& inst, const ClusterSpec& cluster) {
    const Dims d = inst.dims();
    if (cluster.K != d.K || cluster.T != d.T || cluster.omega.rows() != d.I ||
        cluster.omega.cols() != d.T)
        throw InputError("cluster dimensions do not match instance");
    const RecourseLayout Y{d};
    const FirstStageLayout X{d};
    const double scale = inst.unit_scale();

    StandardForm sf;
    sf.d = d;
    std::vector<Trip> tx, ty, txi;
    int r = 0;

    sf.r_elig = r;
    for (int blk = 0; blk < 3; ++blk)
        for (int i = 0; i < d.I; ++i)
            for (int j = 0; j < d.J; ++j)
                for (int k = 0; k < d.K; ++k)
                    for (int t = 0; t < d.T; ++t, ++r) {
                        const int col = blk == 0 ? Y.OT(i, j, k, t)
                                        : blk == 1 ? Y.NT(i, j, k, t)
                                                   : Y.NG(i, j, k, t);
                        const int xb = blk == 0 ? X.XO() : X.XN();
                        ty.emplace_back(r, col, -1.0);
                        const double b = inst.line_bound(j, k);
                        if (b != 0.0) tx.emplace_back(r, X.at(xb, i, j, t), b);
                    }

    sf.r_cap = r;
    for (int blk = 0; blk < 2; ++blk)
        for (int i = 0; i < d.I; ++i)
            for (int j = 0; j < d.J; ++j)
                for (int t = 0; t < d.T; ++t, ++r) {
                    if (blk == 0) {
                        tx.emplace_back(r, X.at(X.XO(), i, j, t), inst.throughput_old(j));
                        for (int k = 0; k < d.K; ++k)
                            if (inst.util_old(j, k) != 0.0)
                                ty.emplace_back(r, Y.OT(i, j, k, t), -inst.util_old(j, k));
                    } else {
                        tx.emplace_back(r, X.at(X.XN(), i, j, t), inst.throughput_green(j));
                        for (int k = 0; k < d.K; ++k)
                            if (inst.util_green(j, k) != 0.0) {
                                ty.emplace_back(r, Y.NT(i, j, k, t), -inst.util_green(j, k));
                                ty.emplace_back(r, Y.NG(i, j, k, t), -inst.util_green(j, k));
                            }
                    }
                }

    sf.r_green = r;
    for (int i = 0; i < d.I; ++i)
        for (int j = 0; j < d.J; ++j)
            for (int k = 0; k < d.K; ++k)
                for (int t = 0; t < d.T; ++t) {
                    if (inst.tau != 0.0) {
                        ty.emplace_back(r, Y.OT(i, j, k, t), -inst.tau);
                        ty.emplace_back(r, Y.NT(i, j, k, t), -inst.tau);
                    }
                    if (1.0 - inst.tau != 0.0) ty.emplace_back(r, Y.NG(i, j, k, t), 1.0 - inst.tau);
                }
    ++r;

    for (int side = 0; side < 2; ++side) {
        const double s = side == 0 ? 1.0 : -1.0;
        (side == 0 ? sf.r_dem_lo : sf.r_dem_hi) = r;
        for (int k = 0; k < d.K; ++k)
            for (int t = 0; t < d.T; ++t, ++r) {
                for (int i = 0; i < d.I; ++i)
                    for (int j = 0; j < d.J; ++j) {
                        ty.emplace_back(r, Y.OT(i, j, k, t), s);
                        ty.emplace_back(r, Y.NT(i, j, k, t), s);
                        ty.emplace_back(r, Y.NG(i, j, k, t), s);
                    }
                ty.emplace_back(r, Y.U(k, t), s);
                txi.emplace_back(r, cluster.cell(k, t), -s);
            }
    }

    sf.r_service = r;
    for (int k = 0; k < d.K; ++k)
        for (int t = 0; t < d.T; ++t, ++r) {
            ty.emplace_back(r, Y.U(k, t), -1.0);
            if (1.0 - inst.lambda != 0.0) txi.emplace_back(r, cluster.cell(k, t), 1.0 - inst.lambda);
        }

    sf.r_pv = r;
    for (int i = 0; i < d.I; ++i)
        for (int t = 0; t < d.T; ++t, ++r) {
            const double cap = inst.pv_capacity(i) * cluster.omega(i, t) / inst.product_unit;
            if (cap != 0.0) tx.emplace_back(r, X.XBR() + i, cap);
            for (int j = 0; j < d.J; ++j)
                for (int k = 0; k < d.K; ++k)
                    if (inst.energy(j, k) != 0.0)
                        ty.emplace_back(r, Y.NG(i, j, k, t), -inst.energy(j, k));
        }

    sf.BX.resize(r, X.size());
    sf.BX.setFromTriplets(tx.begin(), tx.end());
    sf.BY.resize(r, Y.size());
    sf.BY.setFromTriplets(ty.begin(), ty.end());
    sf.Bxi.resize(r, d.kt());
    sf.Bxi.setFromTriplets(txi.begin(), txi.end());
    sf.rhs_d = VectorXd::Zero(r);

    sf.cY = VectorXd::Zero(Y.size());
    for (int i = 0; i < d.I; ++i)
        for (int j = 0; j < d.J; ++j)
            for (int k = 0; k < d.K; ++k)
                for (int t = 0; t < d.T; ++t) {
                    sf.cY(Y.OT(i, j, k, t)) = inst.cost_old[inst.ijk(i, j, k)] * scale;
                    sf.cY(Y.NT(i, j, k, t)) = inst.cost_green[inst.ijk(i, j, k)] * scale;
                    sf.cY(Y.NG(i, j, k, t)) = inst.cost_green[inst.ijk(i, j, k)] * scale;
                }
    for (int k = 0; k < d.K; ++k)
        for (int t = 0; t < d.T; ++t) sf.cY(Y.U(k, t)) = inst.shortage_cost(k) * scale;
    return sf;
}

void write_triplets(std::ostream& out, const StandardForm& sf) {
    auto dump = [&](const char* tag, const SpMat& m) {
        for (int r = 0; r < m.outerSize(); ++r)
            for (SpMat::InnerIterator it(m, r); it; ++it)
                out << tag << ' ' << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    };
    dump("BX", sf.BX);
    dump("BY", sf.BY);
    dump("Bxi", sf.Bxi);
    for (int r = 0; r < sf.rhs_d.size(); ++r)
        if (sf.rhs_d(r) != 0.0) out << "d " << r << " 0 " << sf.rhs_d(r) << '\n';
}

namespace {

Model recourse_model(const StandardForm& sf, bool with_slack) {
    Model m;
    const int ny = sf.ny();
    for (int c = 0; c < ny; ++c) m.add_var(0.0, kInf, with_slack ? 0.0 : sf.cY(c));
    const int s0 = with_slack ? m.add_vars(sf.rows(), 0.0, kInf, 1.0) : -1;
    std::vector<int> idx;
    std::vector<double> val;
    for (int r = 0; r < sf.rows(); ++r) {
        idx.clear();
        val.clear();
        for (SpMat::InnerIterator it(sf.BY, r); it; ++it) {
            idx.push_back(static_cast<int>(it.col()));
            val.push_back(it.value());
        }
        if (with_slack) {
            idx.push_back(s0 + r);
            val.push_back(1.0);
        }
        m.add_row(0.0, kInf, idx, val);
    }
    return m;
}

SolveOptions lp_options() {
    SolveOptions o;
    o.feasibility_tol = tol::backend_feasibility;
    return o;
}

}  // namespace

RecourseSolver::RecourseSolver(const Instance& inst, const ClusterSpec& cluster,
                               const FirstStageDecision& x)
    : sf_(std::make_shared<StandardForm>(assemble_standard_form(inst, cluster))),
      x_(x.to_vector()) {
    init();
}

RecourseSolver::RecourseSolver(std::shared_ptr<const StandardForm> sf, const VectorXd& x)
    : sf_(std::move(sf)), x_(x) {
    init();
}

void RecourseSolver::init() {
    h0_ = sf_->h0(x_);
    opt_ = std::make_unique<LpSession>(recourse_model(*sf_, false), lp_options());
}

RecourseSolution RecourseSolver::solve(const VectorXd& xi) {
    const VectorXd h = h0_ - sf_->Bxi * xi;
    std::vector<double> lo(h.data(), h.data() + h.size()), hi(h.size(), kInf);
    opt_->set_row_bounds(lo, hi);
    ++lp_count_;
    SolveResult res = opt_->solve();
    RecourseSolution out;
    if (res.status == SolveStatus::Infeasible) return out;
    if (!res.optimal())
        throw SolverError(SolverError::Kind::NumericalFailure,
                          std::string("recourse LP: ") + to_string(res.status));
    out.feasible = true;
    out.Y = Eigen::Map<const VectorXd>(res.x.data(), sf_->ny());
    out.objective = sf_->cY.dot(out.Y);
    const auto& du = res.row_duals();
    out.pi = Eigen::Map<const VectorXd>(du.data(), du.size()).cwiseMax(0.0);
    return out;
}

FeasibilityRelaxSolution RecourseSolver::solve_feasibility(const VectorXd& xi) {
    if (!feas_) feas_ = std::make_unique<LpSession>(recourse_model(*sf_, true), lp_options());
    const VectorXd h = h0_ - sf_->Bxi * xi;
    std::vector<double> lo(h.data(), h.data() + h.size()), hi(h.size(), kInf);
    feas_->set_row_bounds(lo, hi);
    ++lp_count_;
    SolveResult res = feas_->solve();
    if (!res.optimal())
        throw SolverError(SolverError::Kind::NumericalFailure,
                          std::string("feasibility LP: ") + to_string(res.status));
    FeasibilityRelaxSolution out;
    const int ny = sf_->ny();
    out.Y = Eigen::Map<const VectorXd>(res.x.data(), ny);
    out.slack = Eigen::Map<const VectorXd>(res.x.data() + ny, sf_->rows()).cwiseMax(0.0);
    out.violation = out.slack.sum();
    const auto& du = res.row_duals();
    out.pi = Eigen::Map<const VectorXd>(du.data(), du.size()).cwiseMax(0.0).cwiseMin(1.0);
    return out;
}

RecourseSolution solve_recourse(const Instance& inst, const ClusterSpec& cluster,
                                const FirstStageDecision& x, const VectorXd& xi) {
    RecourseSolver rs(inst, cluster, x);
    RecourseSolution sol = rs.solve(xi);
    if (!sol.feasible) throw InfeasibleRecourse("recourse infeasible for the given plan and demand");
    return sol;
}

FeasibilityRelaxSolution solve_feasibility(const Instance& inst, const ClusterSpec& cluster,
                                           const FirstStageDecision& x, const VectorXd& xi) {
    RecourseSolver rs(inst, cluster, x);
    return rs.solve_feasibility(xi);
}

ProductionMetrics production_metrics(const StandardForm& sf, const VectorXd& Y,
                                     const VectorXd& xi) {
    const int n = sf.d.ijkt();
    ProductionMetrics m;
    m.total = Y.head(3 * n).sum();
    m.green = Y.segment(2 * n, n).sum();
    m.unmet = Y.tail(sf.d.kt()).sum();
    m.demand = xi.sum();
    return m;
}

int append_recourse_block(Model& m, const StandardForm& sf, const VectorXd& xi, double weight,
                          int* slack0) {
    const int y0 = m.add_vars(sf.ny(), 0.0, kInf, 0.0);
    if (weight != 0.0)
        for (int j = 0; j < sf.ny(); ++j) m.set_cost(y0 + j, weight * sf.cY(j));
    if (slack0) *slack0 = m.add_vars(sf.rows(), 0.0, kInf, 0.0);
    const VectorXd rhs = sf.rhs_d - sf.Bxi * xi;
    std::vector<int> idx;
    std::vector<double> val;
    for (int r = 0; r < sf.rows(); ++r) {
        idx.clear();
        val.clear();
        for (SpMat::InnerIterator it(sf.BX, r); it; ++it) {
            idx.push_back(static_cast<int>(it.col()));
            val.push_back(it.value());
        }
        for (SpMat::InnerIterator it(sf.BY, r); it; ++it) {
            idx.push_back(y0 + static_cast<int>(it.col()));
            val.push_back(it.value());
        }
        if (slack0) {
            idx.push_back(*slack0 + r);
            val.push_back(1.0);
        }
        m.add_row(rhs(r), kInf, idx, val);
    }
    return y0;
}

}  // namespace greencap
