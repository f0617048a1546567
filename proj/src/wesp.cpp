#include "greencap/wesp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace greencap {

const char* to_string(WespMode m) {
    return m == WespMode::Optimality ? "optimality" : "feasibility";
}

VectorXd DiscreteDistribution::mean() const {
    if (scenarios.empty()) return {};
    VectorXd m = VectorXd::Zero(scenarios.front().size());
    for (int s = 0; s < size(); ++s) m += prob[s] * scenarios[s];
    return m;
}

std::vector<std::string> validate(const DiscreteDistribution& p, const ClusterSpec& c,
                                  double moment_tol) {
    std::vector<std::string> out;
    double total = 0.0;
    for (double v : p.prob) {
        if (v < -1e-12) out.push_back("negative probability");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) out.push_back("probabilities do not sum to 1");
    const VectorXd m = p.mean();
    for (int i = 0; i < c.cells(); ++i) {
        if (m(i) < c.gamma_lo(i) - moment_tol) out.push_back("mean below gamma_lo at cell " + std::to_string(i));
        if (m(i) > c.gamma_hi(i) + moment_tol) out.push_back("mean above gamma_hi at cell " + std::to_string(i));
    }
    return out;
}

double MasterResult::reduced_cost(double v, const Scenario& xi) const {
    return v - alpha - (beta_u - beta_l).dot(xi);
}

MasterResult solve_master(const std::vector<Scenario>& columns, const std::vector<double>& values,
                          const ClusterSpec& cluster) {
    if (columns.empty()) throw WespError(WespError::Kind::MasterInfeasible, "master has no columns");
    const int n = static_cast<int>(columns.size());
    const int C = cluster.cells();
    Model m(ObjSense::Maximize);
    for (int s = 0; s < n; ++s) m.add_var(0.0, kInf, values[s]);
    std::vector<int> idx(n);
    std::vector<double> val(n, 1.0);
    for (int s = 0; s < n; ++s) idx[s] = s;
    m.add_row(1.0, 1.0, idx, val);
    for (int c = 0; c < C; ++c) {
        for (int s = 0; s < n; ++s) val[s] = columns[s](c);
        m.add_row(cluster.gamma_lo(c), cluster.gamma_hi(c), idx, val);
    }
    SolveResult r = solve(m);
    if (r.status == SolveStatus::Infeasible)
        throw WespError(WespError::Kind::MasterInfeasible,
                        "no distribution over the columns satisfies the moment window");
    if (!r.optimal())
        throw WespError(WespError::Kind::Internal, std::string("master LP: ") + to_string(r.status));
    MasterResult out;
    out.eta = r.objective;
    out.prob.resize(n);
    double total = 0.0;
    for (int s = 0; s < n; ++s) total += (out.prob[s] = std::max(0.0, r.x[s]));
    for (double& p : out.prob) p /= total;
    const auto& du = r.row_duals();
    out.alpha = du[0];
    out.beta_u.resize(C);
    out.beta_l.resize(C);
    for (int c = 0; c < C; ++c) {
        out.beta_u(c) = std::max(du[1 + c], 0.0);
        out.beta_l(c) = std::max(-du[1 + c], 0.0);
    }
    return out;
}

double recourse_value(RecourseSolver& rs, const Scenario& xi, WespMode mode) {
    if (mode == WespMode::Feasibility) return rs.solve_feasibility(xi).violation;
    RecourseSolution s = rs.solve(xi);
    return s.feasible ? s.objective : kInf;
}

Scenario corner(const ClusterSpec& cluster, std::uint64_t mask) {
    Scenario xi = cluster.xi_lo;
    for (int c = 0; c < cluster.cells(); ++c)
        if (mask >> c & 1ULL) xi(c) = cluster.xi_hi(c);
    return xi;
}

std::vector<Scenario> default_columns(const ClusterSpec& cluster) {
    std::vector<Scenario> cols{cluster.lower_corner()};
    if (cluster.upper_corner() != cluster.lower_corner()) cols.push_back(cluster.upper_corner());
    return cols;
}

namespace {

Scenario from_z(const ClusterSpec& cl, const std::vector<int>& z) {
    Scenario xi = cl.xi_lo;
    for (int c = 0; c < cl.cells(); ++c)
        if (z[c]) xi(c) = cl.xi_hi(c);
    return xi;
}

struct Eval {
    double r = -kInf;
    double v = 0.0;
};

Eval exact_rc(const MasterResult& du, RecourseSolver& rs, const Scenario& xi, WespMode mode) {
    Eval e;
    e.v = recourse_value(rs, xi, mode);
    e.r = std::isfinite(e.v) ? du.reduced_cost(e.v, xi) : -kInf;
    return e;
}

bool near_ge(double a, double b) { return a >= b - 1e-9 * std::max(1.0, std::abs(b)); }

// Flip set bits to 0 while the reduced cost does not drop, in cell order.
void lex_tiebreak(const MasterResult& du, RecourseSolver& rs, const ClusterSpec& cl,
                  WespMode mode, std::vector<int>& z, Eval& best) {
    const double r_max = best.r;
    for (int c = 0; c < cl.cells(); ++c) {
        if (!z[c] || cl.xi_hi(c) == cl.xi_lo(c)) {
            z[c] = 0;
            continue;
        }
        z[c] = 0;
        Eval e = exact_rc(du, rs, from_z(cl, z), mode);
        if (near_ge(e.r, r_max))
            best = e;
        else
            z[c] = 1;
    }
}

PricingResult price_enumerate(const MasterResult& du, RecourseSolver& rs, const ClusterSpec& cl,
                              WespMode mode) {
    const int C = cl.cells();
    if (C > 20) throw WespError(WespError::Kind::TooLarge, "corner enumeration needs K*T <= 20");
    PricingResult best;
    best.reduced_cost = -kInf;
    // Cell 0 is the most significant position so the first maximizer is lexicographically smallest.
    for (std::uint64_t code = 0; code < (1ULL << C); ++code) {
        std::vector<int> z(C);
        for (int c = 0; c < C; ++c) z[c] = code >> (C - 1 - c) & 1ULL;
        Scenario xi = from_z(cl, z);
        Eval e = exact_rc(du, rs, xi, mode);
        if (e.r > best.reduced_cost + 1e-9 * std::max(1.0, std::abs(best.reduced_cost)) ||
            !best.found) {
            if (!std::isfinite(e.r)) continue;
            best.reduced_cost = e.r;
            best.value = e.v;
            best.xi = xi;
            best.found = true;
        }
    }
    return best;
}

struct PricingMilp {
    Model model{ObjSense::Maximize};
    int z0 = 0;
    std::vector<int> var;            // dual variable per row, -1 for folded rows
    std::vector<int> bounded_rows;   // rows whose dual bound enters the linearization
};

// max_{pi,z} pi.(h0 - Bxi xiL) - sum Bxi_rc d_c w_rc - delta.(xiL + d o z) - alpha,
// w_rc = pi_r z_c linearized with explicit bounds on pi_r. Each demand row pair (>=, <=)
// shares one free multiplier since only the difference of their duals matters.
PricingMilp build_pricing(const MasterResult& du, const RecourseSolver& rs,
                          const ClusterSpec& cl, WespMode mode, double U) {
    const StandardForm& sf = rs.form();
    const int R = sf.rows(), C = cl.cells();
    const VectorXd delta = du.beta_u - du.beta_l;
    const VectorXd width = cl.xi_hi - cl.xi_lo;
    const VectorXd hL = sf.h0(rs.x()) - sf.Bxi * cl.xi_lo;
    const bool feas = mode == WespMode::Feasibility;
    const double B = feas ? 1.0 : U;
    auto folded = [&](int r) { return r >= sf.r_dem_hi && r < sf.r_dem_hi + C; };
    auto paired = [&](int r) { return r >= sf.r_dem_lo && r < sf.r_dem_lo + C; };

    std::vector<char> touched(R, 0);
    for (int r = 0; r < R; ++r)
        for (SpMat::InnerIterator it(sf.Bxi, r); it; ++it)
            if (width(it.col()) != 0.0) touched[r] = 1;

    PricingMilp p;
    Model& m = p.model;
    m.set_offset(-du.alpha - delta.dot(cl.xi_lo));
    p.var.assign(R, -1);
    std::vector<double> lo(R, 0.0), hi(R, kInf);
    for (int r = 0; r < R; ++r) {
        if (folded(r)) continue;
        if (paired(r)) {
            lo[r] = feas || touched[r] ? -B : -kInf;
            hi[r] = feas || touched[r] ? B : kInf;
        } else {
            hi[r] = feas || touched[r] ? B : kInf;
        }
        p.var[r] = m.add_var(lo[r], hi[r], hL(r));
        if (touched[r]) p.bounded_rows.push_back(r);
    }
    p.z0 = m.num_vars();
    for (int c = 0; c < C; ++c)
        m.add_var(0.0, width(c) == 0.0 ? 0.0 : 1.0, -delta(c) * width(c), VarType::Binary);
    for (int r = 0; r < R; ++r) {
        if (p.var[r] < 0) continue;
        for (SpMat::InnerIterator it(sf.Bxi, r); it; ++it) {
            const int c = static_cast<int>(it.col());
            if (width(c) == 0.0) continue;
            const int w = m.add_var(-kInf, kInf, -it.value() * width(c));
            const int pr = p.var[r], zc = p.z0 + c;
            const double L = lo[r], H = hi[r];
            m.add_row(0.0, kInf, {zc, w}, {H, -1.0});
            m.add_row(0.0, kInf, {w, zc}, {1.0, -L});
            m.add_row(L, kInf, {pr, w, zc}, {1.0, -1.0, L});
            m.add_row(-H, kInf, {w, pr, zc}, {1.0, -1.0, -H});
        }
    }

    // Dual feasibility: BY' pi <= cY (0 in feasibility mode).
    const Eigen::SparseMatrix<double, Eigen::ColMajor> BYc(sf.BY);
    std::vector<int> idx;
    std::vector<double> val;
    for (int j = 0; j < sf.ny(); ++j) {
        idx.clear();
        val.clear();
        for (Eigen::SparseMatrix<double, Eigen::ColMajor>::InnerIterator it(BYc, j); it; ++it) {
            const int r = static_cast<int>(it.row());
            if (p.var[r] < 0) continue;
            idx.push_back(p.var[r]);
            val.push_back(it.value());
        }
        if (idx.empty()) continue;
        m.add_row(-kInf, feas ? 0.0 : sf.cY(j), idx, val);
    }

    if (!feas) {
        // Restrict z to corners where the recourse is feasible.
        const int y0 = m.add_vars(sf.ny(), 0.0, kInf, 0.0);
        for (int r = 0; r < R; ++r) {
            idx.clear();
            val.clear();
            for (SpMat::InnerIterator it(sf.BY, r); it; ++it) {
                idx.push_back(y0 + static_cast<int>(it.col()));
                val.push_back(it.value());
            }
            for (SpMat::InnerIterator it(sf.Bxi, r); it; ++it) {
                const int c = static_cast<int>(it.col());
                if (width(c) == 0.0) continue;
                idx.push_back(p.z0 + c);
                val.push_back(it.value() * width(c));
            }
            m.add_row(hL(r), kInf, idx, val);
        }
    }
    return p;
}

PricingResult price_milp(const MasterResult& du, RecourseSolver& rs, const ClusterSpec& cl,
                         WespMode mode) {
    const int C = cl.cells();
    SolveOptions opts;
    opts.mip_rel_gap = tol::pricing_gap;
    opts.mip_abs_gap = tol::pricing_gap;
    double U = 100.0 * std::max(1.0, rs.form().cY.maxCoeff());
    std::vector<int> z(C, 0);
    Eval best;
    for (int attempt = 0;; ++attempt) {
        PricingMilp p = build_pricing(du, rs, cl, mode, U);
        SolveResult r = solve(p.model, opts);
        if (r.status == SolveStatus::Unbounded)
            throw WespError(WespError::Kind::Internal, "pricing problem reported unbounded");
        if (r.status == SolveStatus::Infeasible) return {};
        if (r.x.empty())
            throw WespError(WespError::Kind::Internal, std::string("pricing MILP: ") + to_string(r.status));
        for (int c = 0; c < C; ++c) z[c] = r.x[p.z0 + c] > 0.5;
        best = exact_rc(du, rs, from_z(cl, z), mode);
        if (mode == WespMode::Feasibility || attempt >= 4 || !std::isfinite(best.r)) break;
        // A binding dual bound shows up as the MILP undervaluing its own corner.
        bool at_bound = false;
        for (int row : p.bounded_rows)
            if (std::abs(r.x[p.var[row]]) >= U * (1.0 - 1e-6)) at_bound = true;
        if (!at_bound || r.objective >= best.r - 1e-9 * std::max(1.0, std::abs(best.r))) break;
        U *= 10.0;
    }
    PricingResult out;
    if (!std::isfinite(best.r)) return out;
    lex_tiebreak(du, rs, cl, mode, z, best);
    out.found = true;
    out.xi = from_z(cl, z);
    out.reduced_cost = best.r;
    out.value = best.v;
    return out;
}

}  // namespace

PricingResult solve_pricing(const MasterResult& duals, RecourseSolver& rs,
                            const ClusterSpec& cluster, WespMode mode, PricingMethod method) {
    return method == PricingMethod::Enumerate ? price_enumerate(duals, rs, cluster, mode)
                                              : price_milp(duals, rs, cluster, mode);
}

CgReport run_cg(const Instance& inst, const ClusterSpec& cluster, const FirstStageDecision& x,
                WespMode mode, const std::vector<Scenario>& initial_columns,
                const CgOptions& opts) {
    RecourseSolver rs(inst, cluster, x);
    return run_cg(rs, cluster, mode, initial_columns, opts);
}

CgReport run_cg(RecourseSolver& rs, const ClusterSpec& cluster, WespMode mode,
                const std::vector<Scenario>& initial_columns, const CgOptions& opts) {
    CgReport rep;
    rep.mode = mode;
    const int lp0 = rs.lp_count();
    int limit = opts.max_iterations;
    if (limit <= 0) limit = cluster.cells() >= 20 ? (1 << 20) : (1 << cluster.cells()) + 10;

    std::vector<Scenario>& cols = rep.columns;
    std::vector<double>& vals = rep.column_values;
    auto add = [&](const Scenario& xi, double v) {
        for (const Scenario& s : cols)
            if (s == xi) return false;
        if (!std::isfinite(v)) return false;  // optimality mode: skip infeasible points
        cols.push_back(xi);
        vals.push_back(v);
        return true;
    };
    for (const Scenario& xi : initial_columns.empty() ? default_columns(cluster) : initial_columns)
        add(xi, recourse_value(rs, xi, mode));

    bool mid_added = false;
    Stopwatch sw;
    for (int it = 1;; ++it) {
        MasterResult mr;
        sw.reset();
        for (;;) {
            try {
                if (cols.empty()) throw WespError(WespError::Kind::MasterInfeasible, "no feasible columns");
                mr = solve_master(cols, vals, cluster);
                break;
            } catch (const WespError& e) {
                if (e.kind() != WespError::Kind::MasterInfeasible || mid_added) throw;
                mid_added = true;
                Scenario mid = cluster.gamma_mid();
                if (!add(mid, recourse_value(rs, mid, mode))) throw;
            }
        }
        if (it == 1) rep.seed_columns = static_cast<int>(cols.size());
        const double t_master = sw.seconds();
        rep.master_seconds += t_master;

        sw.reset();
        PricingResult pr = solve_pricing(mr, rs, cluster, mode, opts.pricing);
        const double t_price = sw.seconds();
        rep.pricing_seconds += t_price;
        const double rc = pr.found ? std::max(0.0, pr.reduced_cost) : 0.0;

        rep.iterations = it;
        rep.reduced_costs.push_back(rc);
        rep.trace.push_back({it, mr.eta, rc, t_price, t_master});
        rep.value = mr.eta;
        rep.alpha = mr.alpha;
        rep.beta_u = mr.beta_u;
        rep.beta_l = mr.beta_l;
        rep.distribution = {};
        for (std::size_t s = 0; s < cols.size(); ++s)
            if (mr.prob[s] > 1e-12) {
                rep.distribution.scenarios.push_back(cols[s]);
                rep.distribution.prob.push_back(mr.prob[s]);
            }
        double total = 0.0;
        for (double p : rep.distribution.prob) total += p;
        for (double& p : rep.distribution.prob) p /= total;

        const double eps = opts.epsilon * std::max(1.0, std::abs(mr.eta));
        if (rc <= eps || !add(pr.xi, pr.value)) break;
        if (it >= limit) {
            rep.lp_solves = rs.lp_count() - lp0;
            throw WespError(WespError::Kind::IterationLimit,
                            "column generation hit the iteration limit (" + std::to_string(limit) + ")");
        }
    }
    rep.lp_solves = rs.lp_count() - lp0;
    return rep;
}

double oracle_wesp(const Instance& inst, const ClusterSpec& cluster, const FirstStageDecision& x,
                   WespMode mode) {
    const int C = cluster.cells();
    if (C > 20) throw WespError(WespError::Kind::TooLarge, "oracle needs K*T <= 20");
    RecourseSolver rs(inst, cluster, x);
    std::vector<Scenario> cols;
    std::vector<double> vals;
    for (std::uint64_t mask = 0; mask < (1ULL << C); ++mask) {
        Scenario xi = corner(cluster, mask);
        bool dup = false;
        for (const Scenario& s : cols) dup = dup || s == xi;
        if (dup) continue;
        const double v = recourse_value(rs, xi, mode);
        if (!std::isfinite(v)) continue;
        cols.push_back(xi);
        vals.push_back(v);
    }
    return solve_master(cols, vals, cluster).eta;
}

std::optional<int> check_tightness(const DiscreteDistribution& dist,
                                   const std::vector<double>& values, const ClusterSpec& cluster,
                                   double tol_) {
    const int n = dist.size(), C = cluster.cells();
    if (n == 0) return std::nullopt;
    double eta = 0.0;
    for (int s = 0; s < n; ++s) eta += dist.prob[s] * values[s];
    Model m(ObjSense::Maximize);
    for (int s = 0; s < n; ++s) m.add_var(0.0, kInf, dist.scenarios[s].sum());
    std::vector<int> idx(n);
    std::vector<double> val(n, 1.0);
    for (int s = 0; s < n; ++s) idx[s] = s;
    m.add_row(1.0, 1.0, idx, val);
    for (int c = 0; c < C; ++c) {
        for (int s = 0; s < n; ++s) val[s] = dist.scenarios[s](c);
        m.add_row(cluster.gamma_lo(c), cluster.gamma_hi(c), idx, val);
    }
    m.add_row(eta - 1e-7 * std::max(1.0, std::abs(eta)), kInf, idx, values);
    SolveResult r = solve(m);
    if (!r.optimal()) return std::nullopt;
    for (int c = 0; c < C; ++c) {
        double mean = 0.0;
        for (int s = 0; s < n; ++s) mean += r.x[s] * dist.scenarios[s](c);
        if (mean >= cluster.gamma_hi(c) - tol_) return c;
    }
    return std::nullopt;
}

RestrictedValue restricted_wesp(RecourseSolver& rs, const ClusterSpec& cluster,
                                const std::vector<Scenario>& columns, WespMode mode) {
    std::vector<Scenario> cols;
    std::vector<double> vals;
    for (const Scenario& xi : columns) {
        if (std::find(cols.begin(), cols.end(), xi) != cols.end()) continue;
        const double v = recourse_value(rs, xi, mode);
        if (!std::isfinite(v)) continue;
        cols.push_back(xi);
        vals.push_back(v);
    }
    RestrictedValue out;
    MasterResult mr;
    try {
        mr = solve_master(cols, vals, cluster);
    } catch (const WespError& e) {
        if (e.kind() != WespError::Kind::MasterInfeasible) throw;
        return out;
    }
    out.feasible = true;
    out.eta = mr.eta;
    for (std::size_t s = 0; s < cols.size(); ++s)
        if (mr.prob[s] > 1e-12) {
            out.distribution.scenarios.push_back(cols[s]);
            out.distribution.prob.push_back(mr.prob[s]);
            out.values.push_back(vals[s]);
        }
    return out;
}

void write_trace_csv(std::ostream& out, const CgReport& report) {
    out << "iteration,master_value,reduced_cost,pricing_seconds,master_seconds\n";
    out.precision(12);
    for (const CgTraceRow& r : report.trace)
        out << r.iteration << ',' << r.master_value << ',' << r.reduced_cost << ','
            << r.pricing_seconds << ',' << r.master_seconds << '\n';
}

}  // namespace greencap
