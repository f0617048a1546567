#include "greencap/ccg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace greencap {

int CutSet::merge(const std::vector<Scenario>& add) {
    int n = 0;
    for (const Scenario& xi : add) {
        if (std::find(scenarios.begin(), scenarios.end(), xi) != scenarios.end()) continue;
        scenarios.push_back(xi);
        ++n;
    }
    return n;
}

CutPool::CutPool(int clusters) {
    for (int s = 0; s < clusters; ++s) {
        optimality.push_back({s, WespMode::Optimality, {}});
        feasibility.push_back({s, WespMode::Feasibility, {}});
    }
}

int CutPool::scenario_count() const {
    int n = 0;
    for (const CutSet& c : optimality) n += static_cast<int>(c.scenarios.size());
    for (const CutSet& c : feasibility) n += static_cast<int>(c.scenarios.size());
    return n;
}

const char* to_string(CcgStatus s) {
    switch (s) {
    case CcgStatus::Optimal: return "optimal";
    case CcgStatus::DroInfeasible: return "dro-infeasible";
    case CcgStatus::IterationLimit: return "iteration-limit";
    case CcgStatus::TimeLimit: return "time-limit";
    case CcgStatus::Stalled: return "stalled";
    }
    return "unknown";
}

int exit_code(CcgStatus s) {
    switch (s) {
    case CcgStatus::Optimal: return 0;
    case CcgStatus::DroInfeasible: return 2;
    default: return 3;
    }
}

namespace {

void add_first_stage(Model& m, const Instance& inst, const MasterOptions& opts) {
    const Dims d = inst.dims();
    const FirstStageLayout L{d};
    const double M0 = inst.m0();
    const VectorXd cx = first_stage_costs(inst);
    for (int b = 0; b < 6; ++b)
        for (int i = 0; i < d.I; ++i)
            for (int j = 0; j < d.J; ++j)
                for (int t = 0; t < d.T; ++t) {
                    const int col = m.num_vars();
                    double lb = 0.0, ub = M0;
                    const bool last = opts.fix_last_period && t == d.T - 1;
                    switch (b) {
                    case 0: if (t == 0) lb = ub = inst.initial_lines(i, j); break;
                    case 1: ub = last ? 0.0 : inst.max_expand(i, j); break;
                    case 2: ub = last ? 0.0 : inst.max_terminate(i, j); break;
                    case 4: if (t == 0) lb = ub = inst.initial_green(i, j); break;
                    case 5: if (last) ub = 0.0; break;
                    default: break;
                    }
                    m.add_var(lb, ub, cx(col), VarType::Integer);
                }
    for (int i = 0; i < d.I; ++i) m.add_var(0.0, 1.0, cx(L.XBR() + i), VarType::Binary);

    for (int i = 0; i < d.I; ++i) {
        std::vector<int> ups;
        for (int j = 0; j < d.J; ++j)
            for (int t = 0; t < d.T; ++t) {
                const int X = L.at(L.X(), i, j, t), XO = L.at(L.XO(), i, j, t);
                const int XN = L.at(L.XN(), i, j, t), XNp = L.at(L.XNp(), i, j, t);
                if (t + 1 < d.T) {
                    m.add_row(0.0, 0.0,
                              {L.at(L.X(), i, j, t + 1), X, L.at(L.Xp(), i, j, t), L.at(L.Xm(), i, j, t)},
                              {1.0, -1.0, -1.0, 1.0});
                    m.add_row(0.0, 0.0, {L.at(L.XN(), i, j, t + 1), XN, XNp}, {1.0, -1.0, -1.0});
                }
                m.add_row(0.0, 0.0, {XO, XN, X}, {1.0, 1.0, -1.0});
                m.add_row(0.0, kInf, {L.XBR() + i, XNp}, {M0, -1.0});
                ups.push_back(XNp);
            }
        std::vector<double> ones(ups.size(), 1.0);
        ups.push_back(L.XBR() + i);
        ones.push_back(-1.0);
        m.add_row(0.0, kInf, ups, ones);
    }
}

// alpha, beta_u, beta_l for one (cluster, kind); returns alpha's column.
int add_moment_duals(Model& m, int cells) {
    const int a = m.add_var(-kInf, kInf, 0.0);
    m.add_vars(2 * cells, 0.0, kInf, 0.0);
    return a;
}

}  // namespace

Model build_master(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                   const CutPool& cuts, const MasterOptions& opts, MasterLayout* layout) {
    const Dims d = inst.dims();
    Model m;
    add_first_stage(m, inst, opts);
    MasterLayout lay;
    lay.d = d;
    lay.nx = m.num_vars();
    const int S = static_cast<int>(clusters.size());
    for (int s = 0; s < S; ++s) lay.eta.push_back(m.add_var(opts.eta_lower, kInf, clusters[s].q));

    for (int s = 0; s < S; ++s) {
        const ClusterSpec& cl = clusters[s];
        const int C = cl.cells();
        const bool has_o = s < static_cast<int>(cuts.optimality.size()) &&
                           !cuts.optimality[s].scenarios.empty();
        const bool has_f = s < static_cast<int>(cuts.feasibility.size()) &&
                           !cuts.feasibility[s].scenarios.empty();
        if (!has_o && !has_f) continue;
        const StandardForm sf = assemble_standard_form(inst, cl);

        auto moment_row = [&](int a, int eta_col) {
            // eta >= alpha + gamma_hi.beta_u - gamma_lo.beta_l   (eta = 0 for feasibility)
            std::vector<int> idx{a};
            std::vector<double> val{-1.0};
            for (int c = 0; c < C; ++c) {
                idx.push_back(a + 1 + c);
                val.push_back(-cl.gamma_hi(c));
                idx.push_back(a + 1 + C + c);
                val.push_back(cl.gamma_lo(c));
            }
            if (eta_col >= 0) {
                idx.push_back(eta_col);
                val.push_back(1.0);
            }
            m.add_row(0.0, kInf, idx, val);
        };
        auto scenario_row = [&](int a, const Scenario& xi, std::vector<int> idx,
                                std::vector<double> val) {
            // alpha + xi.(beta_u - beta_l) >= cost of the block
            for (double& v : val) v = -v;
            idx.push_back(a);
            val.push_back(1.0);
            for (int c = 0; c < C; ++c) {
                idx.push_back(a + 1 + c);
                val.push_back(xi(c));
                idx.push_back(a + 1 + C + c);
                val.push_back(-xi(c));
            }
            m.add_row(0.0, kInf, idx, val);
        };

        if (has_o) {
            const int a = add_moment_duals(m, C);
            moment_row(a, lay.eta[s]);
            for (const Scenario& xi : cuts.optimality[s].scenarios) {
                const int y0 = append_recourse_block(m, sf, xi, 0.0);
                std::vector<int> idx;
                std::vector<double> val;
                for (int j = 0; j < sf.ny(); ++j)
                    if (sf.cY(j) != 0.0) {
                        idx.push_back(y0 + j);
                        val.push_back(sf.cY(j));
                    }
                scenario_row(a, xi, idx, val);
            }
        }
        if (has_f) {
            const int a = add_moment_duals(m, C);
            moment_row(a, -1);
            for (const Scenario& xi : cuts.feasibility[s].scenarios) {
                int s0;
                append_recourse_block(m, sf, xi, 0.0, &s0);
                std::vector<int> idx(sf.rows());
                for (int r = 0; r < sf.rows(); ++r) idx[r] = s0 + r;
                scenario_row(a, xi, idx, std::vector<double>(sf.rows(), 1.0));
            }
        }
    }
    lay.num_vars = m.num_vars();
    if (layout) *layout = lay;
    return m;
}

namespace {

struct Shared {
    const Instance& inst;
    const std::vector<ClusterSpec>& clusters;
    const CcgOptions& opts;
    std::vector<std::shared_ptr<const StandardForm>> forms;
};

std::vector<Scenario> seed_columns(const ClusterSpec& cl, const std::vector<Scenario>& prev,
                                   const std::vector<Scenario>& extra) {
    std::vector<Scenario> cols = default_columns(cl);
    for (const auto* src : {&prev, &extra})
        for (const Scenario& xi : *src)
            if (xi.size() == cl.cells() && std::find(cols.begin(), cols.end(), xi) == cols.end())
                cols.push_back(xi.cwiseMax(cl.xi_lo).cwiseMin(cl.xi_hi));
    return cols;
}

void fill_support(ClusterResult& cr, const CgReport& rep) {
    cr.support = rep.distribution;
    cr.support_values.clear();
    for (const Scenario& xi : rep.distribution.scenarios)
        for (std::size_t i = 0; i < rep.columns.size(); ++i)
            if (rep.columns[i] == xi) {
                cr.support_values.push_back(rep.column_values[i]);
                break;
            }
    cr.cg_iterations += rep.iterations;
}

ClusterResult solve_cluster(const Shared& sh, int s, const FirstStageDecision& x,
                            const CutPool* cuts, bool surrogate) {
    const ClusterSpec& cl = sh.clusters[s];
    RecourseSolver rs(sh.forms[s], x.to_vector());
    ClusterResult cr;
    cr.cluster = s;
    const std::vector<Scenario> none;
    std::vector<Scenario> proposed_f, proposed_o;
    if (sh.opts.provider) {
        proposed_f = sh.opts.provider->propose(sh.inst, cl, x, WespMode::Feasibility);
        proposed_o = sh.opts.provider->propose(sh.inst, cl, x, WespMode::Optimality);
    }
    CgReport f = run_cg(rs, cl, WespMode::Feasibility,
                        seed_columns(cl, cuts ? cuts->feasibility[s].scenarios : none, proposed_f),
                        sh.opts.cg);
    cr.violation = f.value;
    if (f.value > sh.opts.feasibility_threshold) {
        cr.feasible = false;
        cr.value = kInf;
        fill_support(cr, f);
        return cr;
    }
    std::vector<Scenario> o_seed =
        seed_columns(cl, cuts ? cuts->optimality[s].scenarios : none, proposed_o);
    cr.feasible = true;
    cr.cg_iterations += f.iterations;
    if (surrogate) {
        o_seed.push_back(cl.gamma_mid());
        RestrictedValue rv = restricted_wesp(rs, cl, o_seed, WespMode::Optimality);
        if (rv.feasible) {
            cr.value = rv.eta;
            cr.support = rv.distribution;
            cr.support_values = rv.values;
            return cr;
        }
        o_seed.pop_back();
    }
    CgReport o = run_cg(rs, cl, WespMode::Optimality, o_seed, sh.opts.cg);
    cr.value = o.value;
    fill_support(cr, o);
    return cr;
}

std::vector<ClusterResult> solve_clusters(const Shared& sh, const FirstStageDecision& x,
                                          const CutPool* cuts, bool surrogate = false) {
    const int S = static_cast<int>(sh.clusters.size());
    std::vector<ClusterResult> out(S);
    int threads = sh.opts.threads;
    if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, S);
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&] {
        for (int s; (s = next++) < S;) {
            try {
                out[s] = solve_cluster(sh, s, x, cuts, surrogate);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);
    return out;
}

Shared make_shared_state(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                         const CcgOptions& opts) {
    Shared sh{inst, clusters, opts, {}};
    for (const ClusterSpec& cl : clusters)
        sh.forms.push_back(std::make_shared<const StandardForm>(assemble_standard_form(inst, cl)));
    return sh;
}

void check_inputs(const Instance& inst, const std::vector<ClusterSpec>& clusters) {
    auto v = validate(inst);
    if (!v.empty()) throw InputError("invalid instance: " + v.front().field + ": " + v.front().rule);
    if (clusters.empty()) throw InputError("no clusters given");
    double q = 0.0;
    for (const ClusterSpec& c : clusters) {
        auto cv = validate(c);
        if (!cv.empty()) throw InputError("invalid cluster " + std::to_string(c.id) + ": " + cv.front());
        if (c.K != inst.dims().K || c.T != inst.dims().T || c.omega.rows() != inst.dims().I)
            throw InputError("cluster " + std::to_string(c.id) + " does not match the instance dimensions");
        q += c.q;
    }
    if (std::abs(q - 1.0) > 1e-6) throw InputError("cluster probabilities must sum to 1");
}

FirstStageDecision round_plan(const Dims& d, const std::vector<double>& x, int nx) {
    VectorXd v(nx);
    for (int i = 0; i < nx; ++i) v(i) = std::round(x[i]);
    return FirstStageDecision::from_vector(d, v);
}

SolveOutcome run(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                 const CcgOptions& opts, bool basic) {
    check_inputs(inst, clusters);
    Stopwatch total;
    const int S = static_cast<int>(clusters.size());
    const Dims d = inst.dims();
    Shared sh = make_shared_state(inst, clusters, opts);
    SolveLog log(opts.log);
    SolveOutcome out;
    out.cuts = CutPool(S);
    out.x = hold_initial(inst);
    const VectorXd cx = first_stage_costs(inst);

    SolveOptions mopts;
    mopts.mip_rel_gap = 0.0;
    mopts.mip_abs_gap = opts.tol / 10.0;
    if (opts.provider && opts.augment_master)
        for (int s = 0; s < S; ++s) {
            std::vector<Scenario> add;
            for (const Scenario& xi : opts.provider->propose(inst, clusters[s], out.x, WespMode::Optimality))
                if (xi.size() == clusters[s].cells())
                    add.push_back(xi.cwiseMax(clusters[s].xi_lo).cwiseMin(clusters[s].xi_hi));
            out.cuts.optimality[s].merge(add);
        }
    bool surrogate = opts.provider && opts.surrogate_only;

    for (int it = 1;; ++it) {
        if (it > opts.max_iterations) {
            out.status = CcgStatus::IterationLimit;
            break;
        }
        const double remaining = opts.time_limit - total.seconds();
        if (remaining <= 0) {
            out.status = CcgStatus::TimeLimit;
            break;
        }
        BoundRow row;
        row.iteration = it;
        Stopwatch sw;
        MasterLayout lay;
        mopts.time_limit = remaining;
        Model mp = build_master(inst, clusters, out.cuts, opts.master, &lay);
        SolveResult r = solve(mp, mopts);
        if (r.status == SolveStatus::Infeasible) {
            out.status = CcgStatus::DroInfeasible;
            // An infeasible master proves there is no robust plan.
            out.lb = kInf;
            row.lb = out.lb;
            row.ub = out.ub;
            row.cut_scenarios = out.cuts.scenario_count();
            row.master_seconds = sw.seconds();
            out.master_seconds += row.master_seconds;
            out.trace.push_back(row);
            out.iterations = it;
            break;
        }
        if (r.status == SolveStatus::Unbounded) {
            // Free eta with no cuts yet: take any feasible plan and keep LB at -inf.
            MasterOptions bounded = opts.master;
            bounded.eta_lower = 0.0;
            r = solve(build_master(inst, clusters, out.cuts, bounded, &lay), mopts);
            if (r.x.empty()) throw SolverError(SolverError::Kind::NumericalFailure, "no feasible master plan");
        } else if (r.x.empty()) {
            out.status = CcgStatus::TimeLimit;
            break;
        } else {
            out.lb = std::max(out.lb, r.dual_bound);
        }
        const FirstStageDecision x = round_plan(d, r.x, lay.nx);
        row.master_seconds = sw.seconds();
        out.master_seconds += row.master_seconds;
        log.record(it, "master", out.lb, total.seconds());

        sw.reset();
        if (surrogate && out.ub - out.lb <= 10 * opts.tol) surrogate = false;
        std::vector<ClusterResult> res = solve_clusters(sh, x, &out.cuts, surrogate);
        row.subproblem_seconds = sw.seconds();
        out.subproblem_seconds += row.subproblem_seconds;

        int added = 0;
        bool all_feasible = true;
        double expected = 0.0;
        for (int s = 0; s < S; ++s) {
            const ClusterResult& cr = res[s];
            CutSet& set = cr.feasible ? out.cuts.optimality[s] : out.cuts.feasibility[s];
            all_feasible &= cr.feasible;
            if (cr.feasible) expected += clusters[s].q * cr.value;
            if (!basic) {
                added += set.merge(cr.support.scenarios);
                continue;
            }
            int pick = -1;
            for (int k = 0; k < cr.support.size(); ++k) {
                const Scenario& xi = cr.support.scenarios[k];
                if (std::find(set.scenarios.begin(), set.scenarios.end(), xi) != set.scenarios.end()) continue;
                if (pick < 0 || cr.support_values[k] > cr.support_values[pick]) pick = k;
            }
            if (pick >= 0) added += set.merge({cr.support.scenarios[pick]});
        }
        if (all_feasible && !surrogate) {
            const double ub = cx.dot(x.to_vector()) + expected;
            if (ub < out.ub) {
                out.ub = ub;
                out.x = x;
                out.clusters = res;
                out.expected_recourse = expected;
            }
        }
        if (out.clusters.empty()) out.clusters = res;
        row.lb = out.lb;
        row.ub = out.ub;
        row.cut_scenarios = out.cuts.scenario_count();
        out.trace.push_back(row);
        out.iterations = it;
        log.record(it, "subproblem", out.ub, total.seconds());

        if (out.ub - out.lb <= opts.tol) {
            out.status = CcgStatus::Optimal;
            break;
        }
        if (added == 0 && surrogate) {
            // Surrogate values can stall short of the true gap; continue exactly.
            surrogate = false;
            continue;
        }
        if (total.seconds() >= opts.time_limit) {
            // The master may have stopped at an unproven incumbent.
            out.status = CcgStatus::TimeLimit;
            break;
        }
        if (added == 0) {
            out.status = CcgStatus::Stalled;
            break;
        }
    }
    out.objective = out.ub;
    out.cut_scenarios = out.cuts.scenario_count();
    if (check_decision(inst, out.x).empty()) out.strategic = strategic_breakdown(inst, out.x);
    out.total_seconds = total.seconds();
    return out;
}

}  // namespace

SolveOutcome run_ccg_dro(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                         const CcgOptions& opts) {
    return run(inst, clusters, opts, false);
}

SolveOutcome run_basic_ccg(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                           const CcgOptions& opts) {
    return run(inst, clusters, opts, true);
}

std::vector<ClusterResult> evaluate_plan(const Instance& inst,
                                         const std::vector<ClusterSpec>& clusters,
                                         const FirstStageDecision& x, const CcgOptions& opts) {
    check_inputs(inst, clusters);
    Shared sh = make_shared_state(inst, clusters, opts);
    return solve_clusters(sh, x, nullptr);
}

void write_bound_trace_csv(std::ostream& out, const SolveOutcome& o) {
    out << "iteration,lb,ub,master_seconds,subproblem_seconds,cut_scenarios\n";
    out.precision(12);
    for (const BoundRow& r : o.trace)
        out << r.iteration << ',' << r.lb << ',' << r.ub << ',' << r.master_seconds << ','
            << r.subproblem_seconds << ',' << r.cut_scenarios << '\n';
}

std::string instance_hash(const Instance& inst) { return hex64(fnv1a(to_json(inst).dump())); }

std::string clusters_hash(const std::vector<ClusterSpec>& clusters) {
    return hex64(fnv1a(to_json(clusters).dump()));
}

nlohmann::json run_manifest(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                            const CcgOptions& opts, const SolveOutcome& o,
                            const std::string& method) {
    auto num = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return v > 0 ? "inf" : "-inf";
    };
    nlohmann::json j;
    j["method"] = method;
    j["instance"] = inst.name;
    j["instance_hash"] = instance_hash(inst);
    j["clusters_hash"] = clusters_hash(clusters);
    j["clusters"] = clusters.size();
    j["tol"] = opts.tol;
    j["limits"] = {{"max_iterations", opts.max_iterations}, {"time_limit", num(opts.time_limit)}};
    j["solver"] = selected_backend();
    j["status"] = to_string(o.status);
    j["objective"] = num(o.objective);
    j["lb"] = num(o.lb);
    j["ub"] = num(o.ub);
    j["iterations"] = o.iterations;
    j["cut_scenarios"] = o.cut_scenarios;
    j["seconds"] = {{"master", o.master_seconds}, {"subproblem", o.subproblem_seconds},
                    {"total", o.total_seconds}};
    j["strategic_cost"] = {{"adjustment", o.strategic.adjustment},
                           {"upgrade", o.strategic.upgrade},
                           {"renewable", o.strategic.renewable},
                           {"total", o.strategic.total()}};
    j["expected_recourse"] = num(o.expected_recourse);
    j["plan"] = to_json(o.x, inst);
    return j;
}

}  // namespace greencap
