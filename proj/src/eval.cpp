#include "greencap/eval.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace greencap {

namespace {

ScenarioMetric metric(const StandardForm& sf, const RecourseSolution& sol, const Scenario& xi) {
    ScenarioMetric m;
    m.feasible = sol.feasible;
    if (!sol.feasible) {
        m.cost = kInf;
        m.green = m.service = std::nan("");
        return m;
    }
    m.cost = sol.objective;
    ProductionMetrics pm = production_metrics(sf, sol.Y, xi);
    m.green = pm.total > 1e-12 ? 100.0 * pm.green / pm.total : std::nan("");
    m.service = pm.demand > 1e-12 ? 100.0 * (1.0 - pm.unmet / pm.demand) : 100.0;
    return m;
}

// Fills the aggregate metrics from per_scenario and the cluster verdicts.
void finish(EvaluationReport& r, const Instance& inst, const FirstStageDecision& x,
            const std::vector<double>& unmet, const std::vector<double>& demand) {
    r.strategic = strategic_breakdown(inst, x);
    r.feasible = true;
    r.tactical = 0.0;
    for (const ClusterVerdict& v : r.clusters) r.feasible &= v.feasible;
    double gw = 0.0, g = 0.0, eu = 0.0, ed = 0.0;
    for (std::size_t k = 0; k < r.per_scenario.size(); ++k) {
        const ScenarioMetric& m = r.per_scenario[k];
        ++r.scenarios;
        if (!m.feasible) {
            ++r.infeasible_scenarios;
            continue;
        }
        if (!std::isnan(m.green)) {
            g += m.weight * m.green;
            gw += m.weight;
        }
        eu += m.weight * unmet[k];
        ed += m.weight * demand[k];
    }
    r.feasible &= r.infeasible_scenarios == 0;
    r.green_penetration = gw > 0 ? g / gw : std::nan("");
    r.service_level = ed > 0 ? 100.0 * (1.0 - eu / ed) : 100.0;
    if (!r.feasible) {
        r.tactical = r.total = kInf;
        return;
    }
    for (const ScenarioMetric& m : r.per_scenario) r.tactical += m.weight * m.cost;
    r.total = r.strategic.total() + r.tactical;
}

template <class F>
void parallel_for(int n, int threads, F&& f) {
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::max(1, std::min(threads, n));
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto work = [&] {
        for (int i; (i = next++) < n;) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace

EvaluationReport evaluate_worstcase(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                                    const FirstStageDecision& x, const CcgOptions& opts) {
    std::vector<ClusterResult> res = evaluate_plan(inst, clusters, x, opts);
    EvaluationReport r;
    r.distribution = "worstcase";
    const int S = static_cast<int>(clusters.size());
    std::vector<std::vector<ScenarioMetric>> per(S);
    std::vector<std::vector<double>> unmet(S), demand(S);
    parallel_for(S, opts.threads, [&](int s) {
        const ClusterResult& cr = res[s];
        if (!cr.feasible) return;
        RecourseSolver rs(inst, clusters[s], x);
        for (int k = 0; k < cr.support.size(); ++k) {
            const Scenario& xi = cr.support.scenarios[k];
            RecourseSolution sol = rs.solve(xi);
            ScenarioMetric m = metric(rs.form(), sol, xi);
            m.cluster = s;
            m.weight = clusters[s].q * cr.support.prob[k];
            ProductionMetrics pm = sol.feasible ? production_metrics(rs.form(), sol.Y, xi) : ProductionMetrics{};
            per[s].push_back(m);
            unmet[s].push_back(pm.unmet);
            demand[s].push_back(pm.demand);
        }
    });
    std::vector<double> u, d;
    for (int s = 0; s < S; ++s) {
        const ClusterResult& cr = res[s];
        r.clusters.push_back({s, cr.feasible, cr.violation, cr.value, cr.support.size(), 0});
        r.per_scenario.insert(r.per_scenario.end(), per[s].begin(), per[s].end());
        u.insert(u.end(), unmet[s].begin(), unmet[s].end());
        d.insert(d.end(), demand[s].begin(), demand[s].end());
    }
    finish(r, inst, x, u, d);
    // Worst-case tactical cost is the WESP value itself, not a re-solve.
    if (r.feasible) {
        r.tactical = 0.0;
        for (int s = 0; s < S; ++s) r.tactical += clusters[s].q * res[s].value;
        r.total = r.strategic.total() + r.tactical;
    }
    return r;
}

EvaluationReport evaluate_sampled(const Instance& inst, const std::vector<ClusterSpec>& clusters,
                                  const FirstStageDecision& x, const SampleSet& samples, int threads) {
    const int S = static_cast<int>(clusters.size());
    if (static_cast<int>(samples.scenarios.size()) != S) throw InputError("sample set does not match the clusters");
    EvaluationReport r;
    r.distribution = std::string(to_string(samples.kind)) + ":" + std::to_string(samples.seed);
    std::vector<std::vector<ScenarioMetric>> per(S);
    std::vector<std::vector<double>> unmet(S), demand(S);
    std::vector<ClusterVerdict> verdicts(S);
    parallel_for(S, threads, [&](int s) {
        RecourseSolver rs(inst, clusters[s], x);
        ClusterVerdict& v = verdicts[s];
        v.cluster = s;
        double sum = 0.0;
        for (const Scenario& xi : samples.scenarios[s]) {
            RecourseSolution sol = rs.solve(xi);
            ScenarioMetric m = metric(rs.form(), sol, xi);
            m.cluster = s;
            m.weight = samples.weight(s);
            ++v.scenarios;
            if (!sol.feasible) {
                ++v.infeasible_scenarios;
                v.violation = std::max(v.violation, rs.solve_feasibility(xi).violation);
            } else {
                sum += m.cost;
            }
            ProductionMetrics pm = sol.feasible ? production_metrics(rs.form(), sol.Y, xi) : ProductionMetrics{};
            per[s].push_back(m);
            unmet[s].push_back(pm.unmet);
            demand[s].push_back(pm.demand);
        }
        v.feasible = v.infeasible_scenarios == 0;
        v.value = v.feasible ? sum / v.scenarios : kInf;
    });
    std::vector<double> u, d;
    for (int s = 0; s < S; ++s) {
        r.clusters.push_back(verdicts[s]);
        r.per_scenario.insert(r.per_scenario.end(), per[s].begin(), per[s].end());
        u.insert(u.end(), unmet[s].begin(), unmet[s].end());
        d.insert(d.end(), demand[s].begin(), demand[s].end());
    }
    finish(r, inst, x, u, d);
    return r;
}

nlohmann::json to_json(const EvaluationReport& r) {
    auto num = [](double v) -> nlohmann::json {
        if (std::isnan(v)) return nullptr;
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        return v;
    };
    nlohmann::json cl = nlohmann::json::array();
    for (const ClusterVerdict& v : r.clusters)
        cl.push_back({{"cluster", v.cluster},
                      {"feasible", v.feasible},
                      {"violation", num(v.violation)},
                      {"value", num(v.value)},
                      {"scenarios", v.scenarios},
                      {"infeasible_scenarios", v.infeasible_scenarios}});
    nlohmann::json sc = nlohmann::json::array();
    for (const ScenarioMetric& m : r.per_scenario)
        sc.push_back({{"cluster", m.cluster},
                      {"weight", m.weight},
                      {"feasible", m.feasible},
                      {"cost", num(m.cost)},
                      {"green", num(m.green)},
                      {"service", num(m.service)}});
    return {{"distribution", r.distribution},
            {"feasible", r.feasible},
            {"total", num(r.total)},
            {"strategic",
             {{"adjustment", r.strategic.adjustment},
              {"upgrade", r.strategic.upgrade},
              {"renewable", r.strategic.renewable},
              {"total", r.strategic.total()}}},
            {"tactical", num(r.tactical)},
            {"green_penetration", num(r.green_penetration)},
            {"service_level", num(r.service_level)},
            {"scenarios", r.scenarios},
            {"infeasible_scenarios", r.infeasible_scenarios},
            {"clusters", cl},
            {"per_scenario", sc}};
}

EvaluationReport report_from_json(const nlohmann::json& j) {
    auto num = [](const nlohmann::json& v) {
        if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
        if (v.is_string()) {
            const std::string s = v.get<std::string>();
            if (s == "inf") return kInf;
            if (s == "-inf") return -kInf;
            throw InputError("report JSON: bad number '" + s + "'");
        }
        return v.get<double>();
    };
    try {
        EvaluationReport r;
        r.distribution = j.at("distribution").get<std::string>();
        r.feasible = j.at("feasible").get<bool>();
        r.total = num(j.at("total"));
        const auto& st = j.at("strategic");
        r.strategic.adjustment = st.at("adjustment").get<double>();
        r.strategic.upgrade = st.at("upgrade").get<double>();
        r.strategic.renewable = st.at("renewable").get<double>();
        r.tactical = num(j.at("tactical"));
        r.green_penetration = num(j.at("green_penetration"));
        r.service_level = num(j.at("service_level"));
        r.scenarios = j.value("scenarios", 0);
        r.infeasible_scenarios = j.value("infeasible_scenarios", 0);
        for (const auto& c : j.value("clusters", nlohmann::json::array()))
            r.clusters.push_back({c.at("cluster").get<int>(), c.at("feasible").get<bool>(),
                                  num(c.at("violation")), num(c.at("value")),
                                  c.at("scenarios").get<int>(), c.at("infeasible_scenarios").get<int>()});
        for (const auto& m : j.value("per_scenario", nlohmann::json::array()))
            r.per_scenario.push_back({m.at("cluster").get<int>(), m.at("weight").get<double>(),
                                      m.at("feasible").get<bool>(), num(m.at("cost")),
                                      num(m.at("green")), num(m.at("service"))});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("report JSON: ") + e.what());
    }
}

std::vector<ComparisonRow> compare(const std::vector<MethodReports>& methods) {
    if (methods.size() < 2) throw InputError("comparison needs at least two methods");
    const std::size_t n = methods[0].reports.size();
    for (const MethodReports& m : methods)
        if (m.reports.size() != n) throw InputError("method " + m.label + " has a different instance count");
    std::vector<ComparisonRow> rows;
    for (const MethodReports& m : methods) {
        ComparisonRow row;
        row.label = m.label;
        row.instances = static_cast<int>(n);
        double ref_total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const EvaluationReport& r = m.reports[i];
            const EvaluationReport& ref = methods[0].reports[i];
            row.feasible += r.feasible;
            if (!r.feasible || !ref.feasible) continue;
            ++row.averaged;
            row.total += r.total;
            row.strategic += r.strategic.total();
            row.tactical += r.tactical;
            row.green += r.green_penetration;
            row.service += r.service_level;
            ref_total += ref.total;
        }
        if (row.averaged > 0) {
            const double k = row.averaged;
            row.total /= k, row.strategic /= k, row.tactical /= k, row.green /= k, row.service /= k;
            row.delta_total = row.total - ref_total / k;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
    out << "method,instances,feasible,averaged,total,strategic,tactical,green_penetration,service_level,"
           "delta_total\n";
    out.precision(12);
    for (const ComparisonRow& r : rows)
        out << r.label << ',' << r.instances << ',' << r.feasible << ',' << r.averaged << ',' << r.total
            << ',' << r.strategic << ',' << r.tactical << ',' << r.green << ',' << r.service << ','
            << r.delta_total << '\n';
}

}  // namespace greencap
