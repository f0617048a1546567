#include "greencap/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace greencap {

using nlohmann::json;

int Instance::m0() const {
    if (big_m) return *big_m;
    Dims d = dims();
    int m = 0;
    for (int i = 0; i < d.I; ++i)
        for (int j = 0; j < d.J; ++j)
            m = std::max(m, initial_lines(i, j) + d.T * max_expand(i, j));
    return m;
}

double Instance::line_bound(int j, int k) const {
    if (!eligible(j, k)) return 0.0;
    return std::ceil(std::max(throughput_old(j) / util_old(j, k),
                              throughput_green(j) / util_green(j, k)));
}

bool Instance::operator==(const Instance& o) const {
    return name == o.name && factories == o.factories && capacities == o.capacities &&
           products == o.products && periods == o.periods && currency_unit == o.currency_unit &&
           product_unit == o.product_unit && expand_cost == o.expand_cost &&
           terminate_cost == o.terminate_cost && upgrade_cost == o.upgrade_cost &&
           max_expand == o.max_expand && max_terminate == o.max_terminate &&
           initial_lines == o.initial_lines && initial_green == o.initial_green &&
           renewable_cost == o.renewable_cost && pv_capacity == o.pv_capacity &&
           eligible == o.eligible && util_old == o.util_old && util_green == o.util_green &&
           energy == o.energy && throughput_old == o.throughput_old &&
           throughput_green == o.throughput_green && cost_old == o.cost_old &&
           cost_green == o.cost_green && shortage_cost == o.shortage_cost && tau == o.tau &&
           lambda == o.lambda && big_m == o.big_m && ambiguity_scale == o.ambiguity_scale &&
           regions == o.regions && nominal_demand.rows() == o.nominal_demand.rows() &&
           nominal_demand.cols() == o.nominal_demand.cols() &&
           nominal_demand == o.nominal_demand;
}

std::vector<Violation> validate(const Instance& inst) {
    std::vector<Violation> out;
    Dims d = inst.dims();
    auto bad = [&](std::string f, std::vector<int> idx, std::string rule) {
        out.push_back({std::move(f), std::move(idx), std::move(rule)});
    };
    if (d.I == 0 || d.J == 0 || d.K == 0 || d.T <= 0) {
        bad("dims", {d.I, d.J, d.K, d.T}, "all index sets must be nonempty");
        return out;
    }
    auto shape = [&](const auto& m, int r, int c, const char* f) {
        if (m.rows() != r || m.cols() != c) {
            bad(f, {static_cast<int>(m.rows()), static_cast<int>(m.cols())}, "wrong shape");
            return false;
        }
        return true;
    };
    bool ok = shape(inst.expand_cost, d.I, d.J, "expand_cost") &
              shape(inst.terminate_cost, d.I, d.J, "terminate_cost") &
              shape(inst.upgrade_cost, d.I, d.J, "upgrade_cost") &
              shape(inst.max_expand, d.I, d.J, "max_expand") &
              shape(inst.max_terminate, d.I, d.J, "max_terminate") &
              shape(inst.initial_lines, d.I, d.J, "initial_lines") &
              shape(inst.initial_green, d.I, d.J, "initial_green") &
              shape(inst.renewable_cost, d.I, 1, "renewable_cost") &
              shape(inst.pv_capacity, d.I, 1, "pv_capacity") &
              shape(inst.eligible, d.J, d.K, "eligible") &
              shape(inst.util_old, d.J, d.K, "util_old") &
              shape(inst.util_green, d.J, d.K, "util_green") &
              shape(inst.energy, d.J, d.K, "energy") &
              shape(inst.throughput_old, d.J, 1, "throughput_old") &
              shape(inst.throughput_green, d.J, 1, "throughput_green") &
              shape(inst.shortage_cost, d.K, 1, "shortage_cost");
    if (inst.cost_old.size() != static_cast<size_t>(d.I * d.J * d.K) ||
        inst.cost_green.size() != static_cast<size_t>(d.I * d.J * d.K)) {
        bad("production_cost", {}, "wrong shape");
        ok = false;
    }
    if (!ok) return out;

    for (int i = 0; i < d.I; ++i)
        for (int j = 0; j < d.J; ++j) {
            if (inst.max_expand(i, j) < 0) bad("max_expand", {i, j}, "must be nonnegative");
            if (inst.max_terminate(i, j) < 0) bad("max_terminate", {i, j}, "must be nonnegative");
            if (inst.initial_lines(i, j) < 0) bad("initial_lines", {i, j}, "must be nonnegative");
            if (inst.initial_green(i, j) < 0) bad("initial_green", {i, j}, "must be nonnegative");
            if (inst.initial_green(i, j) > inst.initial_lines(i, j))
                bad("initial_green", {i, j}, "initial green lines exceed initial lines");
        }
    for (int j = 0; j < d.J; ++j)
        for (int k = 0; k < d.K; ++k) {
            int e = inst.eligible(j, k);
            if (e != 0 && e != 1) bad("eligible", {j, k}, "must be 0 or 1");
            if (e && (inst.util_old(j, k) <= 0 || inst.util_green(j, k) <= 0))
                bad("utilization", {j, k}, "utilization rates must be positive where eligible");
            if (e && (inst.throughput_old(j) <= 0 || inst.throughput_green(j) <= 0))
                bad("throughput", {j}, "line throughput must be positive for an eligible type");
            if (inst.energy(j, k) < 0) bad("energy", {j, k}, "must be nonnegative");
        }
    // Production must never be cheaper than shortage; one descriptor per product.
    for (int k = 0; k < d.K; ++k) {
        std::vector<int> cells;
        for (int i = 0; i < d.I; ++i)
            for (int j = 0; j < d.J; ++j) {
                if (!inst.eligible(j, k)) continue;
                int c = inst.ijk(i, j, k);
                if (inst.cost_old[c] < inst.shortage_cost(k) ||
                    inst.cost_green[c] < inst.shortage_cost(k)) {
                    cells.push_back(i);
                    cells.push_back(j);
                }
            }
        if (!cells.empty()) {
            cells.insert(cells.begin(), k);
            bad("shortage_cost", cells,
                "production cost below shortage penalty breaks recourse monotonicity "
                "(indices: product, then factory/capacity pairs)");
        }
    }
    for (int i = 0; i < d.I; ++i)
        if (inst.pv_capacity(i) < 0) bad("pv_capacity", {i}, "must be nonnegative");
    if (!(inst.tau >= 0 && inst.tau <= 1)) bad("tau", {}, "must lie in [0,1]");
    if (!(inst.lambda >= 0 && inst.lambda <= 1)) bad("lambda", {}, "must lie in [0,1]");
    if (inst.big_m) {
        int need = 0;
        for (int i = 0; i < d.I; ++i)
            for (int j = 0; j < d.J; ++j)
                need = std::max(need, inst.initial_lines(i, j) + d.T * inst.max_expand(i, j));
        if (*inst.big_m < need) bad("big_m", {*inst.big_m, need}, "below max(x_hat + T f+)");
    }
    if (!(inst.currency_unit > 0 && inst.product_unit > 0))
        bad("units", {}, "unit scales must be positive");
    if (inst.nominal_demand.size() > 0 &&
        (inst.nominal_demand.rows() != static_cast<int>(inst.regions.size()) * d.K ||
         inst.nominal_demand.cols() != d.T))
        bad("nominal_demand", {}, "wrong shape");
    return out;
}

FirstStageDecision::FirstStageDecision(const Dims& dims) : d(dims) {
    X = Xp = Xm = XO = XN = XNp = VectorXi::Zero(d.ijt());
    XBR = VectorXi::Zero(d.I);
}

VectorXd FirstStageDecision::to_vector() const {
    VectorXd v(size());
    int n = d.ijt();
    v.segment(0, n) = X.cast<double>();
    v.segment(n, n) = Xp.cast<double>();
    v.segment(2 * n, n) = Xm.cast<double>();
    v.segment(3 * n, n) = XO.cast<double>();
    v.segment(4 * n, n) = XN.cast<double>();
    v.segment(5 * n, n) = XNp.cast<double>();
    v.segment(6 * n, d.I) = XBR.cast<double>();
    return v;
}

FirstStageDecision FirstStageDecision::from_vector(const Dims& dims, const VectorXd& v) {
    FirstStageDecision x(dims);
    int n = dims.ijt();
    auto take = [&](int off, int len) {
        VectorXi out(len);
        for (int q = 0; q < len; ++q) out(q) = static_cast<int>(std::lround(v(off + q)));
        return out;
    };
    x.X = take(0, n);
    x.Xp = take(n, n);
    x.Xm = take(2 * n, n);
    x.XO = take(3 * n, n);
    x.XN = take(4 * n, n);
    x.XNp = take(5 * n, n);
    x.XBR = take(6 * n, dims.I);
    return x;
}

bool FirstStageDecision::operator==(const FirstStageDecision& o) const {
    return X == o.X && Xp == o.Xp && Xm == o.Xm && XO == o.XO && XN == o.XN && XNp == o.XNp &&
           XBR == o.XBR;
}

FirstStageDecision hold_initial(const Instance& inst) {
    Dims d = inst.dims();
    FirstStageDecision x(d);
    for (int i = 0; i < d.I; ++i)
        for (int j = 0; j < d.J; ++j)
            for (int t = 0; t < d.T; ++t) {
                int q = x.idx(i, j, t);
                x.X(q) = inst.initial_lines(i, j);
                x.XN(q) = inst.initial_green(i, j);
                x.XO(q) = x.X(q) - x.XN(q);
            }
    return x;
}

std::vector<Violation> check_decision(const Instance& inst, const FirstStageDecision& x) {
    std::vector<Violation> out;
    Dims d = inst.dims();
    auto bad = [&](std::string f, std::vector<int> idx, std::string rule) {
        out.push_back({std::move(f), std::move(idx), std::move(rule)});
    };
    if (x.X.size() != d.ijt() || x.XBR.size() != d.I) {
        bad("decision", {}, "dimension mismatch");
        return out;
    }
    int m0 = inst.m0();
    for (int i = 0; i < d.I; ++i) {
        int upgrades = 0;
        for (int j = 0; j < d.J; ++j)
            for (int t = 0; t < d.T; ++t) {
                int q = x.idx(i, j, t);
                if (x.X(q) < 0 || x.Xp(q) < 0 || x.Xm(q) < 0 || x.XO(q) < 0 || x.XN(q) < 0 ||
                    x.XNp(q) < 0)
                    bad("decision", {i, j, t}, "negative line count");
                if (t == 0 && x.X(q) != inst.initial_lines(i, j))
                    bad("X", {i, j, t}, "first period must equal the initial configuration");
                if (t == 0 && x.XN(q) != inst.initial_green(i, j))
                    bad("XN", {i, j, t}, "first period must equal the initial green lines");
                if (t + 1 < d.T) {
                    int n = x.idx(i, j, t + 1);
                    if (x.X(n) != x.X(q) + x.Xp(q) - x.Xm(q))
                        bad("X", {i, j, t}, "capacity balance");
                    if (x.XN(n) != x.XN(q) + x.XNp(q)) bad("XN", {i, j, t}, "green balance");
                }
                if (x.Xp(q) > inst.max_expand(i, j)) bad("Xp", {i, j, t}, "expansion limit");
                if (x.Xm(q) > inst.max_terminate(i, j)) bad("Xm", {i, j, t}, "termination limit");
                if (x.XO(q) + x.XN(q) != x.X(q)) bad("XO", {i, j, t}, "XO + XN must equal X");
                if (x.XNp(q) > m0 * x.XBR(i)) bad("XNp", {i, j, t}, "upgrade requires PV");
                upgrades += x.XNp(q);
            }
        if (x.XBR(i) != 0 && x.XBR(i) != 1) bad("XBR", {i}, "must be binary");
        if (x.XBR(i) > upgrades) bad("XBR", {i}, "PV requires at least one upgrade");
    }
    return out;
}

StrategicCost strategic_breakdown(const Instance& inst, const FirstStageDecision& x) {
    auto v = check_decision(inst, x);
    if (!v.empty()) throw InvalidDecision("decision violates " + v.front().field + ": " +
                                          v.front().rule);
    Dims d = inst.dims();
    StrategicCost c;
    for (int i = 0; i < d.I; ++i) {
        for (int j = 0; j < d.J; ++j)
            for (int t = 0; t < d.T; ++t) {
                int q = x.idx(i, j, t);
                c.adjustment += inst.expand_cost(i, j) * x.Xp(q) + inst.terminate_cost(i, j) * x.Xm(q);
                c.upgrade += inst.upgrade_cost(i, j) * x.XNp(q);
            }
        c.renewable += inst.renewable_cost(i) * x.XBR(i);
    }
    return c;
}

double strategic_cost(const Instance& inst, const FirstStageDecision& x) {
    return strategic_breakdown(inst, x).total();
}

VectorXd first_stage_costs(const Instance& inst) {
    Dims d = inst.dims();
    FirstStageLayout L{d};
    VectorXd c = VectorXd::Zero(L.size());
    for (int i = 0; i < d.I; ++i) {
        for (int j = 0; j < d.J; ++j)
            for (int t = 0; t < d.T; ++t) {
                c(L.at(L.Xp(), i, j, t)) = inst.expand_cost(i, j);
                c(L.at(L.Xm(), i, j, t)) = inst.terminate_cost(i, j);
                c(L.at(L.XNp(), i, j, t)) = inst.upgrade_cost(i, j);
            }
        c(L.XBR() + i) = inst.renewable_cost(i);
    }
    return c;
}

Instance perturb(const Instance& base, std::uint64_t seed, const PerturbRanges& r) {
    if (r.cost_lo > r.cost_hi || r.tau_lo > r.tau_hi || r.scale_lo > r.scale_hi)
        throw InputError("perturbation ranges must be nonempty");
    std::mt19937_64 rng(seed);
    auto draw = [&](double lo, double hi) {
        if (lo == hi) return lo;
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    Instance out = base;
    auto scale_all = [&](auto& m) {
        for (Eigen::Index q = 0; q < m.size(); ++q) m.data()[q] *= draw(r.cost_lo, r.cost_hi);
    };
    scale_all(out.expand_cost);
    scale_all(out.terminate_cost);
    scale_all(out.upgrade_cost);
    scale_all(out.renewable_cost);
    Dims d = out.dims();
    for (int i = 0; i < d.I; ++i)
        for (int j = 0; j < d.J; ++j)
            for (int k = 0; k < d.K; ++k) {
                if (!out.eligible(j, k)) continue;
                int c = out.ijk(i, j, k);
                out.cost_old[c] *= draw(r.cost_lo, r.cost_hi);
                out.cost_green[c] *= draw(r.cost_lo, r.cost_hi);
            }
    scale_all(out.shortage_cost);
    out.tau = draw(r.tau_lo, r.tau_hi);
    out.ambiguity_scale = draw(r.scale_lo, r.scale_hi);
    out.name = base.name + "-p" + std::to_string(seed);
    return out;
}

// ---- serialization -------------------------------------------------------

json to_json(const Instance& inst) {
    Dims d = inst.dims();
    json j;
    j["name"] = inst.name;
    j["units"] = {{"currency", inst.currency_unit}, {"product", inst.product_unit}};
    j["factories"] = inst.factories;
    j["capacities"] = inst.capacities;
    j["products"] = inst.products;
    j["periods"] = inst.periods;
    j["tau"] = inst.tau;
    j["lambda"] = inst.lambda;
    if (inst.big_m) j["big_m"] = *inst.big_m;
    j["ambiguity_scale"] = inst.ambiguity_scale;

    json fac = json::object();
    for (int i = 0; i < d.I; ++i) {
        json f;
        f["pv_capacity"] = inst.pv_capacity(i);
        f["renewable_cost"] = inst.renewable_cost(i);
        json lines = json::object(), pc = json::object();
        for (int jj = 0; jj < d.J; ++jj) {
            lines[inst.capacities[jj]] = {
                {"initial", inst.initial_lines(i, jj)},
                {"initial_green", inst.initial_green(i, jj)},
                {"expand_cost", inst.expand_cost(i, jj)},
                {"terminate_cost", inst.terminate_cost(i, jj)},
                {"upgrade_cost", inst.upgrade_cost(i, jj)},
                {"max_expand", inst.max_expand(i, jj)},
                {"max_terminate", inst.max_terminate(i, jj)}};
            json per = json::object();
            for (int k = 0; k < d.K; ++k) {
                if (!inst.eligible(jj, k)) continue;
                int c = inst.ijk(i, jj, k);
                per[inst.products[k]] = {{"old", inst.cost_old[c]}, {"green", inst.cost_green[c]}};
            }
            pc[inst.capacities[jj]] = per;
        }
        f["lines"] = lines;
        f["production_cost"] = pc;
        fac[inst.factories[i]] = f;
    }
    j["factory"] = fac;

    json cap = json::object();
    for (int jj = 0; jj < d.J; ++jj) {
        json c;
        c["throughput_old"] = inst.throughput_old(jj);
        c["throughput_green"] = inst.throughput_green(jj);
        json prods = json::object();
        for (int k = 0; k < d.K; ++k) {
            if (!inst.eligible(jj, k)) continue;
            prods[inst.products[k]] = {{"util_old", inst.util_old(jj, k)},
                                       {"util_green", inst.util_green(jj, k)},
                                       {"energy", inst.energy(jj, k)}};
        }
        c["products"] = prods;
        cap[inst.capacities[jj]] = c;
    }
    j["capacity"] = cap;

    json sc = json::object();
    for (int k = 0; k < d.K; ++k) sc[inst.products[k]] = inst.shortage_cost(k);
    j["shortage_cost"] = sc;

    if (!inst.regions.empty()) {
        j["regions"] = inst.regions;
        json nd = json::object();
        for (size_t r = 0; r < inst.regions.size(); ++r) {
            json per = json::object();
            for (int k = 0; k < d.K; ++k) {
                std::vector<double> row(d.T);
                for (int t = 0; t < d.T; ++t) row[t] = inst.nominal_demand(r * d.K + k, t);
                per[inst.products[k]] = row;
            }
            nd[inst.regions[r]] = per;
        }
        j["nominal_demand"] = nd;
    }
    return j;
}

namespace {

const json& need(const json& j, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) throw InputError("instance JSON: missing field '" + key + "'");
    return *it;
}

template <typename T>
T value_or(const json& j, const std::string& key, T dflt) {
    auto it = j.find(key);
    return it == j.end() ? dflt : it->get<T>();
}

}  // namespace

Instance instance_from_json(const json& j) {
    Instance inst;
    try {
        inst.name = value_or<std::string>(j, "name", "instance");
        if (j.contains("units")) {
            inst.currency_unit = value_or<double>(j["units"], "currency", 1e6);
            inst.product_unit = value_or<double>(j["units"], "product", 1e4);
        }
        inst.factories = need(j, "factories").get<std::vector<std::string>>();
        inst.capacities = need(j, "capacities").get<std::vector<std::string>>();
        inst.products = need(j, "products").get<std::vector<std::string>>();
        inst.periods = need(j, "periods").get<int>();
        inst.tau = need(j, "tau").get<double>();
        inst.lambda = need(j, "lambda").get<double>();
        if (j.contains("big_m") && !j["big_m"].is_null()) inst.big_m = j["big_m"].get<int>();
        inst.ambiguity_scale = value_or<double>(j, "ambiguity_scale", 1.0);

        Dims d = inst.dims();
        inst.expand_cost = inst.terminate_cost = inst.upgrade_cost = MatrixXd::Zero(d.I, d.J);
        inst.max_expand = inst.max_terminate = MatrixXi::Zero(d.I, d.J);
        inst.initial_lines = inst.initial_green = MatrixXi::Zero(d.I, d.J);
        inst.renewable_cost = inst.pv_capacity = VectorXd::Zero(d.I);
        inst.eligible = MatrixXi::Zero(d.J, d.K);
        inst.util_old = inst.util_green = inst.energy = MatrixXd::Zero(d.J, d.K);
        inst.throughput_old = inst.throughput_green = VectorXd::Zero(d.J);
        inst.cost_old.assign(d.I * d.J * d.K, 0.0);
        inst.cost_green.assign(d.I * d.J * d.K, 0.0);
        inst.shortage_cost = VectorXd::Zero(d.K);

        const json& cap = need(j, "capacity");
        for (int jj = 0; jj < d.J; ++jj) {
            const json& c = need(cap, inst.capacities[jj]);
            inst.throughput_old(jj) = need(c, "throughput_old").get<double>();
            inst.throughput_green(jj) = need(c, "throughput_green").get<double>();
            const json prods = c.value("products", json::object());
            for (int k = 0; k < d.K; ++k) {
                auto it = prods.find(inst.products[k]);
                if (it == prods.end()) continue;
                inst.eligible(jj, k) = 1;
                inst.util_old(jj, k) = need(*it, "util_old").get<double>();
                inst.util_green(jj, k) = need(*it, "util_green").get<double>();
                inst.energy(jj, k) = need(*it, "energy").get<double>();
            }
        }
        const json& fac = need(j, "factory");
        for (int i = 0; i < d.I; ++i) {
            const json& f = need(fac, inst.factories[i]);
            inst.pv_capacity(i) = need(f, "pv_capacity").get<double>();
            inst.renewable_cost(i) = need(f, "renewable_cost").get<double>();
            const json& lines = need(f, "lines");
            const json pc = f.value("production_cost", json::object());
            for (int jj = 0; jj < d.J; ++jj) {
                const json& l = need(lines, inst.capacities[jj]);
                inst.initial_lines(i, jj) = value_or<int>(l, "initial", 0);
                inst.initial_green(i, jj) = value_or<int>(l, "initial_green", 0);
                inst.expand_cost(i, jj) = need(l, "expand_cost").get<double>();
                inst.terminate_cost(i, jj) = need(l, "terminate_cost").get<double>();
                inst.upgrade_cost(i, jj) = need(l, "upgrade_cost").get<double>();
                inst.max_expand(i, jj) = need(l, "max_expand").get<int>();
                inst.max_terminate(i, jj) = need(l, "max_terminate").get<int>();
                auto pit = pc.find(inst.capacities[jj]);
                for (int k = 0; k < d.K; ++k) {
                    if (!inst.eligible(jj, k)) continue;
                    if (pit == pc.end() || !pit->contains(inst.products[k]))
                        throw InputError("instance JSON: missing production cost for " +
                                         inst.factories[i] + "/" + inst.capacities[jj] + "/" +
                                         inst.products[k]);
                    const json& e = (*pit)[inst.products[k]];
                    int c = inst.ijk(i, jj, k);
                    inst.cost_old[c] = need(e, "old").get<double>();
                    inst.cost_green[c] = need(e, "green").get<double>();
                }
            }
        }
        const json& sc = need(j, "shortage_cost");
        for (int k = 0; k < d.K; ++k) inst.shortage_cost(k) = need(sc, inst.products[k]).get<double>();

        if (j.contains("regions")) {
            inst.regions = j["regions"].get<std::vector<std::string>>();
            const json& nd = need(j, "nominal_demand");
            inst.nominal_demand = MatrixXd::Zero(inst.regions.size() * d.K, d.T);
            for (size_t r = 0; r < inst.regions.size(); ++r)
                for (int k = 0; k < d.K; ++k) {
                    auto row = need(need(nd, inst.regions[r]), inst.products[k])
                                   .get<std::vector<double>>();
                    if (static_cast<int>(row.size()) != d.T)
                        throw InputError("instance JSON: nominal demand length != periods");
                    for (int t = 0; t < d.T; ++t) inst.nominal_demand(r * d.K + k, t) = row[t];
                }
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("instance JSON: ") + e.what());
    }
    return inst;
}

Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open instance file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("instance file " + path + ": " + e.what());
    }
    return instance_from_json(j);
}

void save_instance(const Instance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << to_json(inst).dump(2) << '\n';
}

json to_json(const FirstStageDecision& x, const Instance& inst) {
    Dims d = inst.dims();
    json j;
    j["instance"] = inst.name;
    json lines = json::object();
    for (int i = 0; i < d.I; ++i) {
        json f = json::object();
        for (int jj = 0; jj < d.J; ++jj) {
            json c;
            std::vector<int> X, Xp, Xm, XN, XNp;
            for (int t = 0; t < d.T; ++t) {
                int q = x.idx(i, jj, t);
                X.push_back(x.X(q));
                Xp.push_back(x.Xp(q));
                Xm.push_back(x.Xm(q));
                XN.push_back(x.XN(q));
                XNp.push_back(x.XNp(q));
            }
            c["X"] = X;
            c["X+"] = Xp;
            c["X-"] = Xm;
            c["XN"] = XN;
            c["XN+"] = XNp;
            f[inst.capacities[jj]] = c;
        }
        f["PV"] = x.XBR(i);
        lines[inst.factories[i]] = f;
    }
    j["lines"] = lines;
    return j;
}

FirstStageDecision decision_from_json(const json& j, const Instance& inst) {
    Dims d = inst.dims();
    FirstStageDecision x(d);
    try {
        const json& lines = need(j, "lines");
        for (int i = 0; i < d.I; ++i) {
            const json& f = need(lines, inst.factories[i]);
            x.XBR(i) = need(f, "PV").get<int>();
            for (int jj = 0; jj < d.J; ++jj) {
                const json& c = need(f, inst.capacities[jj]);
                auto X = need(c, "X").get<std::vector<int>>();
                auto Xp = need(c, "X+").get<std::vector<int>>();
                auto Xm = need(c, "X-").get<std::vector<int>>();
                auto XN = need(c, "XN").get<std::vector<int>>();
                auto XNp = need(c, "XN+").get<std::vector<int>>();
                for (int t = 0; t < d.T; ++t) {
                    int q = x.idx(i, jj, t);
                    x.X(q) = X.at(t);
                    x.Xp(q) = Xp.at(t);
                    x.Xm(q) = Xm.at(t);
                    x.XN(q) = XN.at(t);
                    x.XNp(q) = XNp.at(t);
                    x.XO(q) = x.X(q) - x.XN(q);
                }
            }
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("decision JSON: ") + e.what());
    } catch (const std::out_of_range&) {
        throw InputError("decision JSON: series shorter than the horizon");
    }
    return x;
}

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace greencap
