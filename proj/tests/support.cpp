#include "support.hpp"

namespace greencap::testing {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Instance tiny_instance(std::uint64_t seed, int I, int J, int K, int T) {
    std::mt19937_64 rng(seed);
    auto u = [&](double lo, double hi) { return uniform(rng, lo, hi); };
    auto ui = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    Instance in;
    in.name = "tiny-" + std::to_string(seed);
    for (int i = 0; i < I; ++i) in.factories.push_back("F" + std::to_string(i + 1));
    for (int j = 0; j < J; ++j) in.capacities.push_back("C" + std::to_string(j + 1));
    for (int k = 0; k < K; ++k) in.products.push_back("P" + std::to_string(k + 1));
    in.periods = T;
    in.expand_cost.resize(I, J);
    in.terminate_cost.resize(I, J);
    in.upgrade_cost.resize(I, J);
    in.max_expand = MatrixXi::Ones(I, J);
    in.max_terminate = MatrixXi::Ones(I, J);
    in.initial_lines.resize(I, J);
    in.initial_green = MatrixXi::Zero(I, J);
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < J; ++j) {
            in.expand_cost(i, j) = u(5, 20);
            in.terminate_cost(i, j) = u(-3, 1);
            in.upgrade_cost(i, j) = u(1, 6);
            in.initial_lines(i, j) = ui(1, 2);
        }
    in.renewable_cost.resize(I);
    in.pv_capacity.resize(I);
    for (int i = 0; i < I; ++i) {
        in.renewable_cost(i) = u(2, 8);
        in.pv_capacity(i) = u(300, 1500);
    }
    in.eligible = MatrixXi::Ones(J, K);
    in.util_old.resize(J, K);
    in.util_green.resize(J, K);
    in.energy.resize(J, K);
    in.throughput_old.resize(J);
    in.throughput_green.resize(J);
    for (int j = 0; j < J; ++j) {
        in.throughput_old(j) = u(4, 12);
        in.throughput_green(j) = in.throughput_old(j) * u(0.95, 1.0);
        for (int k = 0; k < K; ++k) {
            in.util_old(j, k) = u(0.9, 1.2);
            in.util_green(j, k) = in.util_old(j, k) * u(1.0, 1.05);
            in.energy(j, k) = u(0.2, 0.5);
        }
    }
    in.shortage_cost.resize(K);
    for (int k = 0; k < K; ++k) in.shortage_cost(k) = u(0.1, 0.3);
    in.cost_old.resize(I * J * K);
    in.cost_green.resize(I * J * K);
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < J; ++j)
            for (int k = 0; k < K; ++k) {
                in.cost_old[in.ijk(i, j, k)] = u(1.0, 2.5);
                in.cost_green[in.ijk(i, j, k)] = u(1.0, 2.5);
            }
    in.tau = u(0.0, 0.2);
    in.lambda = u(0.6, 0.99);
    return in;
}

ClusterSpec tiny_cluster(const Instance& inst, std::uint64_t seed, double q) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const Dims d = inst.dims();
    ClusterSpec c;
    c.q = q;
    c.K = d.K;
    c.T = d.T;
    c.omega.resize(d.I, d.T);
    for (int i = 0; i < d.I; ++i)
        for (int t = 0; t < d.T; ++t) c.omega(i, t) = uniform(rng, 250, 450);
    const int n = d.kt();
    c.xi_lo.resize(n);
    c.xi_hi.resize(n);
    c.gamma_lo.resize(n);
    c.gamma_hi.resize(n);
    for (int e = 0; e < n; ++e) {
        c.xi_lo(e) = uniform(rng, 1.0, 5.0);
        c.xi_hi(e) = c.xi_lo(e) + uniform(rng, 0.5, 6.0);
        const double w = c.xi_hi(e) - c.xi_lo(e);
        c.gamma_lo(e) = c.xi_lo(e) + uniform(rng, 0.05, 0.45) * w;
        c.gamma_hi(e) = c.gamma_lo(e) + uniform(rng, 0.1, 0.9) * (c.xi_hi(e) - c.gamma_lo(e));
    }
    return c;
}

FirstStageDecision tiny_plan(const Instance& inst, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
    auto ui = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const Dims d = inst.dims();
    FirstStageDecision x(d);
    for (int q = 0; q < d.ijt(); ++q) {
        x.XO(q) = ui(0, 2);
        x.XN(q) = ui(0, 1);
        x.X(q) = x.XO(q) + x.XN(q);
    }
    for (int i = 0; i < d.I; ++i) x.XBR(i) = ui(0, 1);
    return x;
}

FirstStageDecision ample_plan(const Instance& inst) {
    FirstStageDecision x(inst.dims());
    x.XO.setConstant(3);
    x.XN.setConstant(2);
    x.X.setConstant(5);
    x.XBR.setConstant(1);
    return x;
}

FirstStageDecision generous_plan(const Instance& inst) {
    const Dims d = inst.dims();
    FirstStageDecision x = hold_initial(inst);
    for (int i = 0; i < d.I; ++i) {
        bool any = false;
        for (int j = 0; j < d.J; ++j) {
            const int free0 = inst.initial_lines(i, j) - inst.initial_green(i, j);
            if (free0 <= 0 || d.T < 2) continue;
            any = true;
            x.XNp(x.idx(i, j, 0)) = 1;
            for (int t = 1; t < d.T; ++t) {
                const int q = x.idx(i, j, t);
                x.XN(q) = inst.initial_green(i, j) + 1;
                x.XO(q) = x.X(q) - x.XN(q);
            }
        }
        x.XBR(i) = any ? 1 : 0;
    }
    return x;
}

}  // namespace greencap::testing

namespace greencap::testing {

MonolithResult solve_monolith(const Instance& inst, const std::vector<ClusterSpec>& clusters) {
    const Dims d = inst.dims();
    const int I = d.I, J = d.J, K = d.K, T = d.T;
    Model m;
    auto xv = [&](int block, int i, int j, int t) { return block * d.ijt() + (i * J + j) * T + t; };
    enum { X, XP, XM, XO, XN, XNP };
    const double M0 = inst.m0();
    for (int b = 0; b < 6; ++b)
        for (int i = 0; i < I; ++i)
            for (int j = 0; j < J; ++j)
                for (int t = 0; t < T; ++t) {
                    double lo = 0, hi = M0, cost = 0;
                    const bool last = t == T - 1;
                    if (b == X && t == 0) lo = hi = inst.initial_lines(i, j);
                    if (b == XN && t == 0) lo = hi = inst.initial_green(i, j);
                    if (b == XP) hi = last ? 0 : inst.max_expand(i, j), cost = inst.expand_cost(i, j);
                    if (b == XM) hi = last ? 0 : inst.max_terminate(i, j), cost = inst.terminate_cost(i, j);
                    if (b == XNP) hi = last ? 0 : M0, cost = inst.upgrade_cost(i, j);
                    m.add_var(lo, hi, cost, VarType::Integer);
                }
    const int br = m.num_vars();
    for (int i = 0; i < I; ++i) m.add_var(0, 1, inst.renewable_cost(i), VarType::Binary);
    const int nx = m.num_vars();
    for (int i = 0; i < I; ++i) {
        std::vector<int> all;
        for (int j = 0; j < J; ++j)
            for (int t = 0; t < T; ++t) {
                if (t + 1 < T) {
                    m.add_row(0, 0, {xv(X, i, j, t + 1), xv(X, i, j, t), xv(XP, i, j, t), xv(XM, i, j, t)},
                              {1, -1, -1, 1});
                    m.add_row(0, 0, {xv(XN, i, j, t + 1), xv(XN, i, j, t), xv(XNP, i, j, t)}, {1, -1, -1});
                }
                m.add_row(0, 0, {xv(XO, i, j, t), xv(XN, i, j, t), xv(X, i, j, t)}, {1, 1, -1});
                m.add_row(-kInf, 0, {xv(XNP, i, j, t), br + i}, {1, -M0});
                all.push_back(xv(XNP, i, j, t));
            }
        std::vector<double> ones(all.size(), 1.0);
        all.push_back(br + i);
        ones.push_back(-1);
        m.add_row(0, kInf, all, ones);
    }

    const double scale = inst.product_unit / inst.currency_unit;
    for (const ClusterSpec& cl : clusters) {
        const int C = K * T;
        const int eta = m.add_var(0, kInf, cl.q);
        const int alpha = m.add_var(-kInf, kInf, 0);
        const int bu = m.add_vars(C, 0, kInf, 0);
        const int bl = m.add_vars(C, 0, kInf, 0);
        {
            std::vector<int> idx{eta, alpha};
            std::vector<double> val{1, -1};
            for (int c = 0; c < C; ++c) {
                idx.push_back(bu + c), val.push_back(-cl.gamma_hi(c));
                idx.push_back(bl + c), val.push_back(cl.gamma_lo(c));
            }
            m.add_row(0, kInf, idx, val);
        }
        for (std::uint64_t mask = 0; mask < (1ULL << C); ++mask) {
            VectorXd xi(C);
            for (int c = 0; c < C; ++c) xi(c) = (mask >> c & 1) ? cl.xi_hi(c) : cl.xi_lo(c);
            // Y variables for this corner
            auto blockv = [&](int n) { return m.add_vars(n, 0, kInf, 0); };
            const int ot = blockv(I * J * K * T), nt = blockv(I * J * K * T), ng = blockv(I * J * K * T);
            const int yu = blockv(K * T);
            auto y = [&](int base, int i, int j, int k, int t) { return base + ((i * J + j) * K + k) * T + t; };
            std::vector<int> cidx{alpha};
            std::vector<double> cval{1};
            for (int c = 0; c < C; ++c) {
                cidx.push_back(bu + c), cval.push_back(xi(c));
                cidx.push_back(bl + c), cval.push_back(-xi(c));
            }
            double big = 0;
            for (int j = 0; j < J; ++j)
                big = std::max({big, inst.throughput_old(j), inst.throughput_green(j)});
            double min_util = kInf;
            for (int j = 0; j < J; ++j)
                for (int k = 0; k < K; ++k)
                    if (inst.eligible(j, k)) min_util = std::min({min_util, inst.util_old(j, k), inst.util_green(j, k)});
            big = 2 * big / min_util;
            for (int i = 0; i < I; ++i)
                for (int j = 0; j < J; ++j)
                    for (int t = 0; t < T; ++t) {
                        std::vector<int> io{xv(XO, i, j, t)}, in{xv(XN, i, j, t)};
                        std::vector<double> vo{inst.throughput_old(j)}, vn{inst.throughput_green(j)};
                        for (int k = 0; k < K; ++k) {
                            const double b = inst.eligible(j, k) ? big : 0.0;
                            m.add_row(0, kInf, {xv(XO, i, j, t), y(ot, i, j, k, t)}, {b, -1});
                            m.add_row(0, kInf, {xv(XN, i, j, t), y(nt, i, j, k, t)}, {b, -1});
                            m.add_row(0, kInf, {xv(XN, i, j, t), y(ng, i, j, k, t)}, {b, -1});
                            io.push_back(y(ot, i, j, k, t)), vo.push_back(-inst.util_old(j, k));
                            in.push_back(y(nt, i, j, k, t)), vn.push_back(-inst.util_green(j, k));
                            in.push_back(y(ng, i, j, k, t)), vn.push_back(-inst.util_green(j, k));
                            const double co = inst.cost_old[inst.ijk(i, j, k)] * scale;
                            const double cn = inst.cost_green[inst.ijk(i, j, k)] * scale;
                            cidx.push_back(y(ot, i, j, k, t)), cval.push_back(-co);
                            cidx.push_back(y(nt, i, j, k, t)), cval.push_back(-cn);
                            cidx.push_back(y(ng, i, j, k, t)), cval.push_back(-cn);
                        }
                        m.add_row(0, kInf, io, vo);
                        m.add_row(0, kInf, in, vn);
                    }
            std::vector<int> gidx;
            std::vector<double> gval;
            for (int i = 0; i < I; ++i)
                for (int j = 0; j < J; ++j)
                    for (int k = 0; k < K; ++k)
                        for (int t = 0; t < T; ++t) {
                            gidx.push_back(y(ng, i, j, k, t)), gval.push_back(1 - inst.tau);
                            gidx.push_back(y(ot, i, j, k, t)), gval.push_back(-inst.tau);
                            gidx.push_back(y(nt, i, j, k, t)), gval.push_back(-inst.tau);
                        }
            m.add_row(0, kInf, gidx, gval);
            for (int k = 0; k < K; ++k)
                for (int t = 0; t < T; ++t) {
                    const double dem = xi(k * T + t);
                    std::vector<int> idx{yu + k * T + t};
                    std::vector<double> val{1};
                    for (int i = 0; i < I; ++i)
                        for (int j = 0; j < J; ++j)
                            for (int base : {ot, nt, ng}) idx.push_back(y(base, i, j, k, t)), val.push_back(1);
                    m.add_row(dem, dem, idx, val);
                    m.add_row(-kInf, (1 - inst.lambda) * dem, {yu + k * T + t}, {1});
                    cidx.push_back(yu + k * T + t), cval.push_back(-inst.shortage_cost(k) * scale);
                }
            for (int i = 0; i < I; ++i)
                for (int t = 0; t < T; ++t) {
                    std::vector<int> idx{br + i};
                    std::vector<double> val{inst.pv_capacity(i) * cl.omega(i, t) / inst.product_unit};
                    for (int j = 0; j < J; ++j)
                        for (int k = 0; k < K; ++k)
                            idx.push_back(y(ng, i, j, k, t)), val.push_back(-inst.energy(j, k));
                    m.add_row(0, kInf, idx, val);
                }
            m.add_row(0, kInf, cidx, cval);
        }
    }
    SolveOptions o;
    o.mip_rel_gap = 0;
    o.mip_abs_gap = 1e-7;
    SolveResult r = solve(m, o);
    MonolithResult out;
    out.status = r.status;
    if (!r.optimal()) return out;
    out.objective = r.objective;
    VectorXd v(nx);
    for (int i = 0; i < nx; ++i) v(i) = std::round(r.x[i]);
    out.x = FirstStageDecision::from_vector(d, v);
    return out;
}

}  // namespace greencap::testing
