#include "greencap/climate.hpp"
#include "greencap/solverbridge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace greencap {

using nlohmann::json;

std::vector<ClimateRecord> load_climate_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ClimateError(ClimateError::Kind::BadInput, "cannot open climate file " + path);
    std::vector<ClimateRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (lineno == 1 && line.rfind("year", 0) == 0) continue;
        std::stringstream ss(line);
        std::string y, q, r, h;
        if (!std::getline(ss, y, ',') || !std::getline(ss, q, ',') || !std::getline(ss, r, ',') ||
            !std::getline(ss, h))
            throw ClimateError(ClimateError::Kind::BadInput,
                               path + ":" + std::to_string(lineno) + ": expected 4 fields");
        try {
            ClimateRecord rec{std::stoi(y), std::stoi(q), r, std::stod(h)};
            if (!(rec.hours > 0))
                throw ClimateError(ClimateError::Kind::BadInput,
                                   path + ":" + std::to_string(lineno) + ": hours must be > 0");
            if (rec.quarter < 1 || rec.quarter > 4)
                throw ClimateError(ClimateError::Kind::BadInput,
                                   path + ":" + std::to_string(lineno) + ": quarter must be 1-4");
            out.push_back(rec);
        } catch (const std::logic_error&) {
            throw ClimateError(ClimateError::Kind::BadInput,
                               path + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    return out;
}

ClimateTable tabulate(const std::vector<ClimateRecord>& records) {
    ClimateTable t;
    std::set<std::string> regions;
    std::set<std::pair<int, int>> periods;
    for (const auto& r : records) {
        regions.insert(r.region);
        periods.insert({r.year, r.quarter});
    }
    t.regions.assign(regions.begin(), regions.end());
    t.periods.assign(periods.begin(), periods.end());
    t.hours = MatrixXd::Constant(t.periods.size(), t.regions.size(), -1.0);
    std::map<std::pair<int, int>, int> prow;
    for (size_t p = 0; p < t.periods.size(); ++p) prow[t.periods[p]] = static_cast<int>(p);
    std::map<std::string, int> rcol;
    for (size_t r = 0; r < t.regions.size(); ++r) rcol[t.regions[r]] = static_cast<int>(r);
    for (const auto& r : records) {
        double& cell = t.hours(prow[{r.year, r.quarter}], rcol[r.region]);
        if (cell >= 0)
            throw ClimateError(ClimateError::Kind::BadInput,
                               "duplicate record for " + std::to_string(r.year) + "Q" +
                                   std::to_string(r.quarter) + " region " + r.region);
        cell = r.hours;
    }
    for (Eigen::Index p = 0; p < t.hours.rows(); ++p)
        for (Eigen::Index r = 0; r < t.hours.cols(); ++r)
            if (t.hours(p, r) < 0)
                throw ClimateError(ClimateError::Kind::MissingRegion,
                                   "period " + std::to_string(t.periods[p].first) + "Q" +
                                       std::to_string(t.periods[p].second) + " lacks region " +
                                       t.regions[r]);
    return t;
}

MatrixXd augment_features(const ClimateTable& table) {
    const MatrixXd& h = table.hours;
    MatrixXd f(h.rows(), h.cols() + 2);
    f.leftCols(h.cols()) = h;
    f.col(h.cols()) = h.rowwise().mean();
    f.col(h.cols() + 1) = h.rowwise().maxCoeff() - h.rowwise().minCoeff();
    return f;
}

MatrixXd augment_features(const std::vector<ClimateRecord>& records) {
    return augment_features(tabulate(records));
}

namespace {

double sqdist(const MatrixXd& a, Eigen::Index i, const MatrixXd& b, Eigen::Index j) {
    return (a.row(i) - b.row(j)).squaredNorm();
}

int count_distinct_rows(const MatrixXd& x) {
    std::set<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        std::vector<double> r(x.cols());
        for (Eigen::Index c = 0; c < x.cols(); ++c) r[c] = x(i, c);
        rows.insert(r);
    }
    return static_cast<int>(rows.size());
}

MatrixXd seed_plus_plus(const MatrixXd& x, int S, std::mt19937_64& rng) {
    const Eigen::Index n = x.rows();
    MatrixXd c(S, x.cols());
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    c.row(0) = x.row(pick(rng));
    VectorXd d2(n);
    for (Eigen::Index i = 0; i < n; ++i) d2(i) = sqdist(x, i, c, 0);
    for (int s = 1; s < S; ++s) {
        double total = d2.sum();
        Eigen::Index chosen = 0;
        if (total > 0) {
            double u = std::uniform_real_distribution<double>(0.0, total)(rng);
            double acc = 0;
            chosen = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (u < acc && d2(i) > 0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        c.row(s) = x.row(chosen);
        for (Eigen::Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), sqdist(x, i, c, s));
    }
    return c;
}

}  // namespace

KMeansResult kmeans(const MatrixXd& x, int S, std::uint64_t seed, const KMeansOptions& opts) {
    const Eigen::Index n = x.rows();
    if (S < 1 || S > n)
        throw ClimateError(ClimateError::Kind::DegenerateInput,
                           "cluster count must lie in [1, rows]");
    if (count_distinct_rows(x) < S)
        throw ClimateError(ClimateError::Kind::DegenerateInput,
                           "fewer distinct feature rows than clusters");
    std::mt19937_64 rng(seed);
    KMeansResult best;
    best.wcss = kInf;
    for (int rs = 0; rs < std::max(1, opts.restarts); ++rs) {
        MatrixXd c = seed_plus_plus(x, S, rng);
        VectorXi a = VectorXi::Constant(n, -1);
        std::vector<double> trace;
        int it = 0;
        for (; it < opts.max_iterations; ++it) {
            bool changed = false;
            for (Eigen::Index i = 0; i < n; ++i) {
                int bs = 0;
                double bd = sqdist(x, i, c, 0);
                for (int s = 1; s < S; ++s) {
                    double dd = sqdist(x, i, c, s);
                    if (dd < bd) {
                        bd = dd;
                        bs = s;
                    }
                }
                if (a(i) != bs) {
                    a(i) = bs;
                    changed = true;
                }
            }
            // Repair empty clusters with the point farthest from its centroid.
            for (int s = 0; s < S; ++s) {
                if ((a.array() == s).any()) continue;
                Eigen::Index far = 0;
                double fd = -1;
                for (Eigen::Index i = 0; i < n; ++i) {
                    if ((a.array() == a(i)).count() < 2) continue;
                    double dd = sqdist(x, i, c, a(i));
                    if (dd > fd) {
                        fd = dd;
                        far = i;
                    }
                }
                a(far) = s;
                changed = true;
            }
            MatrixXd sum = MatrixXd::Zero(S, x.cols());
            VectorXd cnt = VectorXd::Zero(S);
            for (Eigen::Index i = 0; i < n; ++i) {
                sum.row(a(i)) += x.row(i);
                cnt(a(i)) += 1;
            }
            for (int s = 0; s < S; ++s) c.row(s) = sum.row(s) / cnt(s);
            double w = 0;
            for (Eigen::Index i = 0; i < n; ++i) w += sqdist(x, i, c, a(i));
            trace.push_back(w);
            if (!changed) break;
        }
        double w = trace.back();
        if (w < best.wcss) {
            best.assignment = a;
            best.centroids = c;
            best.wcss = w;
            best.iterations = it + 1;
            best.wcss_trace = trace;
        }
    }
    return best;
}

double percentile(std::vector<double> v, double p) {
    if (v.empty()) throw ClimateError(ClimateError::Kind::InsufficientSamples, "no samples");
    std::sort(v.begin(), v.end());
    double pos = p / 100.0 * static_cast<double>(v.size() - 1);
    size_t lo = static_cast<size_t>(std::floor(pos));
    size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

VectorXd ClusterSpec::gamma_mid() const {
    VectorXd m = 0.5 * (gamma_lo + gamma_hi);
    return m.cwiseMax(xi_lo).cwiseMin(xi_hi);
}

bool ClusterSpec::operator==(const ClusterSpec& o) const {
    return id == o.id && q == o.q && K == o.K && T == o.T && omega == o.omega &&
           xi_lo == o.xi_lo && xi_hi == o.xi_hi && gamma_lo == o.gamma_lo &&
           gamma_hi == o.gamma_hi;
}

std::vector<std::string> validate(const ClusterSpec& c, double tol) {
    std::vector<std::string> out;
    int n = c.cells();
    if (c.xi_lo.size() != n || c.xi_hi.size() != n || c.gamma_lo.size() != n ||
        c.gamma_hi.size() != n) {
        out.push_back("box vectors must have K*T entries");
        return out;
    }
    if (!(c.q > 0 && c.q <= 1)) out.push_back("q must lie in (0,1]");
    for (int e = 0; e < n; ++e) {
        if (c.xi_lo(e) > c.gamma_lo(e) + tol || c.gamma_lo(e) > c.gamma_hi(e) + tol ||
            c.gamma_hi(e) > c.xi_hi(e) + tol)
            out.push_back("cell " + std::to_string(e) + " violates xi_lo <= gamma_lo <= gamma_hi <= xi_hi");
        if (c.xi_lo(e) < 0) out.push_back("cell " + std::to_string(e) + " has negative demand");
    }
    return out;
}

std::vector<ClusterSpec> build_ambiguity(const VectorXi& assignment,
                                         const std::vector<MatrixXd>& samples, int K, int T,
                                         double scale) {
    const int S = static_cast<int>(samples.size());
    const int n = K * T;
    std::vector<ClusterSpec> out;
    for (int s = 0; s < S; ++s) {
        const MatrixXd& m = samples[s];
        if (m.rows() < 2 || m.cols() != n)
            throw ClimateError(ClimateError::Kind::InsufficientSamples,
                               "cluster " + std::to_string(s) +
                                   " needs at least two demand samples per cell");
        ClusterSpec c;
        c.id = s;
        c.K = K;
        c.T = T;
        c.q = static_cast<double>((assignment.array() == s).count()) /
              static_cast<double>(assignment.size());
        c.xi_lo.resize(n);
        c.xi_hi.resize(n);
        c.gamma_lo.resize(n);
        c.gamma_hi.resize(n);
        for (int e = 0; e < n; ++e) {
            std::vector<double> v(m.rows());
            for (Eigen::Index r = 0; r < m.rows(); ++r) v[r] = m(r, e);
            double lo = *std::min_element(v.begin(), v.end());
            double hi = *std::max_element(v.begin(), v.end());
            double glo = percentile(v, 10.0), ghi = percentile(v, 90.0);
            if (scale != 1.0) {
                double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
                lo = std::max(0.0, mid - scale * half);
                hi = mid + scale * half;
                double gmid = 0.5 * (glo + ghi), ghalf = 0.5 * (ghi - glo);
                glo = gmid - scale * ghalf;
                ghi = gmid + scale * ghalf;
            }
            glo = std::clamp(glo, lo, hi);
            ghi = std::clamp(ghi, glo, hi);
            c.xi_lo(e) = lo;
            c.xi_hi(e) = hi;
            c.gamma_lo(e) = glo;
            c.gamma_hi(e) = ghi;
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<MatrixXd> generate_demand_samples(const Instance& inst, const ClimateTable& table,
                                              const VectorXi& assignment, int S,
                                              std::uint64_t seed, const DemandModel& dm) {
    Dims d = inst.dims();
    const int R = static_cast<int>(inst.regions.size());
    if (R == 0 || inst.nominal_demand.rows() != R * d.K)
        throw ClimateError(ClimateError::Kind::BadInput, "instance carries no nominal demand");
    if (static_cast<int>(table.regions.size()) != R)
        throw ClimateError(ClimateError::Kind::MissingRegion,
                           "climate regions do not match instance regions");
    VectorXd hist_mean = table.hours.colwise().mean();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<MatrixXd> out(S);
    std::vector<int> rows(S, 0);
    for (int s = 0; s < S; ++s)
        out[s].resize((assignment.array() == s).count() * dm.samples_per_member, d.kt());
    for (Eigen::Index p = 0; p < assignment.size(); ++p) {
        int s = assignment(p);
        for (int rep = 0; rep < dm.samples_per_member; ++rep) {
            for (int k = 0; k < d.K; ++k)
                for (int t = 0; t < d.T; ++t) {
                    double v = 0;
                    for (int r = 0; r < R; ++r) {
                        double climate = table.hours(p, r) / hist_mean(r);
                        double noise = unit(rng) < dm.mix_uniform
                                           ? 1.0 + dm.uniform_halfwidth * (2.0 * unit(rng) - 1.0)
                                           : 1.0 + dm.gaussian_sigma * gauss(rng);
                        v += inst.nominal_demand(r * d.K + k, t) * climate * std::max(0.0, noise);
                    }
                    out[s](rows[s], k * d.T + t) = v;
                }
            ++rows[s];
        }
    }
    return out;
}

ClusterSet build_clusters(const Instance& inst, const std::vector<ClimateRecord>& records, int S,
                          std::uint64_t seed, const DemandModel& dm) {
    ClimateTable table = tabulate(records);
    MatrixXd feats = augment_features(table);
    ClusterSet cs;
    cs.regions = table.regions;
    cs.kmeans = kmeans(feats, S, seed);
    auto samples = generate_demand_samples(inst, table, cs.kmeans.assignment, S, seed ^ 0x9e3779b97f4a7c15ULL, dm);
    Dims d = inst.dims();
    cs.clusters = build_ambiguity(cs.kmeans.assignment, samples, d.K, d.T, inst.ambiguity_scale);
    const int R = static_cast<int>(table.regions.size());
    for (auto& c : cs.clusters) {
        c.omega.resize(d.I, d.T);
        for (int i = 0; i < d.I; ++i)
            for (int t = 0; t < d.T; ++t) c.omega(i, t) = cs.kmeans.centroids(c.id, i % R);
    }
    return cs;
}

namespace {

json cells_to_json(const VectorXd& v, int K, int T) {
    json rows = json::array();
    for (int k = 0; k < K; ++k) {
        std::vector<double> r(T);
        for (int t = 0; t < T; ++t) r[t] = v(k * T + t);
        rows.push_back(r);
    }
    return rows;
}

VectorXd cells_from_json(const json& j, int K, int T) {
    VectorXd v(K * T);
    if (static_cast<int>(j.size()) != K)
        throw ClimateError(ClimateError::Kind::BadInput, "cluster box: wrong product count");
    for (int k = 0; k < K; ++k) {
        auto r = j[k].get<std::vector<double>>();
        if (static_cast<int>(r.size()) != T)
            throw ClimateError(ClimateError::Kind::BadInput, "cluster box: wrong period count");
        for (int t = 0; t < T; ++t) v(k * T + t) = r[t];
    }
    return v;
}

}  // namespace

json to_json(const std::vector<ClusterSpec>& clusters) {
    json arr = json::array();
    for (const auto& c : clusters) {
        json j;
        j["id"] = c.id;
        j["q"] = c.q;
        j["K"] = c.K;
        j["T"] = c.T;
        json om = json::array();
        for (Eigen::Index i = 0; i < c.omega.rows(); ++i) {
            std::vector<double> r(c.omega.cols());
            for (Eigen::Index t = 0; t < c.omega.cols(); ++t) r[t] = c.omega(i, t);
            om.push_back(r);
        }
        j["omega"] = om;
        j["xi_lo"] = cells_to_json(c.xi_lo, c.K, c.T);
        j["xi_hi"] = cells_to_json(c.xi_hi, c.K, c.T);
        j["gamma_lo"] = cells_to_json(c.gamma_lo, c.K, c.T);
        j["gamma_hi"] = cells_to_json(c.gamma_hi, c.K, c.T);
        arr.push_back(j);
    }
    return json{{"clusters", arr}, {"cell_order", "k-major"}};
}

std::vector<ClusterSpec> clusters_from_json(const json& root) {
    std::vector<ClusterSpec> out;
    try {
        for (const auto& j : root.at("clusters")) {
            ClusterSpec c;
            c.id = j.at("id").get<int>();
            c.q = j.at("q").get<double>();
            c.K = j.at("K").get<int>();
            c.T = j.at("T").get<int>();
            const auto& om = j.at("omega");
            c.omega.resize(om.size(), c.T);
            for (size_t i = 0; i < om.size(); ++i) {
                auto r = om[i].get<std::vector<double>>();
                if (static_cast<int>(r.size()) != c.T)
                    throw ClimateError(ClimateError::Kind::BadInput, "omega: wrong period count");
                for (int t = 0; t < c.T; ++t) c.omega(i, t) = r[t];
            }
            c.xi_lo = cells_from_json(j.at("xi_lo"), c.K, c.T);
            c.xi_hi = cells_from_json(j.at("xi_hi"), c.K, c.T);
            c.gamma_lo = cells_from_json(j.at("gamma_lo"), c.K, c.T);
            c.gamma_hi = cells_from_json(j.at("gamma_hi"), c.K, c.T);
            out.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw ClimateError(ClimateError::Kind::BadInput, std::string("cluster JSON: ") + e.what());
    }
    return out;
}

std::vector<ClusterSpec> load_clusters(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ClimateError(ClimateError::Kind::BadInput, "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ClimateError(ClimateError::Kind::BadInput, path + ": " + e.what());
    }
    return clusters_from_json(j);
}

void save_clusters(const std::vector<ClusterSpec>& clusters, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ClimateError(ClimateError::Kind::BadInput, "cannot write " + path);
    out << to_json(clusters).dump(2) << '\n';
}

}  // namespace greencap
