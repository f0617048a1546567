#include "greencap/codec.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <cctype>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace greencap {

namespace fs = std::filesystem;

LabelVector encode_scenario(const Scenario& xi, const ClusterSpec& cluster, double tol) {
    const int C = cluster.cells();
    if (xi.size() != C)
        throw CodecError(CodecError::Kind::DimensionMismatch,
                         "scenario has " + std::to_string(xi.size()) + " cells, cluster has " +
                             std::to_string(C));
    LabelVector bits(C);
    for (int c = 0; c < C; ++c) {
        const double lo = cluster.xi_lo(c), hi = cluster.xi_hi(c);
        const double eps = tol * std::max(1.0, std::abs(hi));
        if (std::abs(xi(c) - lo) <= eps)
            bits(c) = 0;
        else if (std::abs(xi(c) - hi) <= eps)
            bits(c) = 1;
        else
            throw CodecError(CodecError::Kind::NonBoundary,
                             "cell " + std::to_string(c) + " is not at a box bound");
    }
    return bits;
}

Scenario decode_label(const LabelVector& bits, const ClusterSpec& cluster) {
    if (bits.size() != cluster.cells())
        throw CodecError(CodecError::Kind::DimensionMismatch, "label length does not match the cluster");
    Scenario xi = cluster.xi_lo;
    for (int c = 0; c < cluster.cells(); ++c)
        if (bits(c)) xi(c) = cluster.xi_hi(c);
    return xi;
}

std::uint64_t label_value(const LabelVector& bits) {
    if (bits.size() > 64) throw CodecError(CodecError::Kind::DimensionMismatch, "label longer than 64 bits");
    std::uint64_t v = 0;
    for (int c = 0; c < bits.size(); ++c) v = v << 1 | (bits(c) ? 1u : 0u);
    return v;
}

namespace {

// Lexicographic on equal-length bit rows is the MSB-first integer order.
bool row_less(const ScenarioImage& img, int a, int b) {
    for (int c = 0; c < img.cols(); ++c)
        if (img(a, c) != img(b, c)) return img(a, c) < img(b, c);
    return false;
}

}  // namespace

bool rows_sorted(const ScenarioImage& img) {
    for (int r = 1; r < img.rows(); ++r)
        if (row_less(img, r, r - 1)) return false;
    return true;
}

ScenarioImage sample_image(const DiscreteDistribution& dist, const ClusterSpec& cluster, int rows,
                           Weighting w, std::uint64_t seed) {
    if (dist.size() == 0) throw CodecError(CodecError::Kind::Format, "empty support");
    std::vector<LabelVector> labels;
    for (const Scenario& xi : dist.scenarios) labels.push_back(encode_scenario(xi, cluster));
    std::vector<double> weights(dist.size(), 1.0);
    if (w == Weighting::Probability) weights = dist.prob;
    std::mt19937_64 rng(seed);
    std::discrete_distribution<int> pick(weights.begin(), weights.end());
    std::vector<int> drawn(rows);
    for (int& d : drawn) d = pick(rng);
    std::sort(drawn.begin(), drawn.end(), [&](int a, int b) {
        return std::lexicographical_compare(labels[a].begin(), labels[a].end(), labels[b].begin(),
                                            labels[b].end());
    });
    ScenarioImage img(rows, cluster.cells());
    for (int r = 0; r < rows; ++r) img.row(r) = labels[drawn[r]];
    if (!rows_sorted(img)) throw CodecError(CodecError::Kind::Format, "image rows not sorted");
    return img;
}

std::vector<Scenario> decode_image(const ScenarioImage& img, const ClusterSpec& cluster) {
    if (img.cols() != cluster.cells())
        throw CodecError(CodecError::Kind::DimensionMismatch,
                         "image has " + std::to_string(img.cols()) + " columns, cluster has " +
                             std::to_string(cluster.cells()) + " cells");
    std::vector<Scenario> out;
    for (int r = 0; r < img.rows(); ++r) {
        Scenario xi = decode_label(img.row(r), cluster);
        if (std::find(out.begin(), out.end(), xi) == out.end()) out.push_back(std::move(xi));
    }
    return out;
}

void write_pbm(std::ostream& out, const ScenarioImage& img) {
    out << "P1\n# cells k-major, first cell most significant, rows ascending\n"
        << img.cols() << ' ' << img.rows() << '\n';
    for (int r = 0; r < img.rows(); ++r) {
        for (int c = 0; c < img.cols(); ++c) out << (c ? " " : "") << int(img(r, c));
        out << '\n';
    }
}

std::string to_pbm(const ScenarioImage& img) {
    std::ostringstream os;
    write_pbm(os, img);
    return os.str();
}

ScenarioImage read_pbm(std::istream& in) {
    auto fail = [](const std::string& m) { return CodecError(CodecError::Kind::Format, "pbm: " + m); };
    auto skip = [&] {
        for (;;) {
            int ch = in.peek();
            if (ch == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(ch)) {
                in.get();
            } else {
                return;
            }
        }
    };
    std::string magic;
    in >> magic;
    if (magic != "P1") throw fail("expected P1 header");
    long w = -1, h = -1;
    skip();
    in >> w;
    skip();
    in >> h;
    if (!in || w <= 0 || h <= 0 || w > 4096 || h > 1 << 20) throw fail("bad dimensions");
    ScenarioImage img(h, w);
    for (long r = 0; r < h; ++r)
        for (long c = 0; c < w; ++c) {
            skip();
            const int ch = in.get();
            if (ch != '0' && ch != '1') throw fail("truncated or non-binary pixel data");
            img(r, c) = static_cast<std::uint8_t>(ch - '0');
        }
    skip();
    if (in.peek() != std::char_traits<char>::eof()) throw fail("trailing data");
    return img;
}

ScenarioImage read_pbm_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw CodecError(CodecError::Kind::Io, "cannot open " + path);
    return read_pbm(f);
}

std::vector<FeatureBlock> feature_blocks(const Dims& d) {
    const int I = d.I, J = d.J, K = d.K, T = d.T;
    return {{"plan", 6 * d.ijt() + I},
            {"expand_cost", I * J},
            {"terminate_cost", I * J},
            {"upgrade_cost", I * J},
            {"max_expand", I * J},
            {"max_terminate", I * J},
            {"initial_lines", I * J},
            {"initial_green", I * J},
            {"renewable_cost", I},
            {"pv_capacity", I},
            {"eligible", J * K},
            {"util_old", J * K},
            {"util_green", J * K},
            {"energy", J * K},
            {"throughput_old", J},
            {"throughput_green", J},
            {"cost_old", I * J * K},
            {"cost_green", I * J * K},
            {"shortage_cost", K},
            {"tau", 1},
            {"lambda", 1},
            {"omega", I * T},
            {"xi_lo", K * T},
            {"xi_hi", K * T},
            {"gamma_lo", K * T},
            {"gamma_hi", K * T}};
}

VectorXd raw_features(const FirstStageDecision& x, const Instance& inst, const ClusterSpec& cluster) {
    const Dims d = inst.dims();
    if (x.d.I != d.I || x.d.J != d.J || x.d.T != d.T || cluster.K != d.K || cluster.T != d.T)
        throw CodecError(CodecError::Kind::DimensionMismatch, "plan, instance and cluster disagree");
    std::vector<double> v;
    auto put = [&](const auto& m) {
        // row-major flattening
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(static_cast<double>(m(r, c)));
    };
    auto put_vec = [&](const std::vector<double>& a) { v.insert(v.end(), a.begin(), a.end()); };
    put(x.to_vector());
    put(inst.expand_cost), put(inst.terminate_cost), put(inst.upgrade_cost);
    put(inst.max_expand), put(inst.max_terminate);
    put(inst.initial_lines), put(inst.initial_green);
    put(inst.renewable_cost), put(inst.pv_capacity);
    put(inst.eligible), put(inst.util_old), put(inst.util_green), put(inst.energy);
    put(inst.throughput_old), put(inst.throughput_green);
    put_vec(inst.cost_old), put_vec(inst.cost_green);
    put(inst.shortage_cost);
    v.push_back(inst.tau);
    v.push_back(inst.lambda);
    put(cluster.omega);
    put(cluster.xi_lo), put(cluster.xi_hi), put(cluster.gamma_lo), put(cluster.gamma_hi);
    return Eigen::Map<VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

FeatureModel FeatureModel::fit(const MatrixXd& corpus, double variance) {
    FeatureModel fm;
    const Eigen::Index n = corpus.rows(), p = corpus.cols();
    if (n == 0) throw CodecError(CodecError::Kind::UnfittedModel, "empty corpus");
    fm.mean = corpus.colwise().mean().transpose();
    MatrixXd z = corpus.rowwise() - fm.mean.transpose();
    fm.scale = (z.array().square().colwise().sum() / static_cast<double>(n)).sqrt().transpose();
    for (Eigen::Index c = 0; c < p; ++c) {
        if (fm.scale(c) <= 1e-12 * std::max(1.0, std::abs(fm.mean(c)))) fm.scale(c) = 0.0;
        z.col(c) = fm.scale(c) > 0 ? VectorXd(z.col(c) / fm.scale(c)) : VectorXd::Zero(n);
    }
    fm.fitted = true;
    fm.components.resize(p, 0);
    if (n < 2) return fm;
    Eigen::BDCSVD<MatrixXd> svd(z, Eigen::ComputeThinV);
    const VectorXd var = svd.singularValues().array().square();
    const double total = var.sum();
    if (total <= 1e-12) return fm;
    double cum = 0.0;
    int k = 0;
    while (k < var.size() && cum < variance * total * (1 - 1e-12)) cum += var(k++);
    fm.needed = k;
    k = std::min(k, kFeatureLength);
    fm.components = svd.matrixV().leftCols(k);
    for (int c = 0; c < k; ++c) {
        Eigen::Index at;
        fm.components.col(c).cwiseAbs().maxCoeff(&at);
        if (fm.components(at, c) < 0) fm.components.col(c) *= -1.0;
    }
    fm.explained = var.head(k) / total;
    return fm;
}

VectorXd FeatureModel::project(const VectorXd& raw) const {
    if (!fitted) throw CodecError(CodecError::Kind::UnfittedModel, "feature model is not fitted");
    if (raw.size() != mean.size())
        throw CodecError(CodecError::Kind::DimensionMismatch,
                         "raw feature length " + std::to_string(raw.size()) + ", model expects " +
                             std::to_string(mean.size()));
    VectorXd z = raw - mean;
    for (Eigen::Index c = 0; c < z.size(); ++c) z(c) = scale(c) > 0 ? z(c) / scale(c) : 0.0;
    VectorXd out = VectorXd::Zero(kFeatureLength);
    out.head(components.cols()) = components.transpose() * z;
    return out;
}

nlohmann::json FeatureModel::to_json() const {
    auto vec = [](const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    nlohmann::json comps = nlohmann::json::array();
    for (Eigen::Index c = 0; c < components.cols(); ++c) comps.push_back(vec(components.col(c)));
    return {{"mean", vec(mean)},          {"scale", vec(scale)},
            {"components", comps},        {"explained", vec(explained)},
            {"needed", needed},           {"output_length", kFeatureLength},
            {"variance_target", 0.99}};
}

FeatureModel FeatureModel::from_json(const nlohmann::json& j) {
    auto vec = [](const nlohmann::json& a) {
        std::vector<double> v = a.get<std::vector<double>>();
        return VectorXd(Eigen::Map<VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    FeatureModel fm;
    fm.mean = vec(j.at("mean"));
    fm.scale = vec(j.at("scale"));
    fm.explained = vec(j.at("explained"));
    fm.needed = j.value("needed", 0);
    const auto& comps = j.at("components");
    fm.components.resize(fm.mean.size(), static_cast<Eigen::Index>(comps.size()));
    for (std::size_t c = 0; c < comps.size(); ++c) {
        VectorXd col = vec(comps[c]);
        if (col.size() != fm.mean.size())
            throw CodecError(CodecError::Kind::Format, "feature model component length mismatch");
        fm.components.col(static_cast<Eigen::Index>(c)) = col;
    }
    if (fm.scale.size() != fm.mean.size())
        throw CodecError(CodecError::Kind::Format, "feature model scale length mismatch");
    fm.fitted = true;
    return fm;
}

VectorXd build_feature(const FirstStageDecision& x, const Instance& inst,
                       const ClusterSpec& cluster, const FeatureModel& model) {
    return model.project(raw_features(x, inst, cluster));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t item, std::uint64_t n) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(master) ^ item) ^ n);
}

DatasetSummary emit_dataset(const std::vector<Artifact>& artifacts, const std::string& dir,
                            const DatasetOptions& opts) {
    if (artifacts.empty()) throw InputError("no artifacts to encode");
    std::vector<int> keep;
    std::vector<std::string> skipped;
    for (std::size_t a = 0; a < artifacts.size(); ++a) {
        if (artifacts[a].distribution.size() == 0) {
            if (opts.log) *opts.log << "warning: item " << artifacts[a].id << " has empty support, skipped\n";
            skipped.push_back(artifacts[a].id);
            continue;
        }
        keep.push_back(static_cast<int>(a));
    }
    DatasetSummary sum;
    sum.skipped = static_cast<int>(skipped.size());
    if (keep.empty()) throw InputError("every artifact has empty support");

    MatrixXd raw;
    for (std::size_t r = 0; r < keep.size(); ++r) {
        const Artifact& a = artifacts[keep[r]];
        VectorXd f = raw_features(a.x, a.instance, a.cluster);
        if (r == 0) raw.resize(static_cast<Eigen::Index>(keep.size()), f.size());
        if (f.size() != raw.cols())
            throw CodecError(CodecError::Kind::DimensionMismatch,
                             "item " + a.id + " has a different raw feature length");
        raw.row(static_cast<Eigen::Index>(r)) = f.transpose();
    }
    sum.model = opts.model ? *opts.model : FeatureModel::fit(raw);
    if (opts.log && sum.model.needed > kFeatureLength)
        *opts.log << "warning: " << sum.model.needed << " components needed for 99% variance, kept "
                  << kFeatureLength << '\n';

    const int n = static_cast<int>(keep.size());
    std::vector<VectorXd> feats(n);
    std::vector<std::vector<ScenarioImage>> images(n);
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto work = [&] {
        for (int r; (r = next++) < n;) {
            try {
                const Artifact& a = artifacts[keep[r]];
                feats[r] = sum.model.project(raw.row(r).transpose());
                for (int k = 0; k < opts.images_per_item; ++k)
                    images[r].push_back(sample_image(a.distribution, a.cluster, opts.rows, opts.weighting,
                                                     derive_seed(opts.seed, keep[r], k)));
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    int threads = opts.threads > 0 ? opts.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, n);
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);

    std::error_code ec;
    fs::create_directories(fs::path(dir) / "images", ec);
    if (ec) throw CodecError(CodecError::Kind::Io, "cannot create " + dir + ": " + ec.message());
    auto write = [](const fs::path& p, const std::string& text) {
        std::ofstream f(p, std::ios::binary);
        f << text;
        if (!f) throw CodecError(CodecError::Kind::Io, "cannot write " + p.string());
    };

    std::ostringstream csv;
    csv << std::setprecision(17);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < kFeatureLength; ++c) csv << (c ? "," : "") << feats[r](c);
        csv << '\n';
    }
    write(fs::path(dir) / "features.csv", csv.str());
    std::uint64_t h = fnv1a(csv.str());

    nlohmann::json ids = nlohmann::json::array();
    for (int r = 0; r < n; ++r) {
        const Artifact& a = artifacts[keep[r]];
        ids.push_back(a.id);
        for (int k = 0; k < opts.images_per_item; ++k) {
            const std::string name = a.id + "_" + std::to_string(k);
            const std::string pbm = to_pbm(images[r][k]);
            write(fs::path(dir) / "images" / (name + ".pbm"), pbm);
            nlohmann::json side = {
                {"item", a.id},
                {"row", r},
                {"cluster_id", a.cluster.id},
                {"image", k},
                {"seed", derive_seed(opts.seed, keep[r], k)},
                {"rows", opts.rows},
                {"cells", a.cluster.cells()},
                {"cell_order", "k-major"},
                {"bit_order", "first cell most significant"},
                {"sort", "ascending"},
                {"feature", std::vector<double>(feats[r].data(), feats[r].data() + kFeatureLength)}};
            write(fs::path(dir) / "images" / (name + ".json"), side.dump(2));
            h = fnv1a(pbm, h);
            ++sum.images;
        }
    }
    sum.items = n;
    sum.hash = hex64(h);

    nlohmann::json blocks = nlohmann::json::array();
    for (const FeatureBlock& b : feature_blocks(artifacts[keep[0]].instance.dims()))
        blocks.push_back({{"name", b.name}, {"length", b.length}});
    nlohmann::json man = {
        {"items", n},
        {"images", sum.images},
        {"images_per_item", opts.images_per_item},
        {"rows", opts.rows},
        {"cells", artifacts[keep[0]].cluster.cells()},
        {"seed", opts.seed},
        {"weighting", opts.weighting == Weighting::Uniform ? "uniform" : "probability"},
        {"sort", "ascending"},
        {"cell_order", "k-major"},
        {"bit_order", "first cell most significant"},
        {"feature_length", kFeatureLength},
        {"feature_blocks", blocks},
        {"item_ids", ids},
        {"skipped", skipped},
        {"normalization", sum.model.to_json()},
        {"hash", sum.hash}};
    write(fs::path(dir) / "manifest.json", man.dump(2));
    return sum;
}

}  // namespace greencap
