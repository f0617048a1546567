#include "greencap/warmstart.hpp"

#include <httplib.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace greencap {

namespace fs = std::filesystem;

namespace {

void warn(GeneratedBatch& b, std::ostream* log, std::mutex* mu, const std::string& msg) {
    b.warnings.push_back(msg);
    if (!log) return;
    std::unique_lock<std::mutex> lock;
    if (mu) lock = std::unique_lock<std::mutex>(*mu);
    *log << "warning: " << msg << '\n';
}

void keep_if_valid(GeneratedBatch& b, ScenarioImage img, const ClusterSpec& cl,
                   const std::string& what, std::ostream* log) {
    if (img.cols() != cl.cells()) {
        warn(b, log, nullptr,
             what + ": " + std::to_string(img.cols()) + " columns, expected " + std::to_string(cl.cells()));
        return;
    }
    b.images.push_back(std::move(img));
}

}  // namespace

GeneratedBatch load_batch(const std::string& dir, const ClusterSpec& cluster, std::ostream* log) {
    GeneratedBatch b;
    b.cluster_id = cluster.id;
    b.provenance = "file:" + dir;
    fs::path root(dir);
    if (fs::is_directory(root / "images")) root /= "images";
    std::vector<fs::path> files;
    std::error_code ec;
    if (fs::is_directory(root, ec))
        for (const auto& e : fs::directory_iterator(root, ec))
            if (e.path().extension() == ".pbm") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& p : files) {
        fs::path side = p;
        side.replace_extension(".json");
        if (fs::exists(side)) {
            try {
                std::ifstream f(side);
                nlohmann::json j = nlohmann::json::parse(f);
                if (j.contains("cluster_id") && j["cluster_id"].get<int>() != cluster.id) continue;
                if (b.feature.size() == 0 && j.contains("feature")) {
                    auto v = j["feature"].get<std::vector<double>>();
                    b.feature = Eigen::Map<VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
                }
            } catch (const std::exception& e) {
                warn(b, log, nullptr, p.filename().string() + ": bad sidecar (" + e.what() + ")");
                continue;
            }
        }
        try {
            keep_if_valid(b, read_pbm_file(p.string()), cluster, p.filename().string(), log);
        } catch (const CodecError& e) {
            warn(b, log, nullptr, p.filename().string() + ": " + e.what());
        }
    }
    if (b.images.empty())
        throw WarmstartError(WarmstartError::Kind::NoValidImages, "no valid images in " + dir);
    return b;
}

GeneratedBatch parse_reply(const std::string& body, const std::string& content_type,
                           const ClusterSpec& cluster) {
    GeneratedBatch b;
    b.cluster_id = cluster.id;
    auto parse_one = [&](const std::string& text, const std::string& what) {
        std::istringstream is(text);
        try {
            keep_if_valid(b, read_pbm(is), cluster, what, nullptr);
        } catch (const CodecError& e) {
            warn(b, nullptr, nullptr, what + ": " + e.what());
        }
    };
    if (content_type.find("json") == std::string::npos) {
        parse_one(body, "reply");
    } else {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const std::exception& e) {
            throw WarmstartError(WarmstartError::Kind::Format, std::string("reply is not JSON: ") + e.what());
        }
        if (j.contains("pbm")) parse_one(j["pbm"].get<std::string>(), "reply");
        if (j.contains("images"))
            for (std::size_t k = 0; k < j["images"].size(); ++k)
                parse_one(j["images"][k].get<std::string>(), "reply image " + std::to_string(k));
        if (j.contains("metadata") && j["metadata"].contains("checkpoint"))
            b.provenance = j["metadata"]["checkpoint"].dump();
    }
    if (b.images.empty())
        throw WarmstartError(WarmstartError::Kind::NoValidImages, "reply holds no valid images");
    return b;
}

std::vector<Scenario> to_initial_columns(const GeneratedBatch& batch, const ClusterSpec& cluster) {
    std::vector<Scenario> cols;
    auto add = [&](const Scenario& xi) {
        if (std::find(cols.begin(), cols.end(), xi) == cols.end()) cols.push_back(xi);
    };
    for (const ScenarioImage& img : batch.images)
        for (const Scenario& xi : decode_image(img, cluster)) add(xi);
    for (const Scenario& xi : default_columns(cluster)) add(xi);
    add(cluster.gamma_mid().cwiseMax(cluster.xi_lo).cwiseMin(cluster.xi_hi));
    return cols;
}

SurrogateBound surrogate_bound(const Instance& inst, const ClusterSpec& cluster,
                               const FirstStageDecision& x, const std::vector<Scenario>& columns) {
    if (columns.empty()) throw InputError("surrogate bound needs at least one column");
    RecourseSolver rs(inst, cluster, x);
    RestrictedValue rv = restricted_wesp(rs, cluster, columns, WespMode::Optimality);
    SurrogateBound out;
    if (!rv.feasible) return out;
    out.value = rv.eta;
    out.distribution = rv.distribution;
    out.tight = check_tightness(rv.distribution, rv.values, cluster).has_value();
    return out;
}

FileDropProvider::FileDropProvider(std::string dir, std::ostream* log)
    : dir_(std::move(dir)), log_(log) {}

std::vector<Scenario> FileDropProvider::propose(const Instance&, const ClusterSpec& cluster,
                                                const FirstStageDecision&, WespMode) {
    fs::path p = fs::path(dir_) / ("cluster_" + std::to_string(cluster.id));
    if (!fs::is_directory(p)) p = dir_;
    try {
        GeneratedBatch b = load_batch(p.string(), cluster);
        if (log_) {
            std::lock_guard<std::mutex> lock(mu_);
            for (const auto& w : b.warnings) *log_ << "warning: " << w << '\n';
        }
        std::vector<Scenario> out;
        for (const ScenarioImage& img : b.images)
            for (const Scenario& xi : decode_image(img, cluster))
                if (std::find(out.begin(), out.end(), xi) == out.end()) out.push_back(xi);
        return out;
    } catch (const WarmstartError& e) {
        if (log_) {
            std::lock_guard<std::mutex> lock(mu_);
            *log_ << "warning: cluster " << cluster.id << ": " << e.what() << '\n';
        }
        return {};
    }
}

HttpProvider::HttpProvider(std::string url, FeatureModel model, std::ostream* log,
                           double timeout_seconds)
    : model_(std::move(model)), log_(log), timeout_(timeout_seconds) {
    const auto scheme = url.find("://");
    const auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    host_ = slash == std::string::npos ? url : url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : url.substr(slash);
    if (scheme == std::string::npos) host_ = "http://" + host_;
}

GeneratedBatch HttpProvider::request(const VectorXd& feature, const ClusterSpec& cluster,
                                     WespMode mode) {
    httplib::Client cli(host_);
    const auto secs = static_cast<time_t>(timeout_);
    const auto usecs = static_cast<time_t>((timeout_ - static_cast<double>(secs)) * 1e6);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    nlohmann::json req = {{"cluster_id", cluster.id},
                          {"feature", std::vector<double>(feature.data(), feature.data() + feature.size())},
                          {"mode", to_string(mode)}};
    auto res = cli.Post(path_, req.dump(), "application/json");
    if (!res)
        throw WarmstartError(WarmstartError::Kind::Transport,
                             host_ + path_ + ": " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw WarmstartError(WarmstartError::Kind::Transport,
                             host_ + path_ + ": HTTP " + std::to_string(res->status));
    GeneratedBatch b = parse_reply(res->body, res->get_header_value("Content-Type"), cluster);
    b.feature = feature;
    if (b.provenance.empty()) b.provenance = "http:" + host_ + path_;
    return b;
}

std::vector<Scenario> HttpProvider::propose(const Instance& inst, const ClusterSpec& cluster,
                                            const FirstStageDecision& x, WespMode mode) {
    try {
        GeneratedBatch b = request(build_feature(x, inst, cluster, model_), cluster, mode);
        std::vector<Scenario> out;
        for (const ScenarioImage& img : b.images)
            for (const Scenario& xi : decode_image(img, cluster))
                if (std::find(out.begin(), out.end(), xi) == out.end()) out.push_back(xi);
        return out;
    } catch (const std::exception& e) {
        if (log_) {
            std::lock_guard<std::mutex> lock(mu_);
            *log_ << "warning: cluster " << cluster.id << ": " << e.what() << '\n';
        }
        return {};
    }
}

}  // namespace greencap
