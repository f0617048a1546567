#pragma once

#include "greencap/ccg.hpp"
#include "greencap/codec.hpp"

#include <iosfwd>
#include <mutex>

namespace greencap {

struct GeneratedBatch {
    int cluster_id = 0;
    VectorXd feature;
    std::vector<ScenarioImage> images;
    std::string provenance;  // "file:<dir>", "http:<url>" or a checkpoint id
    std::vector<std::string> warnings;
};

class WarmstartError : public std::runtime_error {
public:
    enum class Kind { NoValidImages, Transport, Format };
    WarmstartError(Kind k, const std::string& what) : std::runtime_error(what), kind_(k) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Reads every .pbm under dir (or dir/images) in name order. A sidecar .json naming another
// cluster id excludes the image; malformed images are dropped with a warning.
GeneratedBatch load_batch(const std::string& dir, const ClusterSpec& cluster,
                          std::ostream* log = nullptr);

// Parses an HTTP reply: either a raw P1 body or JSON {"images": [pbm, ...], "metadata": {...}}.
GeneratedBatch parse_reply(const std::string& body, const std::string& content_type,
                           const ClusterSpec& cluster);

// Decoded distinct corners followed by the missing default seeds and the moment midpoint.
std::vector<Scenario> to_initial_columns(const GeneratedBatch& batch, const ClusterSpec& cluster);

struct SurrogateBound {
    double value = -kInf;  // -inf when the columns cannot meet the moment window
    bool tight = false;
    DiscreteDistribution distribution;
};

// Restricted optimality master over the given columns: never above the WESP value.
SurrogateBound surrogate_bound(const Instance& inst, const ClusterSpec& cluster,
                               const FirstStageDecision& x, const std::vector<Scenario>& columns);

// Polls dir/cluster_<id> (or dir itself) for generated images on every request.
class FileDropProvider : public ScenarioProvider {
public:
    explicit FileDropProvider(std::string dir, std::ostream* log = nullptr);
    std::vector<Scenario> propose(const Instance& inst, const ClusterSpec& cluster,
                                  const FirstStageDecision& x, WespMode mode) override;

private:
    std::string dir_;
    std::ostream* log_;
    std::mutex mu_;
};

// POSTs {"cluster_id", "feature": [50 numbers], "mode"} as JSON to url and decodes the reply.
// Failures yield no proposals and a logged warning.
class HttpProvider : public ScenarioProvider {
public:
    HttpProvider(std::string url, FeatureModel model, std::ostream* log = nullptr,
                 double timeout_seconds = 10.0);
    std::vector<Scenario> propose(const Instance& inst, const ClusterSpec& cluster,
                                  const FirstStageDecision& x, WespMode mode) override;
    GeneratedBatch request(const VectorXd& feature, const ClusterSpec& cluster, WespMode mode);

private:
    std::string host_, path_;
    FeatureModel model_;
    std::ostream* log_;
    double timeout_;
    std::mutex mu_;
};

}  // namespace greencap
