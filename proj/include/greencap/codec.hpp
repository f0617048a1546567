#pragma once

#include "greencap/wesp.hpp"

#include <iosfwd>

namespace greencap {

// One bit per demand cell in k-major order; 1 means the cell sits at its upper bound.
using LabelVector = Eigen::Matrix<std::uint8_t, 1, Eigen::Dynamic>;
// Rows are label vectors sorted ascending as integers with the first cell most significant.
using ScenarioImage = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class CodecError : public std::runtime_error {
public:
    enum class Kind { NonBoundary, DimensionMismatch, UnfittedModel, Io, Format };
    CodecError(Kind k, const std::string& what) : std::runtime_error(what), kind_(k) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Degenerate cells (lo == hi) encode as 0.
LabelVector encode_scenario(const Scenario& xi, const ClusterSpec& cluster, double tol = 1e-9);
Scenario decode_label(const LabelVector& bits, const ClusterSpec& cluster);
// Integer value of a label, first cell most significant. At most 64 cells.
std::uint64_t label_value(const LabelVector& bits);

enum class Weighting { Uniform, Probability };

ScenarioImage sample_image(const DiscreteDistribution& dist, const ClusterSpec& cluster,
                           int rows = 50, Weighting w = Weighting::Uniform,
                           std::uint64_t seed = 0);
bool rows_sorted(const ScenarioImage& img);
// Distinct rows decoded in row order.
std::vector<Scenario> decode_image(const ScenarioImage& img, const ClusterSpec& cluster);

// ASCII P1 bitmap, one image row per line.
void write_pbm(std::ostream& out, const ScenarioImage& img);
ScenarioImage read_pbm(std::istream& in);
ScenarioImage read_pbm_file(const std::string& path);
std::string to_pbm(const ScenarioImage& img);

// Raw feature blocks, in this order.
struct FeatureBlock {
    std::string name;
    int length = 0;
};
std::vector<FeatureBlock> feature_blocks(const Dims& d);
VectorXd raw_features(const FirstStageDecision& x, const Instance& inst, const ClusterSpec& cluster);

constexpr int kFeatureLength = 50;

// z-score normalisation then PCA keeping 99% of variance, resized to kFeatureLength.
struct FeatureModel {
    VectorXd mean, scale;  // scale 0 marks a constant coordinate
    MatrixXd components;   // raw x k, columns by decreasing variance
    VectorXd explained;    // variance ratio per kept component
    int needed = 0;        // components needed for the variance target before truncation
    bool fitted = false;

    // rows = corpus items
    static FeatureModel fit(const MatrixXd& corpus, double variance = 0.99);
    VectorXd project(const VectorXd& raw) const;
    nlohmann::json to_json() const;
    static FeatureModel from_json(const nlohmann::json& j);
};

VectorXd build_feature(const FirstStageDecision& x, const Instance& inst,
                       const ClusterSpec& cluster, const FeatureModel& model);

// One solved cluster subproblem: the plan and the worst-case support found there.
struct Artifact {
    std::string id;
    Instance instance;
    FirstStageDecision x;
    ClusterSpec cluster;
    DiscreteDistribution distribution;
};

struct DatasetOptions {
    int images_per_item = 12;
    int rows = 50;
    Weighting weighting = Weighting::Uniform;
    std::uint64_t seed = 0;
    int threads = 0;
    const FeatureModel* model = nullptr;  // fitted on the artifacts when null
    std::ostream* log = nullptr;
};

struct DatasetSummary {
    int items = 0, images = 0, skipped = 0;
    std::string hash;
    FeatureModel model;
};

// Writes features.csv, images/<item>_<n>.pbm with .json sidecars, and manifest.json.
DatasetSummary emit_dataset(const std::vector<Artifact>& artifacts, const std::string& dir,
                            const DatasetOptions& opts = {});

// Seed for image n of item i under a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t item, std::uint64_t n);

}  // namespace greencap
