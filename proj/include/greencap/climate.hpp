#pragma once

#include "greencap/instance.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace greencap {

struct ClimateRecord {
    int year = 0;
    int quarter = 0;
    std::string region;
    double hours = 0.0;
};

std::vector<ClimateRecord> load_climate_csv(const std::string& path);

struct ClimateTable {
    std::vector<std::string> regions;            // sorted labels
    std::vector<std::pair<int, int>> periods;    // (year, quarter), sorted
    MatrixXd hours;                              // periods x regions
};

ClimateTable tabulate(const std::vector<ClimateRecord>& records);

// One row per period: region hours, cross-region mean, cross-region range.
MatrixXd augment_features(const std::vector<ClimateRecord>& records);
MatrixXd augment_features(const ClimateTable& table);

struct KMeansResult {
    VectorXi assignment;
    MatrixXd centroids;              // S x features
    double wcss = 0.0;
    int iterations = 0;
    std::vector<double> wcss_trace;  // per Lloyd iteration of the winning restart
};

struct KMeansOptions {
    int restarts = 100;
    int max_iterations = 300;
};

KMeansResult kmeans(const MatrixXd& features, int S, std::uint64_t seed,
                    const KMeansOptions& opts = {});

// Linear interpolation between order statistics, p in [0,100].
double percentile(std::vector<double> values, double p);

// Demand cells use k-major order: cell(k, t) = k*T + t.
struct ClusterSpec {
    int id = 0;
    double q = 1.0;
    int K = 0, T = 0;
    MatrixXd omega;  // I x T, peak sunshine hours per factory-period
    VectorXd xi_lo, xi_hi, gamma_lo, gamma_hi;

    int cells() const { return K * T; }
    int cell(int k, int t) const { return k * T + t; }
    VectorXd lower_corner() const { return xi_lo; }
    VectorXd upper_corner() const { return xi_hi; }
    VectorXd gamma_mid() const;
    bool operator==(const ClusterSpec& o) const;
};

std::vector<std::string> validate(const ClusterSpec& c, double tol = 1e-9);

// samples[s] holds one demand vector per row (cells columns) for cluster s.
std::vector<ClusterSpec> build_ambiguity(const VectorXi& assignment,
                                         const std::vector<MatrixXd>& samples, int K, int T,
                                         double scale);

struct DemandModel {
    int samples_per_member = 20;
    double mix_uniform = 0.5;
    double uniform_halfwidth = 0.20;
    double gaussian_sigma = 0.10;
};

// Demand draws for each cluster member period, scaled by the member's regional irradiance
// relative to the historical mean and perturbed by a uniform/Gaussian mixture.
std::vector<MatrixXd> generate_demand_samples(const Instance& inst, const ClimateTable& table,
                                              const VectorXi& assignment, int S,
                                              std::uint64_t seed, const DemandModel& dm = {});

struct ClusterSet {
    std::vector<ClusterSpec> clusters;
    KMeansResult kmeans;
    std::vector<std::string> regions;
};

ClusterSet build_clusters(const Instance& inst, const std::vector<ClimateRecord>& records,
                          int S, std::uint64_t seed, const DemandModel& dm = {});

nlohmann::json to_json(const std::vector<ClusterSpec>& clusters);
std::vector<ClusterSpec> clusters_from_json(const nlohmann::json& j);
std::vector<ClusterSpec> load_clusters(const std::string& path);
void save_clusters(const std::vector<ClusterSpec>& clusters, const std::string& path);

class ClimateError : public std::runtime_error {
public:
    enum class Kind { MissingRegion, DegenerateInput, InsufficientSamples, BadInput };
    ClimateError(Kind k, const std::string& what) : std::runtime_error(what), kind_(k) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

}  // namespace greencap
