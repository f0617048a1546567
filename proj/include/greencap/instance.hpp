#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace greencap {

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;
using Eigen::VectorXi;

struct Dims {
    int I = 0, J = 0, K = 0, T = 0;
    int ij() const { return I * J; }
    int ijt() const { return I * J * T; }
    int ijkt() const { return I * J * K * T; }
    int kt() const { return K * T; }
    int it() const { return I * T; }
};

// Deterministic model data. Monetary fields keep the units they are entered in:
// line/PV costs in `currency_unit`, production and shortage costs per single product.
// Demand and throughputs are in `product_unit` products.
struct Instance {
    std::string name = "instance";
    std::vector<std::string> factories, capacities, products;
    int periods = 1;

    double currency_unit = 1e6;
    double product_unit = 1e4;

    MatrixXd expand_cost, terminate_cost, upgrade_cost;  // I x J
    MatrixXi max_expand, max_terminate;                   // I x J
    MatrixXi initial_lines, initial_green;                // I x J
    VectorXd renewable_cost;                              // I
    VectorXd pv_capacity;                                 // I, kW

    MatrixXi eligible;                      // J x K, 0/1
    MatrixXd util_old, util_green, energy;  // J x K; energy in kWh/product
    VectorXd throughput_old, throughput_green;  // J

    std::vector<double> cost_old, cost_green;  // I*J*K, index (i*J + j)*K + k
    VectorXd shortage_cost;                    // K

    double tau = 0.0;
    double lambda = 0.0;
    std::optional<int> big_m;  // M0; defaults to max(x_hat + T f+)
    double ambiguity_scale = 1.0;

    // Nominal demand per (region, product, period); region r hosts factory r. Optional.
    std::vector<std::string> regions;
    MatrixXd nominal_demand;  // rows r*K + k, cols t

    Dims dims() const {
        return {static_cast<int>(factories.size()), static_cast<int>(capacities.size()),
                static_cast<int>(products.size()), periods};
    }
    int ijk(int i, int j, int k) const { return (i * static_cast<int>(capacities.size()) + j) *
                                                static_cast<int>(products.size()) + k; }
    int m0() const;
    // Eligibility-scaled production bound per line.
    double line_bound(int j, int k) const;
    // Production/shortage cost in model units (currency_unit per product_unit products).
    double unit_scale() const { return product_unit / currency_unit; }

    bool operator==(const Instance& o) const;
};

struct Violation {
    std::string field;
    std::vector<int> indices;
    std::string rule;
};

std::vector<Violation> validate(const Instance& inst);

// Flattened first-stage decision, block order X, X+, X-, XO, XN, XN+ (each I*J*T,
// index (i*J + j)*T + t) followed by XBR (I).
struct FirstStageDecision {
    Dims d;
    VectorXi X, Xp, Xm, XO, XN, XNp, XBR;

    FirstStageDecision() = default;
    explicit FirstStageDecision(const Dims& dims);

    int idx(int i, int j, int t) const { return (i * d.J + j) * d.T + t; }
    int size() const { return 6 * d.ijt() + d.I; }
    VectorXd to_vector() const;
    static FirstStageDecision from_vector(const Dims& dims, const VectorXd& v);
    bool operator==(const FirstStageDecision& o) const;
};

struct FirstStageLayout {
    Dims d;
    int X() const { return 0; }
    int Xp() const { return d.ijt(); }
    int Xm() const { return 2 * d.ijt(); }
    int XO() const { return 3 * d.ijt(); }
    int XN() const { return 4 * d.ijt(); }
    int XNp() const { return 5 * d.ijt(); }
    int XBR() const { return 6 * d.ijt(); }
    int size() const { return 6 * d.ijt() + d.I; }
    int at(int block, int i, int j, int t) const { return block + (i * d.J + j) * d.T + t; }
};

// Initial configuration held for the whole horizon, no upgrades or PV.
FirstStageDecision hold_initial(const Instance& inst);

std::vector<Violation> check_decision(const Instance& inst, const FirstStageDecision& x);

class InvalidDecision : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StrategicCost {
    double adjustment = 0.0;
    double upgrade = 0.0;
    double renewable = 0.0;
    double total() const { return adjustment + upgrade + renewable; }
};

StrategicCost strategic_breakdown(const Instance& inst, const FirstStageDecision& x);
double strategic_cost(const Instance& inst, const FirstStageDecision& x);
// Cost vector C_X matching FirstStageDecision::to_vector().
VectorXd first_stage_costs(const Instance& inst);

struct PerturbRanges {
    double cost_lo = 0.8, cost_hi = 1.2;
    double tau_lo = 0.01, tau_hi = 0.20;
    double scale_lo = 1.0, scale_hi = 4.0;
};

Instance perturb(const Instance& base, std::uint64_t seed, const PerturbRanges& r = {});

nlohmann::json to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);
Instance load_instance(const std::string& path);
void save_instance(const Instance& inst, const std::string& path);

nlohmann::json to_json(const FirstStageDecision& x, const Instance& inst);
FirstStageDecision decision_from_json(const nlohmann::json& j, const Instance& inst);

// Three-factory case study configuration.
Instance base_case();

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 1469598103934665603ULL);
std::string hex64(std::uint64_t v);

}  // namespace greencap
