#pragma once

#include "greencap/climate.hpp"
#include "greencap/instance.hpp"
#include "greencap/solverbridge.hpp"

#include <cstdint>
#include <random>

namespace greencap::testing {

// Random valid instance with the given set sizes. Every capacity type can make every product.
Instance tiny_instance(std::uint64_t seed, int I = 1, int J = 1, int K = 1, int T = 2);

// Random cluster with xi_lo <= gamma_lo <= gamma_hi <= xi_hi.
ClusterSpec tiny_cluster(const Instance& inst, std::uint64_t seed, double q = 1.0);

// Plan that keeps XO/XN lines at random small counts and builds PV at random factories.
// Only the blocks the recourse reads are guaranteed meaningful.
FirstStageDecision tiny_plan(const Instance& inst, std::uint64_t seed);

// Plan respecting every first-stage rule: initial lines held, PV everywhere.
FirstStageDecision generous_plan(const Instance& inst);

// Three old and two green lines everywhere plus PV at every factory. Only the blocks the
// recourse reads are meaningful; feasible for tiny_cluster boxes.
FirstStageDecision ample_plan(const Instance& inst);

double uniform(std::mt19937_64& rng, double lo, double hi);

// Single MILP for the whole DRO problem: every box corner of every cluster gets its own
// recourse block written from the natural constraint list, and the worst-case expectation
// enters through its LP dual. Exact when every corner is reachable by some distribution
// in the moment window. Requires K*T small.
struct MonolithResult {
    SolveStatus status = SolveStatus::Error;
    double objective = 0.0;
    FirstStageDecision x;
};
MonolithResult solve_monolith(const Instance& inst, const std::vector<ClusterSpec>& clusters);

}  // namespace greencap::testing
