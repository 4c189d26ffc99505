#pragma once

// Slow reference implementations used by the test and acceptance suites.
// Written separately from the production code paths they check.

#include "resnav/fusion.hpp"
#include "resnav/perception.hpp"
#include "resnav/planner.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace resnav::testing
{

/// O(n^2) single linkage: every pair within `tol` (inclusive) is joined.
/// Groups are returned with sorted members, ordered by smallest member, and
/// groups smaller than `min_size` are dropped.
std::vector<std::vector<std::size_t>> brute_force_clusters(const perception::PointCloud &c, double tol,
                                                           std::size_t min_size);

struct EnumeratedPath
{
    std::vector<std::size_t> indices; // offset index per layer of the window
    double cost = planner::kInfeasible;
};

/// Every edge-connected index sequence over `horizon` layers from `start`,
/// scored from scratch. The winner is the cheapest (1e-9 relative ties),
/// then the smallest sum of |offset|, then the lexicographically smallest
/// index sequence. Returns an infinite cost when nothing is feasible.
EnumeratedPath enumerate_best_path(const planner::RoadGraph &g, planner::NodeRef start,
                                   std::span<const planner::Obstacle> obstacles, const planner::CostParams &p,
                                   std::size_t horizon);

struct GateCase
{
    std::vector<double> distances;
    fusion::GateKind expected;
    std::vector<std::size_t> expected_sources; // WeightedFuse subset or the single source
    std::vector<double> expected_weights;      // WeightedFuse only
};

/// Hand-written decision table for epsilon = 0.2, delta = 5.0.
std::vector<GateCase> gate_table();

/// Radius of the circle traced by a constant steer.
double turning_radius(double wheelbase, double steer);

/// Evaluates sum c_i x^i.
double polyval(std::span<const double> coeffs, double x);

} // namespace resnav::testing
