#pragma once

// Frenet-lattice road graph along a racing line and layered dynamic
// programming search for obstacle avoidance.

#include "resnav/core.hpp"

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

namespace resnav::planner
{

struct LineSample
{
    double x = 0.0;
    double y = 0.0;
    double s = 0.0;
    double heading = 0.0;
    double kappa = 0.0;
};

struct Frenet
{
    double s = 0.0; // station along the line
    double n = 0.0; // signed lateral offset, positive to the left
};

struct RacingLine
{
    std::vector<LineSample> samples;
    bool closed = false; // last sample coincides with the first

    double length() const { return samples.empty() ? 0.0 : samples.back().s - samples.front().s; }

    /// Interpolated sample at station s (wrapped for closed lines, clamped
    /// otherwise).
    LineSample at(double s) const;

    /// Point displaced laterally by `offset` along the left normal at s.
    Eigen::Vector2d displaced(double s, double offset) const;

    Frenet project(double x, double y) const;

    /// Throws InvalidArgument unless s is strictly increasing and heading and
    /// curvature agree with finite differences of the samples (5% tolerance).
    void validate() const;

    /// Builds a line from xy samples, filling s, heading and kappa by finite
    /// differences.
    static RacingLine from_points(const std::vector<Eigen::Vector2d> &pts, bool closed);
};

struct Node
{
    std::size_t layer = 0;
    std::size_t index = 0; // lateral offset index
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
    double offset = 0.0;
    double kappa = 0.0; // signed curvature of the displaced path
    double d = 0.0;     // |offset|
};

struct Edge
{
    std::size_t to = 0; // offset index in the next layer
    double length = 0.0;
};

struct Layer
{
    double s = 0.0;
    std::vector<Node> nodes;
    std::vector<std::vector<Edge>> edges; // per node, into the next layer
};

struct NodeRef
{
    std::size_t layer = 0;
    std::size_t index = 0;

    friend bool operator==(const NodeRef &, const NodeRef &) = default;
};

struct RoadGraph
{
    std::vector<double> offsets;
    std::vector<Layer> layers;
    std::size_t max_jump = 1;
    double half_width = 0.0;
    double station_step = 0.0;
    bool closed = false;

    const Node &node(NodeRef r) const { return layers.at(r.layer).nodes.at(r.index); }
    std::size_t layer_count() const { return layers.size(); }
    /// Next layer index, wrapping on closed lines; layer_count() at the end of
    /// an open line.
    std::size_t next_layer(std::size_t j) const;
    std::size_t nearest_layer(double s, double line_length) const;
    std::size_t nearest_offset(double n) const;
};

RoadGraph build_road_graph(const RacingLine &line, double half_width, const std::vector<double> &lateral_offsets,
                           double station_step, std::size_t max_jump = 1);

struct Obstacle
{
    double x = 0.0;
    double y = 0.0;
    double radius = 0.0;
};

struct CostWeights
{
    double k_c = 5.0;
    double k_kappa = 50.0;
    double k_d = 1.0;
};

struct CostParams
{
    CostWeights weights;
    double rho = 15.0;           // cutoff of the proximity penalty
    double xi = 0.1;             // softening
    double safety_margin = 1.5;  // vehicle half-width + buffer

    void validate() const;
};

inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

/// Distance from (x, y) to the nearest obstacle surface, +inf without
/// obstacles.
double clearance(double x, double y, std::span<const Obstacle> obstacles);

/// Segment-to-obstacle-surface distance.
double segment_clearance(double ax, double ay, double bx, double by, std::span<const Obstacle> obstacles);

/// Proximity penalty + curvature + racing-line offset; +inf inside the hard
/// margin.
double node_cost(const Node &n, std::span<const Obstacle> obstacles, const CostParams &p);

/// Edge length, or +inf when the straight segment violates the margin.
double edge_cost(const Node &a, const Node &b, std::span<const Obstacle> obstacles, const CostParams &p);

struct PathNode
{
    NodeRef ref;
    double x = 0.0;
    double y = 0.0;
    double offset = 0.0;
};

struct PlannedPath
{
    std::vector<PathNode> nodes;
    double total_cost = 0.0;
};

class NoFeasiblePath : public Error
{
  public:
    using Error::Error;
};

/// Minimum of sum(edge length) + sum(node cost) over `horizon` layers
/// starting at `start` (start included). Equal costs (1e-9 relative) are
/// broken by smaller sum |offset|, then by the lexicographically smaller
/// offset-index sequence.
PlannedPath plan(const RoadGraph &g, NodeRef start, std::span<const Obstacle> obstacles, const CostParams &p,
                 std::size_t horizon);

std::vector<Pose2D> sample_path(const PlannedPath &p, double spacing);

// Text formats: racing line "x y s heading kappa" per line, graph export
// "layer offset_index x y kappa d" per line; '#' comments.
RacingLine read_racing_line(std::istream &is);
void write_racing_line(std::ostream &os, const RacingLine &line);
void write_graph(std::ostream &os, const RoadGraph &g);

} // namespace resnav::planner
