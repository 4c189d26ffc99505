#pragma once

// LiDAR wall perception: voxel downsample, planar z-voting ground removal,
// Euclidean clustering, wall-cluster selection and polynomial wall fit.

#include "resnav/core.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace resnav::perception
{

struct PointCloud
{
    std::vector<Point3> points;
    double stamp = 0.0;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

struct GridIndex
{
    std::int64_t u = 0;
    std::int64_t v = 0;

    friend bool operator==(const GridIndex &, const GridIndex &) = default;
};

struct GridIndexHash
{
    std::size_t operator()(const GridIndex &g) const noexcept
    {
        // splitmix-style mixing of the packed pair
        std::uint64_t h = static_cast<std::uint64_t>(g.u) * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(g.v);
        h ^= h >> 31;
        h *= 0xBF58476D1CE4E5B9ULL;
        h ^= h >> 27;
        return static_cast<std::size_t>(h);
    }
};

struct CellVote
{
    std::size_t count = 0;
    std::vector<std::size_t> point_indices;
};

struct VoteGrid
{
    double cell_size = 0.4;
    std::size_t point_count = 0; // size of the cloud the grid was built from
    std::unordered_map<GridIndex, CellVote, GridIndexHash> cells;

    GridIndex index_of(const Point3 &p) const;
};

struct Cluster
{
    std::vector<std::size_t> point_indices; // ascending
    Point3 centroid;
    double length = 0.0; // max pairwise xy distance
};

enum class WallSide
{
    Left,
    Right,
};

struct WallModel
{
    std::vector<double> coeffs; // y(x) = sum coeffs[i] x^i, body frame
    double d_w = 0.0;           // y(0), signed
    std::size_t support = 0;
    double residual_rms = 0.0;
    WallSide side = WallSide::Right;

    std::size_t order() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
    double eval(double x) const;
    double slope(double x) const;
    bool valid() const { return !coeffs.empty() && support >= coeffs.size(); }
};

struct Downsampled
{
    PointCloud cloud;
    std::vector<std::vector<std::size_t>> members; // input indices per output point
};

/// Voxel-grid downsample keeping the membership of each output point.
/// Output order follows the first occurrence of each voxel in the input.
Downsampled voxel_downsample_indexed(const PointCloud &c, double leaf);
PointCloud voxel_downsample(const PointCloud &c, double leaf);

VoteGrid grid_vote(const PointCloud &c, double cell);

struct GroundSplit
{
    PointCloud ground;
    PointCloud vertical;
    std::vector<std::size_t> ground_indices;
    std::vector<std::size_t> vertical_indices;
};

/// Cells with at least `min_count` votes are vertical structure, the rest is
/// ground.
GroundSplit filter_ground(const PointCloud &c, const VoteGrid &g, std::size_t min_count);

/// Exact single-linkage clustering in 3-D: points connected by a chain of
/// hops no longer than `tol` share a cluster. Clusters are ordered by their
/// smallest member index.
std::vector<Cluster> cluster(const PointCloud &c, double tol, std::size_t min_size);

/// Longest cluster whose centroid lies on `side`; ties go to the lower index.
/// Throws Error when no cluster is on that side.
std::size_t select_wall(const std::vector<Cluster> &cs, WallSide side);

/// Least-squares polynomial y(x) over the cluster members (z ignored).
WallModel fit_wall(const Cluster &w, const PointCloud &c, int order);

struct CropBox
{
    double x_min = -10.0;
    double x_max = 120.0;
    double y_abs_max = 40.0;
};

PointCloud crop(const PointCloud &c, const CropBox &box);

struct PipelineParams
{
    double voxel_leaf = 0.2;
    double cell_size = 0.4;
    std::size_t min_count = 5;
    double cluster_tol = 1.0;
    std::size_t min_cluster_size = 10;
    int order = 2;
    WallSide side = WallSide::Right;
    CropBox crop;

    void validate() const;
};

/// crop -> voxel -> vote -> ground filter -> cluster -> select -> fit.
/// Throws Error when no wall is found on the configured side.
WallModel detect_wall(const PointCloud &raw, const PipelineParams &p);

// Text fixture format: one "x y z" per line, '#' starts a comment.
void write_cloud(std::ostream &os, const PointCloud &c);
PointCloud read_cloud(std::istream &is);

} // namespace resnav::perception
