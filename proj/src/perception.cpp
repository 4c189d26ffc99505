#include "resnav/perception.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace resnav::perception
{

namespace
{

struct VoxelIndex
{
    std::int64_t i, j, k;
    friend bool operator==(const VoxelIndex &, const VoxelIndex &) = default;
};

struct VoxelIndexHash
{
    std::size_t operator()(const VoxelIndex &v) const noexcept
    {
        std::uint64_t h = static_cast<std::uint64_t>(v.i) * 0x9E3779B97F4A7C15ULL;
        h ^= static_cast<std::uint64_t>(v.j) * 0xC2B2AE3D27D4EB4FULL;
        h ^= static_cast<std::uint64_t>(v.k) * 0x165667B19E3779F9ULL;
        h ^= h >> 29;
        return static_cast<std::size_t>(h);
    }
};

std::int64_t quantize(double v, double step) { return static_cast<std::int64_t>(std::floor(v / step)); }

void require_finite(const PointCloud &c, const char *op)
{
    for (const auto &p : c.points)
        if (!is_finite(p))
            throw InvalidArgument(std::string(op) + ": cloud contains a non-finite point");
}

class DisjointSet
{
  public:
    explicit DisjointSet(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t a)
    {
        while (parent_[a] != a)
        {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }

    void unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b)
            return;
        if (rank_[a] < rank_[b])
            std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b])
            ++rank_[a];
    }

  private:
    std::vector<std::size_t> parent_;
    std::vector<unsigned char> rank_;
};

double cross(const Eigen::Vector2d &o, const Eigen::Vector2d &a, const Eigen::Vector2d &b)
{
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Max pairwise xy distance via the convex hull (monotone chain).
double planar_extent(const PointCloud &c, const std::vector<std::size_t> &idx)
{
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(idx.size());
    for (auto i : idx)
        pts.emplace_back(c.points[i].x, c.points[i].y);
    std::sort(pts.begin(), pts.end(),
              [](const auto &a, const auto &b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 2)
        return 0.0;

    std::vector<Eigen::Vector2d> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto &p : pts)
    {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0)
            --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lo = k + 1; i-- > 0;)
    {
        while (k >= lo && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0)
            --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);

    double best = 0.0;
    for (std::size_t a = 0; a < hull.size(); ++a)
        for (std::size_t b = a + 1; b < hull.size(); ++b)
            best = std::max(best, (hull[a] - hull[b]).squaredNorm());
    return std::sqrt(best);
}

} // namespace

GridIndex VoteGrid::index_of(const Point3 &p) const { return {quantize(p.x, cell_size), quantize(p.y, cell_size)}; }

double WallModel::eval(double x) const
{
    double y = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
        y = y * x + *it;
    return y;
}

double WallModel::slope(double x) const
{
    double d = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 1;)
        d = d * x + static_cast<double>(i) * coeffs[i];
    return d;
}

Downsampled voxel_downsample_indexed(const PointCloud &c, double leaf)
{
    if (!(leaf > 0.0) || !std::isfinite(leaf))
        throw InvalidArgument("voxel_downsample: leaf must be positive");
    require_finite(c, "voxel_downsample");

    std::unordered_map<VoxelIndex, std::size_t, VoxelIndexHash> slot;
    slot.reserve(c.size());
    Downsampled out;
    out.cloud.stamp = c.stamp;
    for (std::size_t i = 0; i < c.size(); ++i)
    {
        const auto &p = c.points[i];
        const VoxelIndex v{quantize(p.x, leaf), quantize(p.y, leaf), quantize(p.z, leaf)};
        auto [it, inserted] = slot.try_emplace(v, out.members.size());
        if (inserted)
            out.members.emplace_back();
        out.members[it->second].push_back(i);
    }
    out.cloud.points.reserve(out.members.size());
    for (const auto &m : out.members)
    {
        Point3 acc;
        for (auto i : m)
        {
            acc.x += c.points[i].x;
            acc.y += c.points[i].y;
            acc.z += c.points[i].z;
        }
        const double n = static_cast<double>(m.size());
        out.cloud.points.push_back({acc.x / n, acc.y / n, acc.z / n});
    }
    return out;
}

PointCloud voxel_downsample(const PointCloud &c, double leaf) { return voxel_downsample_indexed(c, leaf).cloud; }

VoteGrid grid_vote(const PointCloud &c, double cell)
{
    if (!(cell > 0.0) || !std::isfinite(cell))
        throw InvalidArgument("grid_vote: cell size must be positive");
    require_finite(c, "grid_vote");
    VoteGrid g;
    g.cell_size = cell;
    g.point_count = c.size();
    for (std::size_t i = 0; i < c.size(); ++i)
    {
        auto &vote = g.cells[g.index_of(c.points[i])];
        ++vote.count;
        vote.point_indices.push_back(i);
    }
    return g;
}

GroundSplit filter_ground(const PointCloud &c, const VoteGrid &g, std::size_t min_count)
{
    if (g.point_count != c.size())
        throw InvalidArgument("filter_ground: grid was built from a different cloud (" +
                              std::to_string(g.point_count) + " vs " + std::to_string(c.size()) + " points)");
    GroundSplit out;
    out.ground.stamp = c.stamp;
    out.vertical.stamp = c.stamp;
    for (std::size_t i = 0; i < c.size(); ++i)
    {
        const auto it = g.cells.find(g.index_of(c.points[i]));
        if (it == g.cells.end())
            throw InvalidArgument("filter_ground: point " + std::to_string(i) + " has no cell in the grid");
        if (it->second.count >= min_count)
        {
            out.vertical.points.push_back(c.points[i]);
            out.vertical_indices.push_back(i);
        }
        else
        {
            out.ground.points.push_back(c.points[i]);
            out.ground_indices.push_back(i);
        }
    }
    return out;
}

std::vector<Cluster> cluster(const PointCloud &c, double tol, std::size_t min_size)
{
    if (!(tol > 0.0) || !std::isfinite(tol))
        throw InvalidArgument("cluster: tolerance must be positive");
    require_finite(c, "cluster");

    const std::size_t n = c.size();
    std::unordered_map<VoxelIndex, std::vector<std::size_t>, VoxelIndexHash> grid;
    grid.reserve(n);
    std::vector<VoxelIndex> key(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto &p = c.points[i];
        key[i] = {quantize(p.x, tol), quantize(p.y, tol), quantize(p.z, tol)};
        grid[key[i]].push_back(i);
    }

    const double tol2 = tol * tol;
    DisjointSet ds(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto &p = c.points[i];
        for (std::int64_t di = -1; di <= 1; ++di)
            for (std::int64_t dj = -1; dj <= 1; ++dj)
                for (std::int64_t dk = -1; dk <= 1; ++dk)
                {
                    const auto it = grid.find({key[i].i + di, key[i].j + dj, key[i].k + dk});
                    if (it == grid.end())
                        continue;
                    for (auto j : it->second)
                    {
                        if (j <= i)
                            continue;
                        const auto &q = c.points[j];
                        const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
                        if (dx * dx + dy * dy + dz * dz <= tol2)
                            ds.unite(i, j);
                    }
                }
    }

    // Group by root in order of first (smallest) member.
    std::unordered_map<std::size_t, std::size_t> slot;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i)
    {
        auto [it, inserted] = slot.try_emplace(ds.find(i), groups.size());
        if (inserted)
            groups.emplace_back();
        groups[it->second].push_back(i);
    }

    std::vector<Cluster> out;
    for (auto &members : groups)
    {
        if (members.size() < min_size)
            continue;
        Cluster cl;
        Point3 acc;
        for (auto i : members)
        {
            acc.x += c.points[i].x;
            acc.y += c.points[i].y;
            acc.z += c.points[i].z;
        }
        const double m = static_cast<double>(members.size());
        cl.centroid = {acc.x / m, acc.y / m, acc.z / m};
        cl.length = planar_extent(c, members);
        cl.point_indices = std::move(members);
        out.push_back(std::move(cl));
    }
    return out;
}

std::size_t select_wall(const std::vector<Cluster> &cs, WallSide side)
{
    if (cs.empty())
        throw InvalidArgument("select_wall: no clusters");
    std::size_t best = cs.size();
    for (std::size_t i = 0; i < cs.size(); ++i)
    {
        const double y = cs[i].centroid.y;
        const bool on_side = side == WallSide::Right ? y < 0.0 : y > 0.0;
        if (!on_side)
            continue;
        if (best == cs.size() || cs[i].length > cs[best].length)
            best = i;
    }
    if (best == cs.size())
        throw Error(std::string("select_wall: no cluster on the ") + (side == WallSide::Right ? "right" : "left") +
                    " side");
    return best;
}

WallModel fit_wall(const Cluster &w, const PointCloud &c, int order)
{
    if (order < 0)
        throw InvalidArgument("fit_wall: negative order");
    const std::size_t terms = static_cast<std::size_t>(order) + 1;
    if (w.point_indices.size() < terms)
        throw InvalidArgument("fit_wall: support " + std::to_string(w.point_indices.size()) + " is below order+1");

    double scale = 0.0;
    for (auto i : w.point_indices)
    {
        if (i >= c.size())
            throw InvalidArgument("fit_wall: cluster index out of range");
        scale = std::max(scale, std::abs(c.points[i].x));
    }
    if (scale == 0.0)
        scale = 1.0;

    // Normal equations on x / scale, then undo the scaling per coefficient.
    const auto n = static_cast<Eigen::Index>(w.point_indices.size());
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(terms));
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r)
    {
        const auto &p = c.points[w.point_indices[static_cast<std::size_t>(r)]];
        const double xs = p.x / scale;
        double pw = 1.0;
        for (std::size_t t = 0; t < terms; ++t, pw *= xs)
            X(r, static_cast<Eigen::Index>(t)) = pw;
        y(r) = p.y;
    }
    const Eigen::MatrixXd XtX = X.transpose() * X;
    const Eigen::VectorXd Xty = X.transpose() * y;

    Eigen::VectorXd beta;
    try
    {
        beta = solve_spd(XtX, Xty);
    }
    catch (const NumericError &e)
    {
        throw NumericError("fit_wall: rank-deficient design matrix (" + std::string(e.what()) + ")", e.condition());
    }

    WallModel m;
    m.coeffs.resize(terms);
    double s = 1.0;
    for (std::size_t t = 0; t < terms; ++t, s *= scale)
        m.coeffs[t] = beta(static_cast<Eigen::Index>(t)) / s;
    m.support = w.point_indices.size();
    m.d_w = m.eval(0.0);
    const Eigen::VectorXd res = X * beta - y;
    m.residual_rms = std::sqrt(res.squaredNorm() / static_cast<double>(n));
    m.side = w.centroid.y < 0.0 ? WallSide::Right : WallSide::Left;
    return m;
}

PointCloud crop(const PointCloud &c, const CropBox &box)
{
    PointCloud out;
    out.stamp = c.stamp;
    for (const auto &p : c.points)
        if (p.x >= box.x_min && p.x <= box.x_max && std::abs(p.y) <= box.y_abs_max)
            out.points.push_back(p);
    return out;
}

void PipelineParams::validate() const
{
    if (!(voxel_leaf > 0.0) || !(cell_size > 0.0) || !(cluster_tol > 0.0))
        throw InvalidArgument("perception: voxel_leaf, cell_size and cluster_tol must be positive");
    if (min_count < 1)
        throw InvalidArgument("perception: min_count must be at least 1");
    if (order < 0 || order > 5)
        throw InvalidArgument("perception: polynomial order must be in [0, 5]");
    if (!(crop.x_min < crop.x_max) || !(crop.y_abs_max > 0.0))
        throw InvalidArgument("perception: empty crop box");
}

WallModel detect_wall(const PointCloud &raw, const PipelineParams &p)
{
    const PointCloud cropped = crop(raw, p.crop);
    const PointCloud voxels = voxel_downsample(cropped, p.voxel_leaf);
    const VoteGrid grid = grid_vote(voxels, p.cell_size);
    const GroundSplit split = filter_ground(voxels, grid, p.min_count);
    const auto clusters = cluster(split.vertical, p.cluster_tol, p.min_cluster_size);
    if (clusters.empty())
        throw Error("detect_wall: no vertical clusters");
    const std::size_t wall = select_wall(clusters, p.side);
    WallModel m = fit_wall(clusters[wall], split.vertical, p.order);
    m.side = p.side;
    return m;
}

void write_cloud(std::ostream &os, const PointCloud &c)
{
    os << "# x y z\n";
    os.precision(17);
    for (const auto &p : c.points)
        os << p.x << ' ' << p.y << ' ' << p.z << '\n';
}

PointCloud read_cloud(std::istream &is)
{
    PointCloud c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line))
    {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream ls(line);
        Point3 p;
        std::string extra;
        if (!(ls >> p.x >> p.y >> p.z) || (ls >> extra) || !is_finite(p))
            throw InvalidArgument("read_cloud: line " + std::to_string(lineno) + ": expected three finite numbers");
        c.points.push_back(p);
    }
    return c;
}

} // namespace resnav::perception
