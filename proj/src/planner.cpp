#include "resnav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace resnav::planner
{

namespace
{

// Signed curvature of the circle through three points.
double menger_curvature(const Eigen::Vector2d &a, const Eigen::Vector2d &b, const Eigen::Vector2d &c)
{
    const Eigen::Vector2d ab = b - a, bc = c - b, ac = c - a;
    const double cr = ab.x() * bc.y() - ab.y() * bc.x();
    const double denom = ab.norm() * bc.norm() * ac.norm();
    return denom > 0.0 ? 2.0 * cr / denom : 0.0;
}

bool costs_tie(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

} // namespace

LineSample RacingLine::at(double s) const
{
    if (samples.empty())
        throw InvalidArgument("RacingLine::at: empty line");
    if (samples.size() == 1)
        return samples.front();
    const double s0 = samples.front().s;
    const double len = length();
    if (closed && len > 0.0)
    {
        s = s0 + std::fmod(s - s0, len);
        if (s < s0)
            s += len;
    }
    else
    {
        s = std::clamp(s, s0, samples.back().s);
    }
    auto it = std::upper_bound(samples.begin(), samples.end(), s,
                               [](double v, const LineSample &ls) { return v < ls.s; });
    if (it == samples.end())
        it = std::prev(samples.end());
    if (it == samples.begin())
        it = std::next(it);
    const LineSample &a = *std::prev(it);
    const LineSample &b = *it;
    const double t = (s - a.s) / (b.s - a.s);
    LineSample out;
    out.s = s;
    out.x = a.x + t * (b.x - a.x);
    out.y = a.y + t * (b.y - a.y);
    out.heading = normalize_angle(a.heading + t * normalize_angle(b.heading - a.heading));
    out.kappa = a.kappa + t * (b.kappa - a.kappa);
    return out;
}

Eigen::Vector2d RacingLine::displaced(double s, double offset) const
{
    const LineSample p = at(s);
    return {p.x - offset * std::sin(p.heading), p.y + offset * std::cos(p.heading)};
}

Frenet RacingLine::project(double x, double y) const
{
    if (samples.size() < 2)
        throw InvalidArgument("RacingLine::project: need at least two samples");
    const Eigen::Vector2d p(x, y);
    double best_d2 = std::numeric_limits<double>::infinity();
    Frenet best;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i)
    {
        const Eigen::Vector2d a(samples[i].x, samples[i].y);
        const Eigen::Vector2d b(samples[i + 1].x, samples[i + 1].y);
        const Eigen::Vector2d ab = b - a;
        const double l2 = ab.squaredNorm();
        const double t = l2 > 0.0 ? std::clamp((p - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
        const Eigen::Vector2d q = a + t * ab;
        const double d2 = (p - q).squaredNorm();
        if (d2 < best_d2)
        {
            best_d2 = d2;
            const double side = ab.x() * (p - a).y() - ab.y() * (p - a).x();
            best.s = samples[i].s + t * (samples[i + 1].s - samples[i].s);
            best.n = std::copysign(std::sqrt(d2), side);
        }
    }
    if (closed && best.s >= samples.back().s)
        best.s -= length();
    return best;
}

void RacingLine::validate() const
{
    if (samples.size() < 2)
        throw InvalidArgument("racing line: need at least two samples");
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        const auto &p = samples[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.s) || !std::isfinite(p.heading) ||
            !std::isfinite(p.kappa))
            throw InvalidArgument("racing line: sample " + std::to_string(i) + " is not finite");
    }
    for (std::size_t i = 0; i + 1 < samples.size(); ++i)
    {
        const auto &a = samples[i];
        const auto &b = samples[i + 1];
        const double ds = b.s - a.s;
        if (!(ds > 0.0))
            throw InvalidArgument("racing line: s not strictly increasing at sample " + std::to_string(i + 1));
        const double dh = normalize_angle(b.heading - a.heading);
        const double chord = std::atan2(b.y - a.y, b.x - a.x);
        const double mid = normalize_angle(a.heading + 0.5 * dh);
        if (std::abs(normalize_angle(chord - mid)) > 0.05 * std::abs(dh) + 1e-3)
            throw InvalidArgument("racing line: heading inconsistent with xy at sample " + std::to_string(i));
        const double k_fd = dh / ds;
        const double lo = std::min(a.kappa, b.kappa);
        const double hi = std::max(a.kappa, b.kappa);
        const double slack = 0.05 * std::max(std::abs(a.kappa), std::abs(b.kappa)) + 1e-6;
        if (k_fd < lo - slack || k_fd > hi + slack)
            throw InvalidArgument("racing line: curvature inconsistent with heading at sample " + std::to_string(i));
    }
}

RacingLine RacingLine::from_points(const std::vector<Eigen::Vector2d> &input, bool closed)
{
    std::vector<Eigen::Vector2d> pts = input;
    if (closed && !pts.empty())
        pts.push_back(pts.front());
    if (pts.size() < 3)
        throw InvalidArgument("RacingLine::from_points: need at least three points");
    const std::size_t n = pts.size();
    RacingLine line;
    line.closed = closed;
    line.samples.resize(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (i > 0)
            s += (pts[i] - pts[i - 1]).norm();
        line.samples[i].x = pts[i].x();
        line.samples[i].y = pts[i].y();
        line.samples[i].s = s;
    }
    auto neighbour = [&](std::size_t i, int dir) -> Eigen::Vector2d {
        if (dir < 0)
            return i > 0 ? pts[i - 1] : (closed ? pts[n - 2] : pts[i]);
        return i + 1 < n ? pts[i + 1] : (closed ? pts[1] : pts[i]);
    };
    for (std::size_t i = 0; i < n; ++i)
    {
        const Eigen::Vector2d prev = neighbour(i, -1), next = neighbour(i, +1);
        const Eigen::Vector2d d = next - prev;
        line.samples[i].heading = std::atan2(d.y(), d.x());
        const bool interior = closed || (i > 0 && i + 1 < n);
        line.samples[i].kappa = interior ? menger_curvature(prev, pts[i], next) : 0.0;
    }
    return line;
}

std::size_t RoadGraph::next_layer(std::size_t j) const
{
    if (j + 1 < layers.size())
        return j + 1;
    return closed ? 0 : layers.size();
}

std::size_t RoadGraph::nearest_layer(double s, double line_length) const
{
    if (layers.empty())
        throw InvalidArgument("RoadGraph: no layers");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < layers.size(); ++j)
    {
        double d = std::abs(layers[j].s - s);
        if (closed)
            d = std::min(d, line_length - d);
        if (d < best_d)
        {
            best_d = d;
            best = j;
        }
    }
    return best;
}

std::size_t RoadGraph::nearest_offset(double n) const
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < offsets.size(); ++i)
        if (std::abs(offsets[i] - n) < std::abs(offsets[best] - n))
            best = i;
    return best;
}

RoadGraph build_road_graph(const RacingLine &line, double half_width, const std::vector<double> &lateral_offsets,
                           double station_step, std::size_t max_jump)
{
    if (!(station_step > 0.0) || !std::isfinite(station_step))
        throw InvalidArgument("build_road_graph: station_step must be positive");
    if (!(half_width > 0.0))
        throw InvalidArgument("build_road_graph: half_width must be positive");
    if (lateral_offsets.empty())
        throw InvalidArgument("build_road_graph: no lateral offsets");
    if (!std::is_sorted(lateral_offsets.begin(), lateral_offsets.end()))
        throw InvalidArgument("build_road_graph: lateral offsets must be sorted ascending");
    for (double o : lateral_offsets)
        if (!(std::abs(o) <= half_width))
            throw InvalidArgument("build_road_graph: offset " + std::to_string(o) + " exceeds half_width " +
                                  std::to_string(half_width));
    if (line.samples.size() < 2)
        throw InvalidArgument("build_road_graph: racing line needs at least two samples");

    RoadGraph g;
    g.offsets = lateral_offsets;
    g.max_jump = max_jump;
    g.half_width = half_width;
    g.station_step = station_step;
    g.closed = line.closed;

    const double s0 = line.samples.front().s;
    const double len = line.length();
    std::vector<double> stations;
    for (std::size_t k = 0;; ++k)
    {
        const double s = s0 + static_cast<double>(k) * station_step;
        if (line.closed ? s >= s0 + len - 1e-9 : s > s0 + len + 1e-9)
            break;
        stations.push_back(s);
    }

    // Curvature of each displaced path from three nearby displaced points.
    const double h = std::min(1.0, 0.5 * station_step);
    for (std::size_t j = 0; j < stations.size(); ++j)
    {
        Layer layer;
        layer.s = stations[j];
        const LineSample base = line.at(layer.s);
        for (std::size_t i = 0; i < lateral_offsets.size(); ++i)
        {
            const double w = lateral_offsets[i];
            double sa = layer.s - h, sb = layer.s, sc = layer.s + h;
            if (!line.closed)
            {
                if (sa < s0)
                {
                    sa = s0;
                    sb = s0 + h;
                    sc = s0 + 2.0 * h;
                }
                else if (sc > s0 + len)
                {
                    sc = s0 + len;
                    sb = sc - h;
                    sa = sc - 2.0 * h;
                }
            }
            Node n;
            n.layer = j;
            n.index = i;
            const Eigen::Vector2d p = line.displaced(layer.s, w);
            n.x = p.x();
            n.y = p.y();
            n.heading = base.heading;
            n.offset = w;
            n.d = std::abs(w);
            n.kappa = menger_curvature(line.displaced(sa, w), line.displaced(sb, w), line.displaced(sc, w));
            layer.nodes.push_back(n);
        }
        g.layers.push_back(std::move(layer));
    }

    for (std::size_t j = 0; j < g.layers.size(); ++j)
    {
        auto &layer = g.layers[j];
        layer.edges.resize(layer.nodes.size());
        const std::size_t nj = g.next_layer(j);
        if (nj >= g.layers.size())
            continue;
        const auto &next = g.layers[nj];
        for (std::size_t i = 0; i < layer.nodes.size(); ++i)
            for (std::size_t k = 0; k < next.nodes.size(); ++k)
            {
                const std::size_t jump = i > k ? i - k : k - i;
                if (jump > max_jump)
                    continue;
                const double len_e =
                    std::hypot(next.nodes[k].x - layer.nodes[i].x, next.nodes[k].y - layer.nodes[i].y);
                layer.edges[i].push_back({k, len_e});
            }
    }
    return g;
}

void CostParams::validate() const
{
    if (weights.k_c < 0.0 || weights.k_kappa < 0.0 || weights.k_d < 0.0)
        throw InvalidArgument("CostWeights: weights must be non-negative");
    if (!(rho > 0.0) || !(xi > 0.0) || !(safety_margin >= 0.0))
        throw InvalidArgument("CostParams: rho and xi must be positive, safety_margin non-negative");
}

double clearance(double x, double y, std::span<const Obstacle> obstacles)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto &o : obstacles)
        best = std::min(best, std::hypot(x - o.x, y - o.y) - o.radius);
    return best;
}

double segment_clearance(double ax, double ay, double bx, double by, std::span<const Obstacle> obstacles)
{
    double best = std::numeric_limits<double>::infinity();
    const double dx = bx - ax, dy = by - ay;
    const double l2 = dx * dx + dy * dy;
    for (const auto &o : obstacles)
    {
        const double t = l2 > 0.0 ? std::clamp(((o.x - ax) * dx + (o.y - ay) * dy) / l2, 0.0, 1.0) : 0.0;
        best = std::min(best, std::hypot(ax + t * dx - o.x, ay + t * dy - o.y) - o.radius);
    }
    return best;
}

double node_cost(const Node &n, std::span<const Obstacle> obstacles, const CostParams &p)
{
    const double c = clearance(n.x, n.y, obstacles);
    if (c < p.safety_margin)
        return kInfeasible;
    double proximity = 0.0;
    if (std::isfinite(c))
        proximity = std::max(0.0, 1.0 / (c + p.xi) - 1.0 / p.rho);
    return p.weights.k_c * proximity + p.weights.k_kappa * std::abs(n.kappa) + p.weights.k_d * n.d;
}

double edge_cost(const Node &a, const Node &b, std::span<const Obstacle> obstacles, const CostParams &p)
{
    if (segment_clearance(a.x, a.y, b.x, b.y, obstacles) < p.safety_margin)
        return kInfeasible;
    return std::hypot(b.x - a.x, b.y - a.y);
}

PlannedPath plan(const RoadGraph &g, NodeRef start, std::span<const Obstacle> obstacles, const CostParams &p,
                 std::size_t horizon)
{
    if (start.layer >= g.layer_count() || start.index >= g.offsets.size())
        throw InvalidArgument("plan: start node is not in the graph");
    if (horizon < 2)
        throw InvalidArgument("plan: horizon must cover at least two layers");

    // Layer sequence of the search window.
    std::vector<std::size_t> window{start.layer};
    while (window.size() < horizon)
    {
        const std::size_t nj = g.next_layer(window.back());
        if (nj >= g.layer_count() || nj == start.layer)
            break;
        window.push_back(nj);
    }
    if (window.size() < 2)
        throw InvalidArgument("plan: fewer than two layers ahead of the start node");

    const std::size_t m = g.offsets.size();
    const std::size_t depth = window.size();

    struct Best
    {
        double cost = kInfeasible;
        double offsets = 0.0;
        std::size_t next = 0;
    };
    std::vector<std::vector<Best>> to_go(depth, std::vector<Best>(m));

    // Backward pass: cost-to-go includes the node's own cost.
    for (std::size_t i = 0; i < m; ++i)
    {
        const Node &n = g.layers[window.back()].nodes[i];
        to_go[depth - 1][i] = {node_cost(n, obstacles, p), n.d, m};
    }
    for (std::size_t w = depth - 1; w-- > 0;)
    {
        const Layer &layer = g.layers[window[w]];
        const Layer &next = g.layers[window[w + 1]];
        for (std::size_t i = 0; i < m; ++i)
        {
            const Node &n = layer.nodes[i];
            const double own = node_cost(n, obstacles, p);
            Best best;
            if (std::isfinite(own))
            {
                for (const Edge &e : layer.edges[i])
                {
                    const Best &succ = to_go[w + 1][e.to];
                    if (!std::isfinite(succ.cost))
                        continue;
                    const double ec = edge_cost(n, next.nodes[e.to], obstacles, p);
                    if (!std::isfinite(ec))
                        continue;
                    const double c = own + ec + succ.cost;
                    const double off = n.d + succ.offsets;
                    const bool better =
                        !std::isfinite(best.cost) || (!costs_tie(c, best.cost) && c < best.cost) ||
                        (costs_tie(c, best.cost) &&
                         (off < best.offsets - 1e-12 || (std::abs(off - best.offsets) <= 1e-12 && e.to < best.next)));
                    if (better)
                        best = {c, off, e.to};
                }
            }
            to_go[w][i] = best;
        }
    }

    const Best &root = to_go[0][start.index];
    if (!std::isfinite(root.cost))
        throw NoFeasiblePath("plan: no collision-free path from layer " + std::to_string(start.layer));

    PlannedPath out;
    out.total_cost = root.cost;
    std::size_t idx = start.index;
    for (std::size_t w = 0; w < depth; ++w)
    {
        const Node &n = g.layers[window[w]].nodes[idx];
        out.nodes.push_back({{window[w], idx}, n.x, n.y, n.offset});
        idx = to_go[w][idx].next;
    }
    return out;
}

std::vector<Pose2D> sample_path(const PlannedPath &p, double spacing)
{
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw InvalidArgument("sample_path: spacing must be positive");
    if (p.nodes.empty())
        throw InvalidArgument("sample_path: empty path");

    const std::size_t n = p.nodes.size();
    std::vector<double> cum(n, 0.0);
    for (std::size_t k = 1; k < n; ++k)
        cum[k] = cum[k - 1] + std::hypot(p.nodes[k].x - p.nodes[k - 1].x, p.nodes[k].y - p.nodes[k - 1].y);
    const double total = cum.back();

    auto segment_yaw = [&](std::size_t k) {
        const auto &a = p.nodes[k];
        const auto &b = p.nodes[k + 1];
        return std::atan2(b.y - a.y, b.x - a.x);
    };

    std::vector<Pose2D> out;
    if (n == 1 || total == 0.0)
    {
        out.push_back({p.nodes[0].x, p.nodes[0].y, 0.0});
        return out;
    }

    std::size_t seg = 0;
    const auto count = static_cast<std::size_t>(std::floor(total / spacing + 1e-9));
    for (std::size_t i = 0; i <= count; ++i)
    {
        const double d = std::min(static_cast<double>(i) * spacing, total);
        while (seg + 2 < n && d >= cum[seg + 1])
            ++seg;
        const auto &a = p.nodes[seg];
        const auto &b = p.nodes[seg + 1];
        const double len = cum[seg + 1] - cum[seg];
        const double f = len > 0.0 ? std::clamp((d - cum[seg]) / len, 0.0, 1.0) : 0.0;
        out.push_back({a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), segment_yaw(seg)});
    }
    const auto &last = p.nodes.back();
    if (std::hypot(out.back().x - last.x, out.back().y - last.y) > 1e-9)
        out.push_back({last.x, last.y, segment_yaw(n - 2)});
    return out;
}

RacingLine read_racing_line(std::istream &is)
{
    RacingLine line;
    std::string text;
    std::size_t lineno = 0;
    while (std::getline(is, text))
    {
        ++lineno;
        if (const auto hash = text.find('#'); hash != std::string::npos)
            text.erase(hash);
        if (text.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream ls(text);
        LineSample s;
        std::string extra;
        if (!(ls >> s.x >> s.y >> s.s >> s.heading >> s.kappa) || (ls >> extra))
            throw InvalidArgument("racing line: line " + std::to_string(lineno) +
                                  ": expected 'x y s heading kappa'");
        line.samples.push_back(s);
    }
    if (line.samples.size() >= 3)
    {
        const auto &a = line.samples.front();
        const auto &b = line.samples.back();
        line.closed = std::hypot(a.x - b.x, a.y - b.y) < 1e-6;
    }
    line.validate();
    return line;
}

void write_racing_line(std::ostream &os, const RacingLine &line)
{
    os << "# x y s heading kappa\n";
    os.precision(17);
    for (const auto &s : line.samples)
        os << s.x << ' ' << s.y << ' ' << s.s << ' ' << s.heading << ' ' << s.kappa << '\n';
}

void write_graph(std::ostream &os, const RoadGraph &g)
{
    os << "# layer offset_index x y kappa d\n";
    os.precision(17);
    for (const auto &layer : g.layers)
        for (const auto &n : layer.nodes)
            os << n.layer << ' ' << n.index << ' ' << n.x << ' ' << n.y << ' ' << n.kappa << ' ' << n.d << '\n';
}

} // namespace resnav::planner
