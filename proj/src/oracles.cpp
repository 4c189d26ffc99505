#include "resnav/testing/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace resnav::testing
{

std::vector<std::vector<std::size_t>> brute_force_clusters(const perception::PointCloud &c, double tol,
                                                           std::size_t min_size)
{
    const std::size_t n = c.points.size();
    std::vector<std::size_t> label(n);
    std::iota(label.begin(), label.end(), 0);
    // Relabel every member of the larger label whenever a close pair spans two groups.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
        {
            const auto &a = c.points[i];
            const auto &b = c.points[j];
            const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
            if (dx * dx + dy * dy + dz * dz > tol * tol || label[i] == label[j])
                continue;
            const std::size_t keep = std::min(label[i], label[j]);
            const std::size_t drop = std::max(label[i], label[j]);
            for (auto &l : label)
                if (l == drop)
                    l = keep;
        }
    // Labels are the smallest member of each group.
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t root = 0; root < n; ++root)
    {
        std::vector<std::size_t> g;
        for (std::size_t i = 0; i < n; ++i)
            if (label[i] == root)
                g.push_back(i);
        if (!g.empty() && g.size() >= min_size)
            groups.push_back(std::move(g));
    }
    return groups;
}

namespace
{

double obstacle_gap(double x, double y, std::span<const planner::Obstacle> obs)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto &o : obs)
        best = std::min(best, std::hypot(x - o.x, y - o.y) - o.radius);
    return best;
}

double chord_gap(const planner::Node &a, const planner::Node &b, std::span<const planner::Obstacle> obs)
{
    double best = std::numeric_limits<double>::infinity();
    const double ex = b.x - a.x, ey = b.y - a.y;
    const double len2 = ex * ex + ey * ey;
    for (const auto &o : obs)
    {
        double t = len2 > 0.0 ? ((o.x - a.x) * ex + (o.y - a.y) * ey) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, std::hypot(a.x + t * ex - o.x, a.y + t * ey - o.y) - o.radius);
    }
    return best;
}

double score_node(const planner::Node &n, std::span<const planner::Obstacle> obs, const planner::CostParams &p)
{
    const double c = obstacle_gap(n.x, n.y, obs);
    if (c < p.safety_margin)
        return planner::kInfeasible;
    double prox = 0.0;
    if (std::isfinite(c))
        prox = std::max(0.0, 1.0 / (c + p.xi) - 1.0 / p.rho);
    return p.weights.k_c * prox + p.weights.k_kappa * std::abs(n.kappa) + p.weights.k_d * std::abs(n.offset);
}

bool reachable(const planner::Layer &layer, std::size_t from, std::size_t to)
{
    for (const auto &e : layer.edges[from])
        if (e.to == to)
            return true;
    return false;
}

} // namespace

EnumeratedPath enumerate_best_path(const planner::RoadGraph &g, planner::NodeRef start,
                                   std::span<const planner::Obstacle> obstacles, const planner::CostParams &p,
                                   std::size_t horizon)
{
    std::vector<std::size_t> window{start.layer};
    while (window.size() < horizon)
    {
        const std::size_t nj = g.next_layer(window.back());
        if (nj >= g.layer_count() || nj == start.layer)
            break;
        window.push_back(nj);
    }

    const std::size_t m = g.offsets.size();
    EnumeratedPath best;
    double best_offsets = 0.0;
    std::vector<std::size_t> seq{start.index};

    std::function<void()> walk = [&]() {
        if (seq.size() == window.size())
        {
            double cost = 0.0, offsets = 0.0;
            for (std::size_t w = 0; w < seq.size(); ++w)
            {
                const auto &node = g.layers[window[w]].nodes[seq[w]];
                cost += score_node(node, obstacles, p);
                offsets += std::abs(node.offset);
                if (w + 1 < seq.size())
                {
                    const auto &next = g.layers[window[w + 1]].nodes[seq[w + 1]];
                    if (chord_gap(node, next, obstacles) < p.safety_margin)
                        cost = planner::kInfeasible;
                    else
                        cost += std::hypot(next.x - node.x, next.y - node.y);
                }
            }
            if (!std::isfinite(cost))
                return;
            bool take = !std::isfinite(best.cost);
            if (!take)
            {
                const bool tie = std::abs(cost - best.cost) <= 1e-9 * std::max({1.0, std::abs(cost), std::abs(best.cost)});
                if (!tie)
                    take = cost < best.cost;
                else if (std::abs(offsets - best_offsets) > 1e-12)
                    take = offsets < best_offsets;
                else
                    take = seq < best.indices;
            }
            if (take)
            {
                best.cost = cost;
                best.indices = seq;
                best_offsets = offsets;
            }
            return;
        }
        const auto &layer = g.layers[window[seq.size() - 1]];
        for (std::size_t j = 0; j < m; ++j)
            if (reachable(layer, seq.back(), j))
            {
                seq.push_back(j);
                walk();
                seq.pop_back();
            }
    };
    walk();
    return best;
}

std::vector<GateCase> gate_table()
{
    using K = fusion::GateKind;
    return {
        {{0.1, 0.15}, K::AllQualified, {0}, {}},
        {{0.2, 0.2}, K::AllQualified, {0}, {}},
        {{0.0, 0.0}, K::AllQualified, {0}, {}},
        {{0.2, 0.0}, K::AllQualified, {0}, {}},
        {{0.19}, K::AllQualified, {0}, {}},
        {{1.0, 1.0}, K::WeightedFuse, {0, 1}, {0.5, 0.5}},
        {{1.0, 3.0}, K::WeightedFuse, {0, 1}, {0.75, 0.25}},
        {{0.2, 0.3}, K::WeightedFuse, {0, 1}, {0.6, 0.4}},
        {{0.0, 5.0}, K::WeightedFuse, {0, 1}, {1.0, 0.0}},
        {{5.0, 5.0}, K::WeightedFuse, {0, 1}, {0.5, 0.5}},
        {{4.0, 1.0}, K::WeightedFuse, {0, 1}, {0.2, 0.8}},
        {{1.0, 2.0, 3.0}, K::WeightedFuse, {0, 1, 2}, {5.0 / 12.0, 1.0 / 3.0, 0.25}},
        {{1.0, 3.0, 9.0}, K::WeightedFuse, {0, 1}, {0.75, 0.25, 0.0}},
        {{6.0, 2.0, 2.0}, K::WeightedFuse, {1, 2}, {0.0, 0.5, 0.5}},
        {{0.5, 6.0}, K::SingleFeasible, {0}, {}},
        {{6.0, 0.5}, K::SingleFeasible, {1}, {}},
        {{5.0, 5.0000001}, K::SingleFeasible, {0}, {}},
        {{0.3}, K::SingleFeasible, {0}, {}},
        {{5.0}, K::SingleFeasible, {0}, {}},
        {{9.0, 9.0, 4.9}, K::SingleFeasible, {2}, {}},
        {{7.0, 9.0}, K::Reject, {}, {}},
        {{5.0000001, 5.0000001}, K::Reject, {}, {}},
        {{5.1}, K::Reject, {}, {}},
        {{1e9, 6.0, 50.0}, K::Reject, {}, {}},
    };
}

double turning_radius(double wheelbase, double steer) { return wheelbase / std::tan(steer); }

double polyval(std::span<const double> coeffs, double x)
{
    double acc = 0.0, xp = 1.0;
    for (double c : coeffs)
    {
        acc += c * xp;
        xp *= x;
    }
    return acc;
}

} // namespace resnav::testing
