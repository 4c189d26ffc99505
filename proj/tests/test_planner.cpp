#include "resnav/planner.hpp"
#include "resnav/testing/oracles.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace resnav;
using namespace resnav::planner;

namespace
{

RacingLine straight(double len, double step = 1.0)
{
    std::vector<Eigen::Vector2d> pts;
    for (double s = 0.0; s <= len + 1e-9; s += step)
        pts.emplace_back(s, 0.0);
    return RacingLine::from_points(pts, false);
}

RacingLine circle(double R, std::size_t n)
{
    std::vector<Eigen::Vector2d> pts;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double a = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
        pts.emplace_back(R * std::cos(a), R * std::sin(a));
    }
    return RacingLine::from_points(pts, true);
}

std::vector<std::size_t> indices(const PlannedPath &p)
{
    std::vector<std::size_t> out;
    for (const auto &n : p.nodes)
        out.push_back(n.ref.index);
    return out;
}

} // namespace

TEST_CASE("racing line geometry")
{
    const auto line = straight(30.0);
    CHECK(line.length() == doctest::Approx(30.0));
    CHECK_NOTHROW(line.validate());
    const auto s = line.at(12.5);
    CHECK(s.x == doctest::Approx(12.5));
    CHECK(s.heading == doctest::Approx(0.0));
    const auto d = line.displaced(10.0, 2.0);
    CHECK(d.x() == doctest::Approx(10.0));
    CHECK(d.y() == doctest::Approx(2.0));
    const auto f = line.project(7.0, -1.5);
    CHECK(f.s == doctest::Approx(7.0));
    CHECK(f.n == doctest::Approx(-1.5));

    const auto c = circle(50.0, 400);
    CHECK(c.closed);
    CHECK(c.length() == doctest::Approx(2.0 * kPi * 50.0).epsilon(1e-3));
    CHECK_NOTHROW(c.validate());
    CHECK(c.samples[10].kappa == doctest::Approx(1.0 / 50.0).epsilon(1e-3));
    const auto fc = c.project(53.0, 0.0);
    CHECK(fc.n == doctest::Approx(-3.0).epsilon(1e-3));

    RacingLine bad = line;
    bad.samples[5].heading = 1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    RacingLine nonmono = line;
    nonmono.samples[5].s = nonmono.samples[4].s;
    CHECK_THROWS_AS(nonmono.validate(), InvalidArgument);
}

TEST_CASE("racing line text round trip")
{
    const auto c = circle(40.0, 100);
    std::stringstream ss;
    write_racing_line(ss, c);
    const auto back = read_racing_line(ss);
    REQUIRE(back.samples.size() == c.samples.size());
    CHECK(back.closed);
    for (std::size_t i = 0; i < c.samples.size(); ++i)
    {
        CHECK(back.samples[i].x == c.samples[i].x);
        CHECK(back.samples[i].kappa == c.samples[i].kappa);
    }
    std::stringstream bad("0 0 0 0\n");
    CHECK_THROWS_AS(read_racing_line(bad), InvalidArgument);
}

TEST_CASE("build_road_graph on a straight line")
{
    const auto g = build_road_graph(straight(30.0), 7.5, {-2.0, 0.0, 2.0}, 10.0);
    REQUIRE(g.layer_count() == 4);
    for (const auto &layer : g.layers)
    {
        REQUIRE(layer.nodes.size() == 3);
        CHECK(layer.nodes[1].y == doctest::Approx(0.0));
        CHECK(layer.nodes[1].kappa == doctest::Approx(0.0));
        for (const auto &n : layer.nodes)
            CHECK(n.d == std::abs(n.offset));
    }
    CHECK(g.layers[2].s == doctest::Approx(20.0));
    // Middle node connects to all three, edge nodes to two.
    CHECK(g.layers[0].edges[1].size() == 3);
    CHECK(g.layers[0].edges[0].size() == 2);
    CHECK(g.layers.back().edges[0].empty());
    for (const auto &layer : g.layers)
        for (std::size_t i = 0; i < layer.edges.size(); ++i)
            for (const auto &e : layer.edges[i])
            {
                const auto &a = layer.nodes[i];
                const auto &b = g.layers[a.layer + 1].nodes[e.to];
                CHECK(e.length >= std::hypot(b.x - a.x, b.y - a.y) - 1e-12);
            }

    CHECK_THROWS_AS(build_road_graph(straight(30.0), 1.0, {-2.0, 0.0, 2.0}, 10.0), InvalidArgument);
    CHECK_THROWS_AS(build_road_graph(straight(30.0), 7.5, {2.0, 0.0}, 10.0), InvalidArgument);
    CHECK_THROWS_AS(build_road_graph(straight(30.0), 7.5, {0.0}, 0.0), InvalidArgument);
}

TEST_CASE("build_road_graph node curvature on a circle")
{
    const double R = 100.0;
    const auto line = circle(R, 2000);
    const auto g = build_road_graph(line, 7.5, {-5.0, 0.0, 5.0}, 25.0);
    CHECK(g.closed);
    CHECK(g.next_layer(g.layer_count() - 1) == 0);
    for (const auto &layer : g.layers)
    {
        CHECK(layer.nodes[1].kappa == doctest::Approx(line.at(layer.s).kappa).epsilon(0.05));
        // Offsets are to the left, toward the center of a counter-clockwise circle.
        CHECK(layer.nodes[2].kappa == doctest::Approx(1.0 / (R - 5.0)).epsilon(0.05));
        CHECK(layer.nodes[0].kappa == doctest::Approx(1.0 / (R + 5.0)).epsilon(0.05));
    }
    CHECK(g.nearest_layer(2.0 * kPi * R - 1.0, line.length()) == 0);
    CHECK(g.nearest_offset(3.0) == 2);
}

TEST_CASE("node_cost")
{
    CostParams p;
    Node n;
    CHECK(node_cost(n, {}, p) == 0.0);

    const std::vector<Obstacle> obs{{0.0, 1.0, 0.2}};
    CHECK(std::isinf(node_cost(n, obs, p)));

    Node near, far;
    near.x = 0.0;
    near.y = -1.0;
    far.x = 0.0;
    far.y = -10.0;
    const std::vector<Obstacle> o2{{0.0, 0.8, 0.0}};
    CHECK(node_cost(near, o2, p) > node_cost(far, o2, p));
    CHECK(node_cost(far, o2, p) == doctest::Approx(5.0 * (1.0 / (10.8 + 0.1) - 1.0 / 15.0)));

    Node off;
    off.kappa = -0.01;
    off.d = 1.5;
    off.offset = -1.5;
    CHECK(node_cost(off, {}, p) == doctest::Approx(50.0 * 0.01 + 1.5));

    CHECK(clearance(3.0, 4.0, std::vector<Obstacle>{{0.0, 0.0, 1.0}}) == doctest::Approx(4.0));
    CHECK(segment_clearance(-5.0, 2.0, 5.0, 2.0, std::vector<Obstacle>{{0.0, 0.0, 0.5}}) == doctest::Approx(1.5));
    CHECK(std::isinf(clearance(0.0, 0.0, {})));
}

TEST_CASE("plan without obstacles stays on the racing line")
{
    const auto g = build_road_graph(straight(100.0), 7.5, {-3.0, -1.5, 0.0, 1.5, 3.0}, 10.0);
    const auto p = plan(g, {0, 2}, {}, CostParams{}, 8);
    REQUIRE(p.nodes.size() == 8);
    for (const auto &n : p.nodes)
        CHECK(n.offset == 0.0);
    CHECK(p.total_cost == doctest::Approx(70.0));

    // From an offset start the path walks back to zero and stays there.
    const auto back = plan(g, {0, 4}, {}, CostParams{}, 8);
    CHECK(indices(back) == std::vector<std::size_t>{4, 3, 2, 2, 2, 2, 2, 2});
}

TEST_CASE("plan detours around a blocked middle layer and matches enumeration")
{
    const auto g = build_road_graph(straight(30.0), 7.5, {-3.0, 0.0, 3.0}, 10.0);
    const std::vector<Obstacle> obs{{20.0, 0.0, 0.3}};
    const CostParams cp;
    const auto p = plan(g, {0, 1}, obs, cp, 4);
    const auto want = testing::enumerate_best_path(g, {0, 1}, obs, cp, 4);
    CHECK(indices(p) == want.indices);
    CHECK(p.total_cost == doctest::Approx(want.cost).epsilon(1e-12));
    CHECK(p.nodes[2].offset != 0.0);
    CHECK(p.nodes[3].offset == 0.0);
    for (const auto &n : p.nodes)
        CHECK(clearance(n.x, n.y, obs) >= cp.safety_margin);
    for (const auto &pose : sample_path(p, 0.5))
        CHECK(clearance(pose.x, pose.y, obs) >= cp.safety_margin);
}

TEST_CASE("plan equals enumeration on random small graphs")
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const CostParams cp;
    const auto line = straight(40.5, 0.5);
    const auto g = build_road_graph(line, 7.5, {-3.0, -1.5, 0.0, 1.5, 3.0}, 10.0, 2);
    for (int t = 0; t < 200; ++t)
    {
        std::vector<Obstacle> obs;
        for (int k = 0; k < 3; ++k)
            obs.push_back({40.0 * u(rng), -6.0 + 12.0 * u(rng), 0.1 + 0.8 * u(rng)});
        const NodeRef start{0, static_cast<std::size_t>(5 * u(rng))};
        const auto want = testing::enumerate_best_path(g, start, obs, cp, 5);
        if (!std::isfinite(want.cost))
        {
            CHECK_THROWS_AS(plan(g, start, obs, cp, 5), NoFeasiblePath);
            continue;
        }
        const auto got = plan(g, start, obs, cp, 5);
        CHECK(indices(got) == want.indices);
        CHECK(got.total_cost == doctest::Approx(want.cost).epsilon(1e-9));
    }
}

TEST_CASE("plan: fully blocked layer and bad arguments")
{
    const auto g = build_road_graph(straight(30.0), 7.5, {-1.0, 0.0, 1.0}, 10.0);
    const std::vector<Obstacle> wall{{10.0, 0.0, 3.0}};
    CHECK_THROWS_AS(plan(g, {0, 1}, wall, CostParams{}, 4), NoFeasiblePath);
    CHECK_THROWS_AS(plan(g, {0, 7}, {}, CostParams{}, 4), InvalidArgument);
    CHECK_THROWS_AS(plan(g, {0, 1}, {}, CostParams{}, 1), InvalidArgument);
    CHECK_THROWS_AS(plan(g, {3, 1}, {}, CostParams{}, 4), InvalidArgument);
}

TEST_CASE("enlarging an obstacle never lowers the proximity cost of the chosen path")
{
    const auto g = build_road_graph(straight(60.0), 7.5, {-3.0, -1.5, 0.0, 1.5, 3.0}, 10.0);
    const CostParams cp;
    double prev = -1.0;
    for (double r = 0.1; r < 1.0; r += 0.1)
    {
        const std::vector<Obstacle> obs{{30.0, 0.5, r}};
        const auto p = plan(g, {0, 2}, obs, cp, 7);
        double prox = 0.0;
        for (const auto &n : p.nodes)
        {
            const double c = clearance(n.x, n.y, obs);
            prox += cp.weights.k_c * std::max(0.0, 1.0 / (c + cp.xi) - 1.0 / cp.rho);
        }
        CHECK(p.total_cost >= prev - 1e-12);
        prev = p.total_cost;
        (void)prox;
    }
}

TEST_CASE("sample_path")
{
    PlannedPath p;
    p.nodes = {{{0, 0}, 0.0, 0.0, 0.0}, {{1, 0}, 10.0, 0.0, 0.0}};
    auto poses = sample_path(p, 5.0);
    REQUIRE(poses.size() == 3);
    CHECK(poses[1].x == doctest::Approx(5.0));
    for (const auto &q : poses)
        CHECK(q.yaw == doctest::Approx(0.0));

    p.nodes.push_back({{2, 0}, 20.0, 5.0, 5.0});
    poses = sample_path(p, 0.7);
    for (const auto &q : poses)
    {
        // Every pose lies on one of the two segments.
        const double on_first = std::abs(q.y);
        const double on_second = std::abs((q.x - 10.0) * 5.0 - (q.y - 0.0) * 10.0) / std::hypot(10.0, 5.0);
        CHECK(std::min(on_first, on_second) < 1e-9);
    }
    CHECK(poses.back().x == doctest::Approx(20.0));
    CHECK_THROWS_AS(sample_path(PlannedPath{}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(sample_path(p, 0.0), InvalidArgument);
}
