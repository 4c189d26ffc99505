#include "resnav/wallfollow.hpp"

#include <doctest.h>

#include <random>

using namespace resnav;
using namespace resnav::wallfollow;

namespace
{

perception::WallModel line_wall(double c0, double c1, perception::WallSide side, double c2 = 0.0)
{
    perception::WallModel w;
    w.coeffs = {c0, c1, c2};
    w.d_w = c0;
    w.support = 50;
    w.side = side;
    return w;
}

} // namespace

TEST_CASE("wall_follow_command examples")
{
    WallFollowParams p;
    p.d_gap = 2.0;
    CHECK(wall_follow_command(line_wall(2.0, 0.0, perception::WallSide::Left), p).steer == 0.0);

    p.w_d = 0.1;
    p.w_theta = 1.0;
    CHECK(wall_follow_command(line_wall(3.0, 0.0, perception::WallSide::Left), p).steer == doctest::Approx(0.1));

    p.d_lookahead = 10.0;
    p.w_theta = 0.5;
    CHECK(wall_follow_command(line_wall(2.0, 0.05, perception::WallSide::Left), p).steer == doctest::Approx(0.025));
    CHECK(wall_follow_command(line_wall(2.0, 0.05, perception::WallSide::Left), p).accel == 0.0);
}

TEST_CASE("right-wall sign mapping")
{
    WallFollowParams p;
    // Right wall at the desired gap, parallel: equilibrium.
    CHECK(wall_follow_command(line_wall(-p.d_gap, 0.0, perception::WallSide::Right), p).steer == 0.0);
    // Too close on the right: steer left (positive).
    CHECK(wall_follow_command(line_wall(-2.0, 0.0, perception::WallSide::Right), p).steer > 0.0);
    // Too far on the right: steer right (negative).
    CHECK(wall_follow_command(line_wall(-6.0, 0.0, perception::WallSide::Right), p).steer < 0.0);
    // Wall bending left ahead (a left-hand turn): turn left.
    CHECK(wall_follow_command(line_wall(-p.d_gap, 0.1, perception::WallSide::Right), p).steer > 0.0);
    CHECK(wall_gap(line_wall(-3.5, 0.0, perception::WallSide::Right)) == doctest::Approx(3.5));
    CHECK(wall_gap(line_wall(2.5, 0.0, perception::WallSide::Left)) == doctest::Approx(2.5));
}

TEST_CASE("steer is bounded for any finite wall")
{
    WallFollowParams p;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 2000; ++i)
    {
        const auto side = i % 2 ? perception::WallSide::Left : perception::WallSide::Right;
        const auto u_w = wall_follow_command(line_wall(u(rng), u(rng) / 10.0, side, u(rng) / 100.0), p);
        CHECK(std::abs(u_w.steer) <= p.steer_limit);
    }
}

TEST_CASE("invalid inputs")
{
    WallFollowParams p;
    perception::WallModel empty;
    CHECK_THROWS_AS(wall_follow_command(empty, p), InvalidArgument);
    auto w = line_wall(NAN, 0.0, perception::WallSide::Left);
    CHECK_THROWS_AS(wall_follow_command(w, p), InvalidArgument);
    p.d_gap = 0.0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("arbitrate")
{
    const ControlInput loc{0.1, 1.0}, wall{-0.2, 0.0};
    fusion::NavStatus s;
    CHECK(arbitrate(s, loc, wall).steer == 0.1);
    s.level = fusion::NavLevel::Warning;
    CHECK(arbitrate(s, loc, wall).steer == 0.1);
    s.level = fusion::NavLevel::Emergency;
    CHECK(arbitrate(s, loc, wall).steer == -0.2);
}
