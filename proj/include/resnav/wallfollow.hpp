#pragma once

#include "resnav/core.hpp"
#include "resnav/fusion.hpp"
#include "resnav/perception.hpp"

namespace resnav::wallfollow
{

struct WallFollowParams
{
    double d_gap = 4.0;
    double d_lookahead = 15.0;
    double w_theta = 0.8;
    double w_d = 0.05;
    double steer_limit = 0.3;

    void validate() const;
};

/// Steering law on a fitted wall polynomial: slope at the lookahead point
/// plus gap error. Positive steer turns left.
///
/// Sign mapping: a left wall is used as fitted, steer = w_theta * y'(l) +
/// w_d * (y(0) - d_gap). A right wall is mirrored (y -> -y), evaluated with
/// the same law on the unsigned gap, and the result negated. Either way a
/// wall closer than d_gap pushes the car away from it and a wall farther
/// than d_gap pulls the car toward it. Acceleration is always zero.
ControlInput wall_follow_command(const perception::WallModel &w, const WallFollowParams &p);

/// Unsigned lateral gap to the wall at the rear axle.
double wall_gap(const perception::WallModel &w);

/// Emergency selects the wall-following command, every other level the
/// localization-based one.
ControlInput arbitrate(const fusion::NavStatus &status, const ControlInput &u_loc, const ControlInput &u_wall);

} // namespace resnav::wallfollow
