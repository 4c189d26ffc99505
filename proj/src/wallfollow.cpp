#include "resnav/wallfollow.hpp"

#include <algorithm>
#include <cmath>

namespace resnav::wallfollow
{

void WallFollowParams::validate() const
{
    if (!(d_gap > 0.0) || !(d_lookahead > 0.0) || !(steer_limit > 0.0))
        throw InvalidArgument("WallFollowParams: d_gap, d_lookahead and steer_limit must be positive");
    if (!std::isfinite(w_theta) || !std::isfinite(w_d) || !std::isfinite(d_gap) || !std::isfinite(d_lookahead) ||
        !std::isfinite(steer_limit))
        throw InvalidArgument("WallFollowParams: non-finite parameter");
}

double wall_gap(const perception::WallModel &w) { return w.side == perception::WallSide::Right ? -w.d_w : w.d_w; }

ControlInput wall_follow_command(const perception::WallModel &w, const WallFollowParams &p)
{
    if (!w.valid())
        throw InvalidArgument("wall_follow_command: wall model has too little support");
    const double mirror = w.side == perception::WallSide::Right ? -1.0 : 1.0;
    const double slope = mirror * w.slope(p.d_lookahead);
    const double gap = mirror * w.d_w;
    if (!std::isfinite(slope) || !std::isfinite(gap))
        throw InvalidArgument("wall_follow_command: non-finite wall model");

    const double u = p.w_theta * slope + p.w_d * (gap - p.d_gap);
    ControlInput out;
    out.steer = std::clamp(mirror * u, -p.steer_limit, p.steer_limit);
    out.accel = 0.0;
    return out;
}

ControlInput arbitrate(const fusion::NavStatus &status, const ControlInput &u_loc, const ControlInput &u_wall)
{
    return status.level == fusion::NavLevel::Emergency ? u_wall : u_loc;
}

} // namespace resnav::wallfollow
