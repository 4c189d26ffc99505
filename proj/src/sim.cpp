#include "resnav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace resnav::sim
{

namespace
{

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

bool divides(double rate, double tick)
{
    const double q = tick / rate;
    return std::abs(q - std::round(q)) < 1e-9 && std::round(q) >= 1.0;
}

void require(bool ok, const std::string &msg)
{
    if (!ok)
        throw InvalidArgument(msg);
}

// Ray (origin o, unit direction d) against segment [a, b]; returns range or +inf.
double ray_segment(const Eigen::Vector2d &o, const Eigen::Vector2d &d, const Eigen::Vector2d &a,
                   const Eigen::Vector2d &b)
{
    const Eigen::Vector2d e = b - a;
    const double denom = d.x() * e.y() - d.y() * e.x();
    if (std::abs(denom) < 1e-12)
        return std::numeric_limits<double>::infinity();
    const Eigen::Vector2d ao = a - o;
    const double r = (ao.x() * e.y() - ao.y() * e.x()) / denom;
    const double u = (ao.x() * d.y() - ao.y() * d.x()) / denom;
    if (r < 0.0 || u < 0.0 || u > 1.0)
        return std::numeric_limits<double>::infinity();
    return r;
}

struct WallSegment
{
    Eigen::Vector2d a, b;
    double side_offset; // lateral offset of this wall from the centerline
};

} // namespace

Track build_oval_track(double straight_len, double turn_radius, double half_width, double bank,
                       double sample_spacing)
{
    if (!(straight_len > 0.0) || !(turn_radius > 0.0) || !(half_width > 0.0) || !(sample_spacing > 0.0))
        throw InvalidArgument("build_oval_track: dimensions must be positive");
    if (!(half_width < turn_radius))
        throw InvalidArgument("build_oval_track: half_width must be smaller than turn_radius");
    if (!std::isfinite(bank) || std::abs(bank) >= kPi / 2)
        throw InvalidArgument("build_oval_track: bank must be finite and below 90 degrees");

    const double R = turn_radius;
    const double L = straight_len;
    Track t;
    t.half_width = half_width;
    t.bank = bank;
    t.straight_length = L;
    t.turn_radius = R;

    auto &samples = t.centerline.samples;
    double s = 0.0;
    auto straight = [&](Eigen::Vector2d start, double heading) {
        const auto n = static_cast<int>(std::ceil(L / sample_spacing));
        const Eigen::Vector2d dir(std::cos(heading), std::sin(heading));
        for (int i = 0; i < n; ++i)
        {
            const double d = L * i / n;
            const Eigen::Vector2d p = start + d * dir;
            samples.push_back({p.x(), p.y(), s + d, normalize_angle(heading), 0.0});
        }
        s += L;
    };
    auto turn = [&](Eigen::Vector2d center, double start_angle) {
        const double len = kPi * R;
        const auto n = static_cast<int>(std::ceil(len / sample_spacing));
        for (int i = 0; i < n; ++i)
        {
            const double a = start_angle + kPi * i / n;
            samples.push_back({center.x() + R * std::cos(a), center.y() + R * std::sin(a), s + len * i / n,
                               normalize_angle(a + kPi / 2), 1.0 / R});
        }
        s += len;
    };
    straight({0.0, -R}, 0.0);
    turn({L, 0.0}, -kPi / 2);
    straight({L, R}, kPi);
    turn({0.0, 0.0}, kPi / 2);
    planner::LineSample close = samples.front();
    close.s = s;
    samples.push_back(close);
    t.centerline.closed = true;

    for (const auto &p : samples)
    {
        const Eigen::Vector2d n(-std::sin(p.heading), std::cos(p.heading));
        const Eigen::Vector2d c(p.x, p.y);
        t.left_wall.push_back(c + half_width * n);
        t.right_wall.push_back(c - half_width * n);
    }
    return t;
}

VehicleState step_vehicle(const VehicleState &s, const ControlInput &u, double dt, double wheelbase)
{
    if (!(dt > 0.0) || !std::isfinite(dt) || !(wheelbase > 0.0))
        throw InvalidArgument("step_vehicle: dt and wheelbase must be positive");
    if (!is_finite(s) || !std::isfinite(u.steer) || !std::isfinite(u.accel))
        throw InvalidArgument("step_vehicle: non-finite input");
    return bicycle_step(s, u, dt, wheelbase);
}

void FaultProfile::validate() const
{
    for (std::size_t k = 0; k < per_source.size(); ++k)
    {
        auto eps = per_source[k];
        for (const auto &e : eps)
        {
            require(std::isfinite(e.t_start) && std::isfinite(e.t_end) && e.t_start < e.t_end,
                    "faults: source " + std::to_string(k) + " has an episode with t_start >= t_end");
            require(e.factor > 0.0 && std::isfinite(e.factor), "faults: noise factor must be positive");
            require(e.sigma >= 0.0 && std::isfinite(e.sigma), "faults: random-walk sigma must be non-negative");
            require(e.bias.allFinite(), "faults: bias must be finite");
        }
        std::sort(eps.begin(), eps.end(), [](const auto &a, const auto &b) { return a.t_start < b.t_start; });
        for (std::size_t i = 1; i < eps.size(); ++i)
            require(eps[i].t_start >= eps[i - 1].t_end,
                    "faults: overlapping episodes for source " + std::to_string(k));
    }
}

const FaultEpisode *FaultProfile::active(std::size_t source, double t) const
{
    if (source >= per_source.size())
        return nullptr;
    for (const auto &e : per_source[source])
        if (e.active(t))
            return &e;
    return nullptr;
}

GpsSynth::GpsSynth(std::size_t sources, double sigma, FaultProfile profile, std::uint64_t seed)
    : sources_(sources), sigma_(sigma), profile_(std::move(profile)), rng_(make_stream(seed, 1)),
      drift_(sources, Eigen::Vector2d::Zero())
{
}

std::vector<fusion::Measurement> GpsSynth::sample(const VehicleState &truth, double t, double dt_since_last)
{
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<fusion::Measurement> out;
    for (std::size_t k = 0; k < sources_; ++k)
    {
        // Draw the nominal noise first so fault modes do not shift the
        // random stream of later sources.
        Eigen::Vector2d noise(unit(rng_), unit(rng_));
        const FaultEpisode *ep = profile_.active(k, t);
        Eigen::Vector2d offset = Eigen::Vector2d::Zero();
        double scale = sigma_;
        if (ep == nullptr || ep->mode != FaultMode::RandomWalk)
            drift_[k].setZero();
        if (ep != nullptr)
        {
            switch (ep->mode)
            {
            case FaultMode::Bias:
                offset = ep->bias;
                break;
            case FaultMode::NoiseInflation:
                scale *= ep->factor;
                break;
            case FaultMode::Dropout:
                continue;
            case FaultMode::RandomWalk: {
                const double step = ep->sigma * std::sqrt(std::max(0.0, dt_since_last));
                drift_[k] += step * Eigen::Vector2d(unit(rng_), unit(rng_));
                offset = drift_[k];
                break;
            }
            }
        }
        fusion::Measurement m;
        m.source_id = k;
        m.z = Eigen::Vector2d(truth.pose.x, truth.pose.y) + scale * noise + offset;
        m.R = sigma_ * sigma_ * MeasMatrix::Identity();
        m.timestamp = t;
        out.push_back(m);
    }
    return out;
}

void LidarParams::validate() const
{
    require(ray_count >= 1, "perception.lidar.ray_count must be at least 1");
    require(fov > 0.0 && fov <= 2.0 * kPi, "perception.lidar.fov_deg must be in (0, 360]");
    require(max_range >= 0.0, "perception.lidar.max_range must be non-negative");
    require(range_noise >= 0.0, "perception.lidar.range_noise must be non-negative");
    require(wall_height > 0.0 && wall_layers >= 1, "perception.lidar wall geometry must be positive");
    require(ground_spacing > 0.0, "perception.lidar.ground_spacing must be positive");
    require(ground_wall_clearance >= 0.0, "perception.lidar.ground_wall_clearance must be non-negative");
}

LidarScan synth_lidar(const VehicleState &truth, const Track &track, const LidarParams &p, std::mt19937_64 &rng)
{
    if (p.ray_count < 1)
        throw InvalidArgument("synth_lidar: ray_count must be at least 1");
    LidarScan scan;
    scan.cloud.stamp = truth.timestamp;
    if (!(p.max_range > 0.0))
        return scan;

    const Eigen::Vector2d origin(truth.pose.x, truth.pose.y);
    const double c = std::cos(truth.pose.yaw), sn = std::sin(truth.pose.yaw);
    const planner::Frenet here = track.locate(origin.x(), origin.y());
    const double tan_bank = std::tan(track.bank);
    // Ground height relative to the rear axle; the outside (right) of the
    // counter-clockwise oval is the high side.
    auto ground_z = [&](double lateral) { return -(lateral - here.n) * tan_bank; };

    std::vector<WallSegment> segments;
    const double reach = p.max_range + 10.0;
    auto collect = [&](const std::vector<Eigen::Vector2d> &wall, double side_offset) {
        for (std::size_t i = 0; i + 1 < wall.size(); ++i)
            if ((wall[i] - origin).norm() <= reach || (wall[i + 1] - origin).norm() <= reach)
                segments.push_back({wall[i], wall[i + 1], side_offset});
    };
    collect(track.left_wall, track.half_width);
    collect(track.right_wall, -track.half_width);

    std::normal_distribution<double> range_noise(0.0, p.range_noise);
    const double dz = p.wall_height / p.wall_layers;
    for (int k = 0; k < p.ray_count; ++k)
    {
        const double az =
            p.ray_count == 1 ? 0.0 : -0.5 * p.fov + p.fov * static_cast<double>(k) / static_cast<double>(p.ray_count - 1);
        const Eigen::Vector2d dir(std::cos(truth.pose.yaw + az), std::sin(truth.pose.yaw + az));
        double best = std::numeric_limits<double>::infinity();
        double side = 0.0;
        for (const auto &seg : segments)
        {
            const double r = ray_segment(origin, dir, seg.a, seg.b);
            if (r < best)
            {
                best = r;
                side = seg.side_offset;
            }
        }
        const double noise = p.range_noise > 0.0 ? range_noise(rng) : 0.0;
        if (!(best <= p.max_range))
            continue;
        const double r = best + noise;
        const double bx = r * std::cos(az), by = r * std::sin(az);
        const double base = ground_z(side);
        for (int l = 0; l < p.wall_layers; ++l)
        {
            scan.cloud.points.push_back({bx, by, base + (l + 0.5) * dz});
            scan.labels.push_back(PointLabel::Wall);
        }
    }

    // Sparse ground lattice laid out in track coordinates.
    std::uniform_real_distribution<double> jitter(-0.1, 0.1);
    const double n_lim = track.half_width - p.ground_wall_clearance;
    const double line_len = track.centerline.length();
    for (double ds = -p.max_range; ds <= p.max_range; ds += p.ground_spacing)
    {
        for (double n = -n_lim; n <= n_lim + 1e-9; n += p.ground_spacing)
        {
            const double jx = jitter(rng), jy = jitter(rng);
            double s = here.s + ds;
            if (s < 0.0)
                s += line_len;
            const Eigen::Vector2d w = track.centerline.displaced(s, n) + Eigen::Vector2d(jx, jy);
            const Eigen::Vector2d rel = w - origin;
            const double range = rel.norm();
            if (range > p.max_range)
                continue;
            const double bx = c * rel.x() + sn * rel.y();
            const double by = -sn * rel.x() + c * rel.y();
            if (std::abs(std::atan2(by, bx)) > 0.5 * p.fov)
                continue;
            scan.cloud.points.push_back({bx, by, ground_z(n)});
            scan.labels.push_back(PointLabel::Ground);
        }
    }
    return scan;
}

std::string_view to_string(DriveMode m) { return m == DriveMode::WallFollow ? "wall_follow" : "racing_line"; }

void Scenario::validate() const
{
    require(track.straight_length > 0.0, "track.straight_length must be positive");
    require(track.turn_radius > 0.0, "track.turn_radius must be positive");
    require(track.half_width > 0.0 && track.half_width < track.turn_radius,
            "track.half_width must be positive and below turn_radius");
    require(std::isfinite(track.bank) && std::abs(track.bank) < kPi / 2, "track.bank_deg must be in (-90, 90)");

    require(vehicle.wheelbase > 0.0, "vehicle.wheelbase must be positive");
    require(vehicle.half_width > 0.0 && vehicle.half_width < track.half_width,
            "vehicle.half_width must be positive and narrower than the track");
    require(vehicle.steer_max > 0.0 && vehicle.steer_max < kPi / 2, "vehicle.steer_max_deg must be in (0, 90)");
    require(vehicle.speed_setpoint >= 0.0, "vehicle.speed_setpoint must be non-negative");
    require(vehicle.speed_gain >= 0.0 && vehicle.max_accel > 0.0, "vehicle speed control gains must be positive");
    require(vehicle.lookahead > 0.0, "vehicle.lookahead must be positive");
    require(std::abs(vehicle.initial.offset) + vehicle.half_width <= track.half_width,
            "vehicle.initial.offset places the car outside the corridor");

    require(rates.tick_hz > 0.0, "rates.tick_hz must be positive");
    require(rates.gps_hz > 0.0 && divides(rates.gps_hz, rates.tick_hz), "rates.gps_hz must divide rates.tick_hz");
    require(rates.lidar_hz > 0.0 && divides(rates.lidar_hz, rates.tick_hz),
            "rates.lidar_hz must divide rates.tick_hz");

    try
    {
        fusion.gate.validate();
    }
    catch (const InvalidArgument &e)
    {
        throw InvalidArgument(std::string("fusion: ") + e.what());
    }
    try
    {
        fusion.thresholds.validate();
    }
    catch (const InvalidArgument &e)
    {
        throw InvalidArgument(std::string("fusion: ") + e.what());
    }
    require(fusion.sources >= 1 && fusion.sources <= kTraceSources, "fusion.sources must be 1 or 2");
    require(fusion.gps_sigma > 0.0, "fusion.gps_sigma must be positive");
    for (double q : fusion.process_noise)
        require(q >= 0.0 && std::isfinite(q), "fusion.process_noise entries must be non-negative");
    for (double s0 : fusion.initial_sigma)
        require(s0 > 0.0 && std::isfinite(s0), "fusion.initial_sigma entries must be positive");

    try
    {
        perception.pipeline.validate();
        perception.lidar.validate();
        wallfollow.law.validate();
        planner.cost.validate();
    }
    catch (const InvalidArgument &e)
    {
        throw InvalidArgument(e.what());
    }
    require(wallfollow.hold_ticks >= 0, "wallfollow.hold_ticks must be non-negative");
    require(wallfollow.safe_stop_decel > 0.0, "wallfollow.safe_stop_decel must be positive");

    require(planner.station_step > 0.0, "planner.station_step must be positive");
    require(!planner.offsets.empty(), "planner.offsets must not be empty");
    require(std::is_sorted(planner.offsets.begin(), planner.offsets.end()), "planner.offsets must be ascending");
    for (double o : planner.offsets)
        require(std::abs(o) <= track.half_width, "planner.offsets exceed track.half_width");
    require(planner.horizon >= 2, "planner.horizon must be at least 2");
    require(planner.sample_spacing > 0.0, "planner.sample_spacing must be positive");

    faults.validate();
    require(faults.per_source.size() <= fusion.sources, "faults reference a source index >= fusion.sources");

    for (const auto &o : obstacles)
        require(o.radius > 0.0 && std::isfinite(o.x) && std::isfinite(o.y), "obstacles: radius must be positive");
    require(duration > 0.0 && std::isfinite(duration), "duration_s must be positive");
}

World build_world(const Scenario &sc)
{
    World w;
    w.track = build_oval_track(sc.track.straight_length, sc.track.turn_radius, sc.track.half_width, sc.track.bank);
    if (sc.track.racing_line_file.empty())
    {
        w.line = w.track.centerline;
    }
    else
    {
        std::ifstream in(sc.track.racing_line_file);
        if (!in)
            throw InvalidArgument("track.racing_line: cannot open " + sc.track.racing_line_file);
        w.line = planner::read_racing_line(in);
    }
    w.graph = planner::build_road_graph(w.line, sc.track.half_width, sc.planner.offsets, sc.planner.station_step,
                                        sc.planner.max_jump);
    return w;
}

double pure_pursuit(const Pose2D &pose, const std::vector<Pose2D> &path, double lookahead, double wheelbase)
{
    if (path.empty())
        return 0.0;
    // Closest sample, then the first sample past the lookahead distance.
    std::size_t closest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < path.size(); ++i)
    {
        const double d = std::hypot(path[i].x - pose.x, path[i].y - pose.y);
        if (d < best)
        {
            best = d;
            closest = i;
        }
    }
    std::size_t target = path.size() - 1;
    for (std::size_t i = closest; i < path.size(); ++i)
        if (std::hypot(path[i].x - pose.x, path[i].y - pose.y) >= lookahead)
        {
            target = i;
            break;
        }
    const double dx = path[target].x - pose.x, dy = path[target].y - pose.y;
    const double ld = std::hypot(dx, dy);
    if (ld < 1e-6)
        return 0.0;
    const double alpha = normalize_angle(std::atan2(dy, dx) - pose.yaw);
    return std::atan(2.0 * wheelbase * std::sin(alpha) / ld);
}

ScenarioResult run_scenario(const Scenario &sc) { return run_scenario(sc, build_world(sc)); }

ScenarioResult run_scenario(const Scenario &sc, const World &world)
{
    sc.validate();
    const Track &track = world.track;
    const auto &line = world.line;
    const auto &graph = world.graph;

    const double dt = 1.0 / sc.rates.tick_hz;
    const auto ticks = static_cast<long>(std::llround(sc.duration * sc.rates.tick_hz));
    const auto gps_every = static_cast<long>(std::llround(sc.rates.tick_hz / sc.rates.gps_hz));
    const auto lidar_every = static_cast<long>(std::llround(sc.rates.tick_hz / sc.rates.lidar_hz));
    const double L = sc.vehicle.wheelbase;

    // Initial truth from the track placement.
    VehicleState truth;
    {
        const auto base = track.centerline.at(sc.vehicle.initial.s);
        const Eigen::Vector2d p = track.centerline.displaced(sc.vehicle.initial.s, sc.vehicle.initial.offset);
        truth.pose = {p.x(), p.y(), normalize_angle(base.heading + sc.vehicle.initial.heading_error)};
        truth.speed = sc.vehicle.speed_setpoint;
        truth.yaw_rate = 0.0;
        truth.timestamp = 0.0;
    }

    fusion::FilterState fs;
    {
        StateMatrix q = StateMatrix::Zero();
        StateMatrix p0 = StateMatrix::Zero();
        for (int i = 0; i < kStateDim; ++i)
        {
            q(i, i) = sc.fusion.process_noise[static_cast<std::size_t>(i)];
            const double s0 = sc.fusion.initial_sigma[static_cast<std::size_t>(i)];
            p0(i, i) = s0 * s0;
        }
        fs.model = fusion::FilterModel::bicycle(L, q, sc.fusion.gps_sigma * sc.fusion.gps_sigma * MeasMatrix::Identity(),
                                                sc.fusion.sources);
        fs.estimate = truth;
        fs.cov = p0;
        fs.gate = sc.fusion.gate;
        fs.thresholds = sc.fusion.thresholds;
    }

    GpsSynth gps(sc.fusion.sources, sc.fusion.gps_sigma, sc.faults, sc.seed);
    std::mt19937_64 lidar_rng = make_stream(sc.seed, 2);

    ScenarioResult result;
    result.trace.reserve(static_cast<std::size_t>(ticks));

    ControlInput u_prev{};
    std::optional<perception::WallModel> wall;
    ControlInput last_wall_cmd{};
    int wall_missing_ticks = 0;
    std::optional<planner::PlannedPath> prev_path;
    const double vhw = sc.vehicle.half_width;

    for (long k = 0; k < ticks; ++k)
    {
        const double t = static_cast<double>(k) * dt;
        truth.timestamp = t;
        if (k > 0)
            fs = fusion::predict(fs, u_prev, dt);

        TraceRecord rec;
        rec.t = t;
        rec.truth = truth.pose;

        if (k % gps_every == 0)
        {
            const auto ms = gps.sample(truth, t, static_cast<double>(gps_every) * dt);
            if (!ms.empty())
            {
                const auto d = fusion::distances(fs, ms);
                const auto dec = sc.fusion.gating ? fusion::gate(d, fs.gate) : fusion::accept_all(d);
                fs = fusion::update(fs, ms, dec);
                rec.gate = dec.kind();
                for (std::size_t i = 0; i < ms.size(); ++i)
                {
                    const auto src = ms[i].source_id;
                    rec.z[src] = ms[i].z;
                    if (std::isfinite(d[i]))
                        rec.delta[src] = d[i];
                }
            }
        }
        rec.estimate = fs.estimate.pose;
        rec.status = fs.status.level;

        if (k % lidar_every == 0)
        {
            const LidarScan scan = synth_lidar(truth, track, sc.perception.lidar, lidar_rng);
            try
            {
                wall = perception::detect_wall(scan.cloud, sc.perception.pipeline);
            }
            catch (const Error &)
            {
                wall.reset();
            }
        }

        // Localization-based command: replan from the layer nearest the
        // estimate, keeping the previous plan's node at that layer.
        const Pose2D est = fs.estimate.pose;
        const planner::Frenet fr = line.project(est.x, est.y);
        const std::size_t start_layer = graph.nearest_layer(fr.s, line.length());
        std::size_t start_index = graph.nearest_offset(fr.n);
        if (prev_path)
            for (const auto &pn : prev_path->nodes)
                if (pn.ref.layer == start_layer)
                {
                    start_index = pn.ref.index;
                    break;
                }
        std::optional<planner::PlannedPath> path;
        try
        {
            path = planner::plan(graph, {start_layer, start_index}, sc.obstacles, sc.planner.cost, sc.planner.horizon);
        }
        catch (const planner::NoFeasiblePath &)
        {
            if (start_index != graph.nearest_offset(fr.n))
            {
                try
                {
                    path = planner::plan(graph, {start_layer, graph.nearest_offset(fr.n)}, sc.obstacles,
                                         sc.planner.cost, sc.planner.horizon);
                }
                catch (const planner::NoFeasiblePath &)
                {
                }
            }
        }
        ControlInput u_loc;
        if (path)
        {
            prev_path = path;
            const auto poses = planner::sample_path(*path, sc.planner.sample_spacing);
            u_loc.steer = pure_pursuit(est, poses, sc.vehicle.lookahead, L);
            u_loc.accel = std::clamp(sc.vehicle.speed_gain * (sc.vehicle.speed_setpoint - fs.estimate.speed),
                                     -sc.vehicle.max_accel, sc.vehicle.max_accel);
            rec.path_offset = path->nodes.front().offset;
        }
        else
        {
            prev_path.reset();
            u_loc.steer = 0.0;
            u_loc.accel = -sc.wallfollow.safe_stop_decel;
        }

        // Wall-following command with a short hold on perception dropouts.
        ControlInput u_wall;
        bool wall_ok = false;
        if (wall && wall->valid())
        {
            try
            {
                u_wall = wallfollow::wall_follow_command(*wall, sc.wallfollow.law);
                wall_ok = true;
            }
            catch (const InvalidArgument &)
            {
            }
        }
        if (wall_ok)
        {
            last_wall_cmd = u_wall;
            wall_missing_ticks = 0;
            rec.d_w = wall->d_w;
        }
        else if (wall_missing_ticks < sc.wallfollow.hold_ticks)
        {
            ++wall_missing_ticks;
            u_wall = last_wall_cmd;
        }
        else
        {
            u_wall = {0.0, -sc.wallfollow.safe_stop_decel};
        }

        fusion::NavStatus arb_status = fs.status;
        if (sc.wallfollow.force)
            arb_status.level = fusion::NavLevel::Emergency;
        ControlInput u = wallfollow::arbitrate(arb_status, u_loc, u_wall);
        rec.mode = arb_status.level == fusion::NavLevel::Emergency ? DriveMode::WallFollow : DriveMode::RacingLine;
        u = clamp_control(u, sc.vehicle.steer_max);
        rec.steer = u.steer;

        // Corridor check on the current truth.
        const planner::Frenet tf = track.locate(truth.pose.x, truth.pose.y);
        result.trace.push_back(rec);
        if (std::abs(tf.n) + vhw > track.half_width)
        {
            result.off_track = true;
            break;
        }

        truth = step_vehicle(truth, u, dt, L);
        u_prev = u;
    }
    return result;
}

} // namespace resnav::sim
