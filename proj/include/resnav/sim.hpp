#pragma once

// Deterministic closed-loop simulator: stadium oval with walls, kinematic
// bicycle, dual GPS with scripted faults, 2.5-D LiDAR, and the scenario loop
// wiring fusion -> perception -> planner -> arbitration -> vehicle.

#include "resnav/core.hpp"
#include "resnav/fusion.hpp"
#include "resnav/perception.hpp"
#include "resnav/planner.hpp"
#include "resnav/wallfollow.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace resnav::sim
{

struct Track
{
    planner::RacingLine centerline;
    double half_width = 7.5;
    double bank = 0.0;
    std::vector<Eigen::Vector2d> left_wall;  // inner wall of the counter-clockwise oval
    std::vector<Eigen::Vector2d> right_wall; // outer wall
    double straight_length = 0.0;
    double turn_radius = 0.0;

    /// Signed lateral offset and station of a world point.
    planner::Frenet locate(double x, double y) const { return centerline.project(x, y); }
};

/// Stadium oval driven counter-clockwise from (0, -turn_radius) heading +x.
Track build_oval_track(double straight_len, double turn_radius, double half_width, double bank,
                       double sample_spacing = 1.0);

VehicleState step_vehicle(const VehicleState &s, const ControlInput &u, double dt, double wheelbase);

enum class FaultMode
{
    Bias,
    NoiseInflation,
    Dropout,
    RandomWalk,
};

struct FaultEpisode
{
    double t_start = 0.0;
    double t_end = 0.0;
    FaultMode mode = FaultMode::Bias;
    Eigen::Vector2d bias = Eigen::Vector2d::Zero(); // Bias
    double factor = 1.0;                            // NoiseInflation
    double sigma = 0.0;                             // RandomWalk, m/sqrt(s)

    bool active(double t) const { return t >= t_start && t < t_end; }
};

struct FaultProfile
{
    std::vector<std::vector<FaultEpisode>> per_source;

    /// Episodes must satisfy t_start < t_end and not overlap per source.
    void validate() const;
    const FaultEpisode *active(std::size_t source, double t) const;
};

/// Synthetic GPS receivers. Stateful only through the random-walk drift.
class GpsSynth
{
  public:
    GpsSynth(std::size_t sources, double sigma, FaultProfile profile, std::uint64_t seed);

    /// Samples every source at time t; dropped-out sources are omitted.
    std::vector<fusion::Measurement> sample(const VehicleState &truth, double t, double dt_since_last);

  private:
    std::size_t sources_;
    double sigma_;
    FaultProfile profile_;
    std::mt19937_64 rng_;
    std::vector<Eigen::Vector2d> drift_;
};

struct LidarParams
{
    double fov = deg2rad(270.0);
    int ray_count = 1080;
    double max_range = 100.0;
    double range_noise = 0.03;
    double wall_height = 1.0;
    int wall_layers = 5;
    double ground_spacing = 0.8;
    double ground_wall_clearance = 1.0;

    void validate() const;
};

enum class PointLabel : unsigned char
{
    Ground,
    Wall,
};

struct LidarScan
{
    perception::PointCloud cloud;
    std::vector<PointLabel> labels;
};

/// 2.5-D raycast against the wall polylines. Each hit yields a vertical
/// column of `wall_layers` points (range noise drawn once per ray), and the
/// drivable surface contributes a sparse jittered lattice of banked ground
/// points. Everything is in the body frame at truth.
LidarScan synth_lidar(const VehicleState &truth, const Track &track, const LidarParams &p, std::mt19937_64 &rng);

// Scenario ------------------------------------------------------------------

struct TrackParams
{
    double straight_length = 600.0;
    double turn_radius = 200.0;
    double half_width = 7.5;
    double bank = deg2rad(9.0);
    std::string racing_line_file; // empty: centerline
};

struct InitialPlacement
{
    double s = 0.0;
    double offset = 0.0;
    double heading_error = 0.0;
};

struct VehicleParams
{
    double wheelbase = 3.048;
    double half_width = 1.0;
    double steer_max = kDefaultSteerMax;
    double speed_setpoint = 30.0;
    double speed_gain = 1.0;
    double max_accel = 5.0;
    double lookahead = 20.0;
    InitialPlacement initial;
};

struct Rates
{
    double tick_hz = 100.0;
    double gps_hz = 20.0;
    double lidar_hz = 20.0;
};

struct FusionParams
{
    fusion::GateParams gate;
    fusion::StatusThresholds thresholds;
    bool gating = true;
    std::size_t sources = 2;
    double gps_sigma = 0.05;
    std::array<double, kStateDim> process_noise{0.01, 0.01, 1e-5, 0.01, 1e-4}; // per-second variances
    std::array<double, kStateDim> initial_sigma{0.1, 0.1, 0.005, 0.2, 0.01};
};

struct PerceptionParams
{
    perception::PipelineParams pipeline;
    LidarParams lidar;
};

struct WallParams
{
    wallfollow::WallFollowParams law;
    int hold_ticks = 10;
    double safe_stop_decel = 5.0;
    bool force = false; // wall-follow regardless of status
};

struct PlannerParams
{
    double station_step = 10.0;
    std::vector<double> offsets{-3.0, -1.5, 0.0, 1.5, 3.0};
    std::size_t max_jump = 1;
    std::size_t horizon = 15;
    planner::CostParams cost;
    double sample_spacing = 1.0;
};

struct Scenario
{
    std::string name = "scenario";
    TrackParams track;
    VehicleParams vehicle;
    Rates rates;
    FusionParams fusion;
    PerceptionParams perception;
    WallParams wallfollow;
    PlannerParams planner;
    FaultProfile faults;
    std::vector<planner::Obstacle> obstacles;
    std::uint64_t seed = 1;
    double duration = 60.0;

    /// Throws InvalidArgument naming the offending field.
    void validate() const;
};

enum class DriveMode
{
    RacingLine,
    WallFollow,
};

std::string_view to_string(DriveMode m);

inline constexpr std::size_t kTraceSources = 2;

struct TraceRecord
{
    double t = 0.0;
    Pose2D truth;
    Pose2D estimate;
    std::array<std::optional<Eigen::Vector2d>, kTraceSources> z;
    std::array<std::optional<double>, kTraceSources> delta;
    std::optional<fusion::GateKind> gate;
    fusion::NavLevel status = fusion::NavLevel::Nominal;
    DriveMode mode = DriveMode::RacingLine;
    double steer = 0.0;
    std::optional<double> d_w;
    std::optional<double> path_offset;
};

struct ScenarioResult
{
    std::vector<TraceRecord> trace;
    bool off_track = false;
};

/// Everything derived from a Scenario before the loop starts.
struct World
{
    Track track;
    planner::RacingLine line;
    planner::RoadGraph graph;
};

World build_world(const Scenario &sc);

ScenarioResult run_scenario(const Scenario &sc);
ScenarioResult run_scenario(const Scenario &sc, const World &world);

/// Pure-pursuit steering toward the first path pose at least `lookahead`
/// meters away.
double pure_pursuit(const Pose2D &pose, const std::vector<Pose2D> &path, double lookahead, double wheelbase);

} // namespace resnav::sim
