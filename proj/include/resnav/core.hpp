#pragma once

// Shared domain types, frames and small linear-algebra helpers.
//
// Frames: world quantities are track-local ENU meters. Body-frame points
// have their origin at the rear-axle center, x forward, y left, z up.
// Angles are radians everywhere inside the library.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace resnav
{

class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Bad argument or violated precondition.
class InvalidArgument : public Error
{
  public:
    using Error::Error;
};

/// Singular or indefinite system, carries a condition estimate.
class NumericError : public Error
{
  public:
    NumericError(const std::string &what, double condition) : Error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

  private:
    double condition_;
};

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi]. Throws InvalidArgument on non-finite input.
double normalize_angle(double a);

// State layout: (x, y, yaw, speed, yaw_rate).
inline constexpr int kStateDim = 5;
inline constexpr int kMeasDim = 2;

enum StateIndex : int
{
    kX = 0,
    kY = 1,
    kYaw = 2,
    kSpeed = 3,
    kYawRate = 4,
};

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using ControlMatrix = Eigen::Matrix<double, kStateDim, 2>;
using MeasVector = Eigen::Vector2d;
using MeasMatrix = Eigen::Matrix2d;
using MeasModel = Eigen::Matrix<double, kMeasDim, kStateDim>;

struct Pose2D
{
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;
};

struct VehicleState
{
    Pose2D pose;
    double speed = 0.0;
    double yaw_rate = 0.0;
    double timestamp = 0.0;

    StateVector to_vector() const;
    static VehicleState from_vector(const StateVector &v, double timestamp);
};

struct ControlInput
{
    double steer = 0.0; // front-wheel angle, rad, positive turns left
    double accel = 0.0; // m/s^2
};

inline constexpr double kDefaultSteerMax = 0.3;

/// Clamps steer into [-steer_max, steer_max].
ControlInput clamp_control(ControlInput u, double steer_max = kDefaultSteerMax);

struct Point3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline bool is_finite(const Point3 &p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }
bool is_finite(const VehicleState &s);

// Covariance helpers. Symmetric to 1e-9 and eigenvalues >= -1e-9 after
// symmetrization.
inline constexpr double kCovarianceTol = 1e-9;

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd &m);
bool is_valid_covariance(const Eigen::MatrixXd &m, double tol = kCovarianceTol);

/// Solves A x = b for symmetric positive-definite A (Cholesky).
/// Throws NumericError with a reciprocal-condition diagnostic when A is
/// singular, indefinite or too badly conditioned to meet the 1e-9 relative
/// residual bound.
Eigen::VectorXd solve_spd(const Eigen::MatrixXd &A, const Eigen::VectorXd &b);

/// One explicit-Euler step of the kinematic bicycle model. The yaw rate is
/// recomputed from speed and steer, position and heading are integrated with
/// the pre-step heading, speed is clamped at zero.
VehicleState bicycle_step(const VehicleState &s, const ControlInput &u, double dt, double wheelbase);

} // namespace resnav
