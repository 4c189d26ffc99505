#pragma once

// Multi-source Kalman filter with distance-gated update selection.
//
// Each tick: predict on the applied control, compute one Mahalanobis
// distance per GPS source, gate the distances into one of four outcomes
// (all qualified / weighted fuse / single feasible / reject), correct the
// estimate accordingly and advance the navigation status machine.

#include "resnav/core.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace resnav::fusion
{

enum class MotionModel
{
    /// x' = F x + B u with F, B, Q given per step.
    Linear,
    /// Kinematic bicycle, F is the Jacobian at the current estimate and Q is
    /// a per-second density scaled by dt.
    Bicycle,
};

struct FilterModel
{
    MotionModel kind = MotionModel::Bicycle;
    StateMatrix F = StateMatrix::Identity();
    ControlMatrix B = ControlMatrix::Zero();
    StateMatrix Q = StateMatrix::Zero();
    double wheelbase = 3.048;
    std::vector<MeasModel> H; // one per source
    std::vector<MeasMatrix> R; // nominal noise, one per source

    std::size_t source_count() const { return H.size(); }

    /// Throws InvalidArgument when the blocks are inconsistent or a noise
    /// matrix is not a valid covariance.
    void validate() const;

    /// Position-only measurement matrix shared by every GPS source.
    static MeasModel position_measurement();

    /// Bicycle model with `sources` identical position sensors.
    static FilterModel bicycle(double wheelbase, const StateMatrix &q_density, const MeasMatrix &r,
                               std::size_t sources);
};

struct Measurement
{
    std::size_t source_id = 0;
    MeasVector z = MeasVector::Zero();
    MeasMatrix R = MeasMatrix::Identity();
    double timestamp = 0.0;
};

struct GateParams
{
    double epsilon = 0.2;
    double delta = 5.0;

    void validate() const; // 0 < epsilon < delta
};

struct AllQualified
{
    std::size_t chosen = 0;
};

struct WeightedFuse
{
    std::vector<double> weights; // per source, zero for excluded sources
};

struct SingleFeasible
{
    std::size_t chosen = 0;
};

struct Reject
{
};

enum class GateKind
{
    AllQualified,
    WeightedFuse,
    SingleFeasible,
    Reject,
};

std::string_view to_string(GateKind k);

struct GateDecision
{
    std::variant<AllQualified, WeightedFuse, SingleFeasible, Reject> outcome;
    std::vector<double> distances;

    GateKind kind() const { return static_cast<GateKind>(outcome.index()); }
    bool accepted() const { return kind() != GateKind::Reject; }
};

enum class NavLevel
{
    Nominal,
    Warning,
    Emergency,
};

std::string_view to_string(NavLevel l);

struct NavStatus
{
    NavLevel level = NavLevel::Nominal;
    int consecutive_rejects = 0;
    int consecutive_accepts = 0;
};

struct StatusThresholds
{
    int warn = 1;
    int emergency = 3;
    int recover = 5;

    void validate() const;
};

struct FilterState
{
    VehicleState estimate;
    StateMatrix cov = StateMatrix::Identity();
    FilterModel model;
    GateParams gate;
    NavStatus status;
    StatusThresholds thresholds;
};

FilterState predict(const FilterState &fs, const ControlInput &u, double dt);

/// Distance between the predicted and observed position, in units of the
/// innovation standard deviation (square root of the quadratic form).
/// Throws NumericError when the innovation covariance is not SPD.
double mahalanobis(const FilterState &fs, const Measurement &m);

/// Per-measurement distances; a singular innovation covariance yields +inf
/// so the source is rejected by the gate.
std::vector<double> distances(const FilterState &fs, std::span<const Measurement> ms);

/// Four-way update selection. Boundary values belong to the <= branch.
GateDecision gate(std::span<const double> distances, const GateParams &p);

/// Ungated decision: fuse every source with equal weight. Used as a negative
/// control and never by the nominal pipeline.
GateDecision accept_all(std::span<const double> distances);

/// Applies the decision. Accepting branches run a Joseph-form Kalman
/// correction; Reject returns the estimate untouched. The status machine is
/// advanced in every branch.
FilterState update(const FilterState &fs, std::span<const Measurement> ms, const GateDecision &d);

NavStatus step_status(const NavStatus &s, const GateDecision &d, const StatusThresholds &cfg);

} // namespace resnav::fusion
