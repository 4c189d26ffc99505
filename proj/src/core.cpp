#include "resnav/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace resnav
{

double normalize_angle(double a)
{
    if (!std::isfinite(a))
        throw InvalidArgument("normalize_angle: non-finite angle");
    double r = std::remainder(a, 2.0 * kPi); // [-pi, pi]
    if (r <= -kPi)
        r += 2.0 * kPi;
    return r;
}

StateVector VehicleState::to_vector() const
{
    StateVector v;
    v << pose.x, pose.y, pose.yaw, speed, yaw_rate;
    return v;
}

VehicleState VehicleState::from_vector(const StateVector &v, double timestamp)
{
    VehicleState s;
    s.pose = {v[kX], v[kY], normalize_angle(v[kYaw])};
    s.speed = v[kSpeed];
    s.yaw_rate = v[kYawRate];
    s.timestamp = timestamp;
    return s;
}

ControlInput clamp_control(ControlInput u, double steer_max)
{
    u.steer = std::clamp(u.steer, -steer_max, steer_max);
    return u;
}

bool is_finite(const VehicleState &s)
{
    return std::isfinite(s.pose.x) && std::isfinite(s.pose.y) && std::isfinite(s.pose.yaw) && std::isfinite(s.speed) &&
           std::isfinite(s.yaw_rate) && std::isfinite(s.timestamp);
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd &m) { return 0.5 * (m + m.transpose()); }

bool is_valid_covariance(const Eigen::MatrixXd &m, double tol)
{
    if (m.rows() != m.cols() || m.rows() == 0 || !m.allFinite())
        return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale)
        return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol * scale;
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd &A, const Eigen::VectorXd &b)
{
    if (A.rows() != A.cols() || A.rows() != b.size())
        throw InvalidArgument("solve_spd: dimension mismatch");
    if (!A.allFinite() || !b.allFinite())
        throw InvalidArgument("solve_spd: non-finite input");

    Eigen::LLT<Eigen::MatrixXd> llt(A);
    const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
    if (llt.info() != Eigen::Success || rcond < 1e-14)
    {
        std::ostringstream os;
        os << "solve_spd: matrix is singular or not positive definite (rcond=" << rcond << ")";
        throw NumericError(os.str(), rcond);
    }
    Eigen::VectorXd x = llt.solve(b);
    // One step of iterative refinement keeps the residual at the 1e-9 level
    // for moderately conditioned systems.
    const Eigen::VectorXd r = b - A * x;
    x += llt.solve(r);
    return x;
}

VehicleState bicycle_step(const VehicleState &s, const ControlInput &u, double dt, double wheelbase)
{
    VehicleState n = s;
    const double v = s.speed;
    n.yaw_rate = v * std::tan(u.steer) / wheelbase;
    n.pose.x = s.pose.x + v * std::cos(s.pose.yaw) * dt;
    n.pose.y = s.pose.y + v * std::sin(s.pose.yaw) * dt;
    n.pose.yaw = normalize_angle(s.pose.yaw + n.yaw_rate * dt);
    n.speed = std::max(0.0, v + u.accel * dt);
    n.timestamp = s.timestamp + dt;
    return n;
}

} // namespace resnav
