#include "resnav/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace resnav::fusion
{

namespace
{

void require_valid_cov(const Eigen::MatrixXd &m, const char *what)
{
    if (!is_valid_covariance(m))
        throw InvalidArgument(std::string(what) + " is not a valid covariance");
}

StateMatrix bicycle_jacobian(const VehicleState &s, const ControlInput &u, double dt, double wheelbase)
{
    const double c = std::cos(s.pose.yaw);
    const double sn = std::sin(s.pose.yaw);
    const double v = s.speed;
    const double k = std::tan(u.steer) / wheelbase;

    StateMatrix F = StateMatrix::Zero();
    F(kX, kX) = 1.0;
    F(kX, kYaw) = -v * sn * dt;
    F(kX, kSpeed) = c * dt;
    F(kY, kY) = 1.0;
    F(kY, kYaw) = v * c * dt;
    F(kY, kSpeed) = sn * dt;
    F(kYaw, kYaw) = 1.0;
    F(kYaw, kSpeed) = k * dt;
    F(kSpeed, kSpeed) = (v + u.accel * dt) >= 0.0 ? 1.0 : 0.0;
    F(kYawRate, kSpeed) = k;
    return F;
}

MeasModel source_model(const FilterModel &model, const Measurement &m)
{
    if (m.source_id >= model.source_count())
        throw InvalidArgument("measurement source_id " + std::to_string(m.source_id) + " has no measurement model");
    return model.H[m.source_id];
}

FilterState kalman_correct(const FilterState &fs, const MeasModel &H, const MeasVector &z, const MeasMatrix &R)
{
    FilterState out = fs;
    const StateVector x = fs.estimate.to_vector();
    const StateMatrix &P = fs.cov;

    const MeasMatrix S = H * P * H.transpose() + R;
    Eigen::LLT<MeasMatrix> llt(S);
    if (llt.info() != Eigen::Success)
        throw NumericError("update: innovation covariance is not positive definite", 0.0);

    // K = P H^T S^-1
    const Eigen::Matrix<double, kStateDim, kMeasDim> K = llt.solve(H * P).transpose();
    const StateVector xn = x + K * (z - H * x);
    const StateMatrix IKH = StateMatrix::Identity() - K * H;
    StateMatrix Pn = IKH * P * IKH.transpose() + K * R * K.transpose();
    Pn = 0.5 * (Pn + Pn.transpose()).eval();

    out.estimate = VehicleState::from_vector(xn, fs.estimate.timestamp);
    out.estimate.speed = std::max(0.0, out.estimate.speed);
    out.cov = Pn;
    return out;
}

} // namespace

void FilterModel::validate() const
{
    if (H.size() != R.size())
        throw InvalidArgument("FilterModel: H and R source counts differ");
    if (H.empty())
        throw InvalidArgument("FilterModel: at least one measurement source is required");
    if (!F.allFinite() || !B.allFinite())
        throw InvalidArgument("FilterModel: non-finite F or B");
    if (!(wheelbase > 0.0))
        throw InvalidArgument("FilterModel: wheelbase must be positive");
    require_valid_cov(Q, "FilterModel.Q");
    for (const auto &r : R)
        require_valid_cov(r, "FilterModel.R");
}

MeasModel FilterModel::position_measurement()
{
    MeasModel h = MeasModel::Zero();
    h(0, kX) = 1.0;
    h(1, kY) = 1.0;
    return h;
}

FilterModel FilterModel::bicycle(double wheelbase, const StateMatrix &q_density, const MeasMatrix &r,
                                 std::size_t sources)
{
    FilterModel m;
    m.kind = MotionModel::Bicycle;
    m.wheelbase = wheelbase;
    m.Q = q_density;
    m.H.assign(sources, position_measurement());
    m.R.assign(sources, r);
    return m;
}

void GateParams::validate() const
{
    if (!(epsilon > 0.0) || !(epsilon < delta) || !std::isfinite(delta))
        throw InvalidArgument("GateParams invariant violated: require 0 < epsilon < delta (epsilon=" +
                              std::to_string(epsilon) + ", delta=" + std::to_string(delta) + ")");
}

void StatusThresholds::validate() const
{
    if (warn < 1 || emergency < warn || recover < 1)
        throw InvalidArgument("StatusThresholds: require 1 <= warn <= emergency and recover >= 1");
}

std::string_view to_string(GateKind k)
{
    switch (k)
    {
    case GateKind::AllQualified:
        return "all_qualified";
    case GateKind::WeightedFuse:
        return "weighted";
    case GateKind::SingleFeasible:
        return "single";
    case GateKind::Reject:
        return "reject";
    }
    return "?";
}

std::string_view to_string(NavLevel l)
{
    switch (l)
    {
    case NavLevel::Nominal:
        return "nominal";
    case NavLevel::Warning:
        return "warning";
    case NavLevel::Emergency:
        return "emergency";
    }
    return "?";
}

FilterState predict(const FilterState &fs, const ControlInput &u, double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw InvalidArgument("predict: dt must be positive and finite");
    if (!std::isfinite(u.steer) || !std::isfinite(u.accel))
        throw InvalidArgument("predict: non-finite control input");

    FilterState out = fs;
    const auto &m = fs.model;
    if (m.kind == MotionModel::Linear)
    {
        Eigen::Vector2d uv(u.steer, u.accel);
        const StateVector xn = m.F * fs.estimate.to_vector() + m.B * uv;
        out.estimate = VehicleState::from_vector(xn, fs.estimate.timestamp + dt);
        out.cov = m.F * fs.cov * m.F.transpose() + m.Q;
    }
    else
    {
        const StateMatrix F = bicycle_jacobian(fs.estimate, u, dt, m.wheelbase);
        out.estimate = bicycle_step(fs.estimate, u, dt, m.wheelbase);
        out.cov = F * fs.cov * F.transpose() + m.Q * dt;
    }
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

double mahalanobis(const FilterState &fs, const Measurement &m)
{
    const MeasModel H = source_model(fs.model, m);
    const MeasMatrix S = H * fs.cov * H.transpose() + m.R;
    const MeasVector innov = m.z - H * fs.estimate.to_vector();
    Eigen::VectorXd sol;
    try
    {
        sol = solve_spd(S, innov);
    }
    catch (const InvalidArgument &e)
    {
        throw NumericError(std::string("mahalanobis: ") + e.what(), 0.0);
    }
    return std::sqrt(std::max(0.0, innov.dot(sol)));
}

std::vector<double> distances(const FilterState &fs, std::span<const Measurement> ms)
{
    std::vector<double> out;
    out.reserve(ms.size());
    for (const auto &m : ms)
    {
        try
        {
            out.push_back(mahalanobis(fs, m));
        }
        catch (const NumericError &)
        {
            out.push_back(std::numeric_limits<double>::infinity());
        }
    }
    return out;
}

GateDecision gate(std::span<const double> dist, const GateParams &p)
{
    p.validate();
    if (dist.empty())
        throw InvalidArgument("gate: no distances");
    for (double d : dist)
        if (std::isnan(d) || d < 0.0)
            throw InvalidArgument("gate: distances must be non-negative");

    GateDecision out;
    out.distances.assign(dist.begin(), dist.end());

    if (std::all_of(dist.begin(), dist.end(), [&](double d) { return d <= p.epsilon; }))
    {
        out.outcome = AllQualified{0};
        return out;
    }

    std::vector<std::size_t> feasible;
    for (std::size_t k = 0; k < dist.size(); ++k)
        if (dist[k] <= p.delta)
            feasible.push_back(k);

    if (feasible.empty())
    {
        out.outcome = Reject{};
        return out;
    }
    if (feasible.size() == 1)
    {
        out.outcome = SingleFeasible{feasible.front()};
        return out;
    }

    // lambda_k proportional to 1 - d_k / sum(d) over the feasible subset.
    double total = 0.0;
    for (auto k : feasible)
        total += dist[k];
    std::vector<double> w(dist.size(), 0.0);
    if (total > 0.0)
    {
        const double norm = static_cast<double>(feasible.size()) - 1.0;
        for (auto k : feasible)
            w[k] = (1.0 - dist[k] / total) / norm;
    }
    else
    {
        for (auto k : feasible)
            w[k] = 1.0 / static_cast<double>(feasible.size());
    }
    out.outcome = WeightedFuse{std::move(w)};
    return out;
}

GateDecision accept_all(std::span<const double> dist)
{
    if (dist.empty())
        throw InvalidArgument("accept_all: no distances");
    GateDecision out;
    out.distances.assign(dist.begin(), dist.end());
    if (dist.size() == 1)
        out.outcome = SingleFeasible{0};
    else
        out.outcome = WeightedFuse{std::vector<double>(dist.size(), 1.0 / static_cast<double>(dist.size()))};
    return out;
}

FilterState update(const FilterState &fs, std::span<const Measurement> ms, const GateDecision &d)
{
    if (d.distances.size() != ms.size())
        throw InvalidArgument("update: decision covers " + std::to_string(d.distances.size()) +
                              " sources but " + std::to_string(ms.size()) + " measurements were given");

    auto check_index = [&](std::size_t k) {
        if (k >= ms.size())
            throw InvalidArgument("update: decision selects source " + std::to_string(k) + " out of range");
    };

    FilterState out = std::visit(
        [&](const auto &o) -> FilterState {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, Reject>)
            {
                return fs;
            }
            else if constexpr (std::is_same_v<T, WeightedFuse>)
            {
                if (o.weights.size() != ms.size())
                    throw InvalidArgument("update: weight count does not match measurements");
                MeasModel H = MeasModel::Zero();
                MeasVector z = MeasVector::Zero();
                MeasMatrix R = MeasMatrix::Zero();
                for (std::size_t k = 0; k < ms.size(); ++k)
                {
                    const double l = o.weights[k];
                    if (l == 0.0)
                        continue;
                    H += l * source_model(fs.model, ms[k]);
                    z += l * ms[k].z;
                    R += l * l * ms[k].R;
                }
                return kalman_correct(fs, H, z, R);
            }
            else
            {
                check_index(o.chosen);
                const auto &m = ms[o.chosen];
                return kalman_correct(fs, source_model(fs.model, m), m.z, m.R);
            }
        },
        d.outcome);

    out.status = step_status(fs.status, d, fs.thresholds);
    return out;
}

NavStatus step_status(const NavStatus &s, const GateDecision &d, const StatusThresholds &cfg)
{
    NavStatus n = s;
    if (!d.accepted())
    {
        n.consecutive_rejects += 1;
        n.consecutive_accepts = 0;
        // One level per step, so Emergency is always preceded by Warning.
        if (n.level == NavLevel::Nominal && n.consecutive_rejects >= cfg.warn)
            n.level = NavLevel::Warning;
        else if (n.level == NavLevel::Warning && n.consecutive_rejects >= cfg.emergency)
            n.level = NavLevel::Emergency;
    }
    else
    {
        n.consecutive_accepts += 1;
        n.consecutive_rejects = 0;
        if (n.level == NavLevel::Warning)
            n.level = NavLevel::Nominal;
        else if (n.level == NavLevel::Emergency && n.consecutive_accepts >= cfg.recover)
            n.level = NavLevel::Nominal;
    }
    return n;
}

} // namespace resnav::fusion
