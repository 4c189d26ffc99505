#include "resnav/fusion.hpp"
#include "resnav/testing/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace resnav;
using namespace resnav::fusion;

namespace
{

FilterState bicycle_state(std::size_t sources = 2)
{
    FilterState fs;
    StateMatrix q = StateMatrix::Identity() * 0.01;
    fs.model = FilterModel::bicycle(3.048, q, 0.01 * MeasMatrix::Identity(), sources);
    fs.cov = StateMatrix::Identity();
    return fs;
}

GateDecision decide(std::vector<double> d) { return gate(d, GateParams{0.2, 5.0}); }

std::vector<Measurement> position_fixes(std::initializer_list<Eigen::Vector2d> zs, double r = 0.01)
{
    std::vector<Measurement> out;
    std::size_t id = 0;
    for (const auto &z : zs)
        out.push_back({id++, z, r * MeasMatrix::Identity(), 0.0});
    return out;
}

} // namespace

TEST_CASE("predict: stationary vehicle keeps its pose and grows by Q")
{
    auto fs = bicycle_state();
    fs.estimate.pose = {1.0, 2.0, 0.5};
    // Yaw rate is recomputed from the controls, so its prior variance is
    // replaced by Q * dt; keep it at that level here.
    fs.cov(kYawRate, kYawRate) = 0.01 * 0.01;
    const auto p = predict(fs, {0.0, 0.0}, 0.01);
    CHECK(p.estimate.pose.x == 1.0);
    CHECK(p.estimate.pose.y == 2.0);
    CHECK(p.estimate.pose.yaw == 0.5);
    CHECK(p.estimate.timestamp == doctest::Approx(0.01));
    CHECK(p.cov.trace() >= fs.cov.trace());
    // Speed uncertainty still leaks into position at standstill.
    const double c = std::cos(0.5) * 0.01;
    CHECK(p.cov(kX, kX) == doctest::Approx(1.0 + c * c + 0.01 * 0.01).epsilon(1e-12));
    CHECK(p.cov(kSpeed, kSpeed) == doctest::Approx(1.0 + 0.01 * 0.01).epsilon(1e-12));
    CHECK(p.cov(kYaw, kYaw) == doctest::Approx(1.0 + 0.01 * 0.01).epsilon(1e-12));
}

TEST_CASE("predict: straight-line advance")
{
    auto fs = bicycle_state();
    fs.estimate.speed = 50.0;
    const auto p = predict(fs, {0.0, 0.0}, 0.1);
    CHECK(p.estimate.pose.x == doctest::Approx(5.0));
    CHECK(p.estimate.pose.y == doctest::Approx(0.0));
}

TEST_CASE("predict: rejects bad dt and control")
{
    auto fs = bicycle_state();
    CHECK_THROWS_AS(predict(fs, {}, 0.0), InvalidArgument);
    CHECK_THROWS_AS(predict(fs, {}, -1.0), InvalidArgument);
    CHECK_THROWS_AS(predict(fs, {}, NAN), InvalidArgument);
    CHECK_THROWS_AS(predict(fs, {NAN, 0.0}, 0.01), InvalidArgument);
}

TEST_CASE("predict: chained linear steps equal the composed transition")
{
    FilterState fs;
    fs.model.kind = MotionModel::Linear;
    fs.model.H = {FilterModel::position_measurement()};
    fs.model.R = {MeasMatrix::Identity()};
    StateMatrix F = StateMatrix::Identity();
    F(kX, kSpeed) = 0.01;
    F(kY, kYawRate) = 0.01;
    F(kSpeed, kSpeed) = 0.999;
    fs.model.F = F;
    fs.model.B(kSpeed, 1) = 0.01;
    fs.model.Q = StateMatrix::Zero();
    StateVector x0;
    x0 << 1.0, 2.0, 0.0, 3.0, -1.0;
    fs.estimate = VehicleState::from_vector(x0, 0.0);
    fs.cov = 0.5 * StateMatrix::Identity();

    auto cur = fs;
    for (int i = 0; i < 100; ++i)
        cur = predict(cur, {0.0, 0.0}, 0.01);
    StateMatrix F100 = StateMatrix::Identity();
    for (int i = 0; i < 100; ++i)
        F100 = F * F100;
    const StateVector want = F100 * x0;
    CHECK((cur.estimate.to_vector() - want).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((cur.cov - F100 * fs.cov * F100.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("predict: trace non-decreasing for the linear model with F = I and Q > 0")
{
    FilterState fs;
    fs.model.kind = MotionModel::Linear;
    fs.model.H = {FilterModel::position_measurement()};
    fs.model.R = {MeasMatrix::Identity()};
    fs.model.Q = 1e-3 * StateMatrix::Identity();
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    for (int t = 0; t < 100; ++t)
    {
        StateMatrix M;
        for (int i = 0; i < 25; ++i)
            M(i) = g(rng);
        fs.cov = M * M.transpose();
        const auto p = predict(fs, {0.1, 0.2}, 0.01);
        CHECK(p.cov.trace() >= fs.cov.trace());
        CHECK(is_valid_covariance(p.cov));
    }
}

TEST_CASE("mahalanobis examples")
{
    FilterState fs;
    fs.model.kind = MotionModel::Linear;
    fs.model.H = {FilterModel::position_measurement()};
    fs.model.R = {MeasMatrix::Identity()};
    fs.cov = StateMatrix::Zero();
    fs.estimate.pose = {1.0, 1.0, 0.0};

    CHECK(mahalanobis(fs, {0, {1.0, 1.0}, MeasMatrix::Identity(), 0.0}) == 0.0);
    CHECK(mahalanobis(fs, {0, {4.0, 5.0}, MeasMatrix::Identity(), 0.0}) == doctest::Approx(5.0));
    MeasMatrix S = Eigen::Vector2d(4.0, 1.0).asDiagonal();
    CHECK(mahalanobis(fs, {0, {3.0, 1.0}, S, 0.0}) == doctest::Approx(1.0));

    CHECK_THROWS_AS(mahalanobis(fs, {0, {3.0, 1.0}, MeasMatrix::Zero(), 0.0}), NumericError);
    const std::vector<Measurement> ms{{0, {3.0, 1.0}, MeasMatrix::Zero(), 0.0}};
    CHECK(std::isinf(distances(fs, ms).front()));
    CHECK_THROWS_AS(mahalanobis(fs, {3, {3.0, 1.0}, MeasMatrix::Identity(), 0.0}), InvalidArgument);
}

TEST_CASE("gate: worked examples")
{
    auto d = decide({0.1, 0.15});
    REQUIRE(d.kind() == GateKind::AllQualified);
    CHECK(std::get<AllQualified>(d.outcome).chosen == 0);

    d = decide({1.0, 1.0});
    REQUIRE(d.kind() == GateKind::WeightedFuse);
    CHECK(std::get<WeightedFuse>(d.outcome).weights == std::vector<double>{0.5, 0.5});

    d = decide({0.5, 6.0});
    REQUIRE(d.kind() == GateKind::SingleFeasible);
    CHECK(std::get<SingleFeasible>(d.outcome).chosen == 0);

    CHECK(decide({7.0, 9.0}).kind() == GateKind::Reject);
    CHECK_FALSE(decide({7.0, 9.0}).accepted());
    CHECK_THROWS_AS(decide({}), InvalidArgument);
    CHECK_THROWS_AS(decide({-1.0}), InvalidArgument);
}

TEST_CASE("gate: hand-computed table")
{
    for (const auto &row : testing::gate_table())
    {
        const auto d = decide(row.distances);
        CHECK(d.kind() == row.expected);
        if (row.expected == GateKind::WeightedFuse)
        {
            const auto &w = std::get<WeightedFuse>(d.outcome).weights;
            REQUIRE(w.size() == row.expected_weights.size());
            for (std::size_t k = 0; k < w.size(); ++k)
                CHECK(w[k] == doctest::Approx(row.expected_weights[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("gate: scale invariance, exhaustiveness, weights sum to one")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 8.0);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    for (int t = 0; t < 2000; ++t)
    {
        std::vector<double> d(1 + t % 4);
        for (auto &x : d)
            x = t % 3 == 0 ? 0.2 * u(rng) / 8.0 : u(rng);
        const auto base = gate(d, {0.2, 5.0});
        const double c = scale(rng);
        std::vector<double> ds = d;
        for (auto &x : ds)
            x *= c;
        const auto scaled = gate(ds, {0.2 * c, 5.0 * c});
        CHECK(base.kind() == scaled.kind());
        if (base.kind() == GateKind::WeightedFuse)
        {
            const auto &a = std::get<WeightedFuse>(base.outcome).weights;
            const auto &b = std::get<WeightedFuse>(scaled.outcome).weights;
            double sum = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k)
            {
                CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
                CHECK(a[k] >= 0.0);
                sum += a[k];
            }
            CHECK(sum == doctest::Approx(1.0));
            // Lower distance, higher weight.
            for (std::size_t i = 0; i < d.size(); ++i)
                for (std::size_t j = 0; j < d.size(); ++j)
                    if (d[i] <= 5.0 && d[j] <= 5.0 && d[i] < d[j])
                        CHECK(a[i] >= a[j]);
        }
    }
}

TEST_CASE("GateParams validation")
{
    CHECK_NOTHROW((GateParams{0.2, 5.0}.validate()));
    CHECK_THROWS_WITH_AS((GateParams{5.0, 5.0}.validate()), doctest::Contains("GateParams"), InvalidArgument);
    CHECK_THROWS_AS((GateParams{0.0, 5.0}.validate()), InvalidArgument);
    const std::vector<double> d{1.0, 2.0};
    CHECK_THROWS_AS(gate(d, GateParams{3.0, 2.0}), InvalidArgument);
}

TEST_CASE("update: reject keeps the estimate bit-identical")
{
    auto fs = bicycle_state();
    fs.estimate.pose = {3.0, 4.0, 0.1};
    const auto ms = position_fixes({{100.0, 100.0}, {200.0, 200.0}});
    const auto d = decide(distances(fs, ms));
    REQUIRE(d.kind() == GateKind::Reject);
    const auto out = update(fs, ms, d);
    CHECK(out.estimate.to_vector() == fs.estimate.to_vector());
    CHECK(out.cov == fs.cov);
    CHECK(out.status.consecutive_rejects == 1);
    CHECK(out.status.level == NavLevel::Warning);
}

TEST_CASE("update: near-perfect measurement pins the position")
{
    auto fs = bicycle_state(1);
    const auto ms = position_fixes({{0.3, -0.2}}, 1e-12);
    GateDecision d;
    d.outcome = SingleFeasible{0};
    d.distances = {0.0};
    const auto out = update(fs, ms, d);
    CHECK(std::abs(out.estimate.pose.x - 0.3) < 1e-6);
    CHECK(std::abs(out.estimate.pose.y + 0.2) < 1e-6);
}

TEST_CASE("update: weighted fusion of two fixes pulls toward their midpoint")
{
    FilterState fs;
    fs.model.kind = MotionModel::Linear;
    fs.model.H = {FilterModel::position_measurement(), FilterModel::position_measurement()};
    fs.model.R = {MeasMatrix::Identity(), MeasMatrix::Identity()};
    fs.cov = StateMatrix::Identity();
    const auto ms = position_fixes({{0.0, 0.0}, {2.0, 0.0}}, 1.0);
    GateDecision d;
    d.outcome = WeightedFuse{{0.5, 0.5}};
    d.distances = {1.0, 1.0};
    const auto out = update(fs, ms, d);
    // Composite z = (1, 0), R = 0.5 I, P = I: K = 1 / 1.5 on the position block.
    CHECK(out.estimate.pose.x == doctest::Approx(1.0 / 1.5));
    CHECK(out.estimate.pose.y == doctest::Approx(0.0));
    CHECK(out.cov(kX, kX) == doctest::Approx(1.0 - 1.0 / 1.5));
    CHECK(out.cov(kSpeed, kSpeed) == doctest::Approx(1.0));
}

TEST_CASE("update: accept branches never grow the trace and keep a valid covariance")
{
    std::mt19937_64 rng(23);
    std::normal_distribution<double> g;
    for (int t = 0; t < 300; ++t)
    {
        auto fs = bicycle_state();
        StateMatrix M;
        for (int i = 0; i < 25; ++i)
            M(i) = g(rng);
        fs.cov = M * M.transpose() + 0.01 * StateMatrix::Identity();
        fs.estimate.pose = {g(rng), g(rng), 0.2 * g(rng)};
        fs.estimate.speed = 10.0;
        const auto ms = position_fixes({{g(rng), g(rng)}, {g(rng), g(rng)}}, 0.05 + std::abs(g(rng)));
        const auto d = decide(distances(fs, ms));
        const auto out = update(fs, ms, d);
        if (d.accepted())
            CHECK(out.cov.trace() <= fs.cov.trace() + 1e-9);
        CHECK(is_valid_covariance(out.cov));
    }
}

TEST_CASE("update: decision and measurement mismatch")
{
    auto fs = bicycle_state();
    const auto ms = position_fixes({{0.0, 0.0}});
    CHECK_THROWS_AS(update(fs, ms, decide({0.1, 0.1})), InvalidArgument);
    GateDecision bad;
    bad.outcome = SingleFeasible{3};
    bad.distances = {0.5};
    CHECK_THROWS_AS(update(fs, ms, bad), InvalidArgument);
}

TEST_CASE("status machine")
{
    const StatusThresholds cfg;
    const auto acc = decide({0.1});
    const auto rej = decide({9.0});
    NavStatus s;
    s = step_status(s, acc, cfg);
    CHECK(s.level == NavLevel::Nominal);

    s = step_status(s, rej, cfg);
    CHECK(s.level == NavLevel::Warning);
    s = step_status(s, rej, cfg);
    CHECK(s.level == NavLevel::Warning);
    s = step_status(s, rej, cfg);
    CHECK(s.level == NavLevel::Emergency);

    for (int i = 0; i < 4; ++i)
    {
        s = step_status(s, acc, cfg);
        CHECK(s.level == NavLevel::Emergency);
    }
    s = step_status(s, acc, cfg);
    CHECK(s.level == NavLevel::Nominal);

    // Warning clears on the first accept.
    NavStatus w;
    w = step_status(w, rej, cfg);
    w = step_status(w, acc, cfg);
    CHECK(w.level == NavLevel::Nominal);

    // An interrupted recovery starts over.
    NavStatus e;
    for (int i = 0; i < 3; ++i)
        e = step_status(e, rej, cfg);
    for (int i = 0; i < 4; ++i)
        e = step_status(e, acc, cfg);
    e = step_status(e, rej, cfg);
    for (int i = 0; i < 4; ++i)
        e = step_status(e, acc, cfg);
    CHECK(e.level == NavLevel::Emergency);
}

TEST_CASE("status machine never skips Warning")
{
    StatusThresholds cfg{1, 1, 2};
    std::mt19937_64 rng(4);
    NavStatus s;
    for (int i = 0; i < 5000; ++i)
    {
        const bool reject = rng() % 3 != 0;
        const auto n = step_status(s, reject ? decide({9.0}) : decide({0.1}), cfg);
        if (s.level == NavLevel::Nominal)
            CHECK(n.level != NavLevel::Emergency);
        s = n;
    }
}

TEST_CASE("accept_all fuses every source")
{
    const std::vector<double> d{100.0, 3.0};
    const auto a = accept_all(d);
    REQUIRE(a.kind() == GateKind::WeightedFuse);
    CHECK(std::get<WeightedFuse>(a.outcome).weights == std::vector<double>{0.5, 0.5});
    const std::vector<double> one{100.0};
    CHECK(accept_all(one).kind() == GateKind::SingleFeasible);
}

TEST_CASE("model validation")
{
    FilterModel m = FilterModel::bicycle(3.0, StateMatrix::Identity(), MeasMatrix::Identity(), 2);
    CHECK_NOTHROW(m.validate());
    m.R.pop_back();
    CHECK_THROWS_AS(m.validate(), InvalidArgument);
    FilterModel bad = FilterModel::bicycle(3.0, -StateMatrix::Identity(), MeasMatrix::Identity(), 1);
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}
