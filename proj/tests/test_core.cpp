#include "resnav/core.hpp"

#include <doctest.h>

#include <random>

using namespace resnav;

TEST_CASE("normalize_angle examples")
{
    CHECK(normalize_angle(0.0) == 0.0);
    CHECK(normalize_angle(3.0 * kPi) == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(normalize_angle(-kPi) == kPi);
    CHECK(normalize_angle(kPi) == kPi);
    CHECK(normalize_angle(-0.5) == -0.5);
    CHECK_THROWS_AS(normalize_angle(NAN), InvalidArgument);
    CHECK_THROWS_AS(normalize_angle(INFINITY), InvalidArgument);
}

TEST_CASE("normalize_angle is idempotent and in range")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < 10000; ++i)
    {
        const double a = u(rng);
        const double n = normalize_angle(a);
        CHECK(n > -kPi);
        CHECK(n <= kPi);
        CHECK(normalize_angle(n) == n);
        CHECK(std::remainder(a - n, 2.0 * kPi) == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("solve_spd examples")
{
    Eigen::VectorXd x = solve_spd(Eigen::Matrix2d::Identity(), Eigen::Vector2d(3, 4));
    CHECK(x(0) == doctest::Approx(3.0));
    CHECK(x(1) == doctest::Approx(4.0));

    Eigen::Matrix2d d = Eigen::Vector2d(2, 4).asDiagonal();
    x = solve_spd(d, Eigen::Vector2d(2, 4));
    CHECK(x(0) == doctest::Approx(1.0));
    CHECK(x(1) == doctest::Approx(1.0));
}

TEST_CASE("solve_spd rejects singular and indefinite matrices")
{
    Eigen::Matrix2d s;
    s << 1, 1, 1, 1;
    CHECK_THROWS_AS(solve_spd(s, Eigen::Vector2d(1, 0)), NumericError);
    Eigen::Matrix2d ind;
    ind << 1, 0, 0, -1;
    CHECK_THROWS_AS(solve_spd(ind, Eigen::Vector2d(1, 0)), NumericError);
    try
    {
        solve_spd(s, Eigen::Vector2d(1, 0));
    }
    catch (const NumericError &e)
    {
        CHECK(e.condition() < 1e-10);
    }
    CHECK_THROWS_AS(solve_spd(Eigen::Matrix2d::Identity(), Eigen::Vector3d(1, 2, 3)), InvalidArgument);
}

TEST_CASE("solve_spd residual bound on random SPD systems")
{
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial)
    {
        const int n = 2 + trial % 5;
        Eigen::MatrixXd M(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                M(i, j) = g(rng);
        const Eigen::MatrixXd A = M * M.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i)
            b(i) = g(rng);
        const Eigen::VectorXd x = solve_spd(A, b);
        CHECK((A * x - b).norm() <= 1e-9 * b.norm());
    }
}

TEST_CASE("covariance helpers")
{
    Eigen::Matrix2d m;
    m << 2, 1, 1 + 1e-12, 2;
    CHECK(is_valid_covariance(m));
    Eigen::Matrix2d bad;
    bad << 1, 0, 0, -1;
    CHECK_FALSE(is_valid_covariance(bad));
    Eigen::Matrix2d asym;
    asym << 1, 0.5, 0, 1;
    CHECK_FALSE(is_valid_covariance(asym));
    const Eigen::MatrixXd s = symmetrize(asym);
    CHECK(s(0, 1) == doctest::Approx(0.25));
    CHECK(s(1, 0) == doctest::Approx(0.25));

    // Symmetrization keeps eigenvalue signs.
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial)
    {
        Eigen::Matrix3d M;
        for (int i = 0; i < 9; ++i)
            M(i) = g(rng);
        Eigen::Matrix3d A = M * M.transpose();
        A(0, 1) += 1e-11;
        const Eigen::MatrixXd S = symmetrize(A);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
        CHECK(es.eigenvalues().minCoeff() >= -1e-9);
    }
}

TEST_CASE("clamp_control")
{
    CHECK(clamp_control({0.5, 1.0}).steer == doctest::Approx(0.3));
    CHECK(clamp_control({-0.5, 1.0}).steer == doctest::Approx(-0.3));
    CHECK(clamp_control({0.1, 1.0}, 0.05).steer == doctest::Approx(0.05));
    CHECK(clamp_control({0.1, 2.5}).accel == 2.5);
}

TEST_CASE("bicycle_step kinematics")
{
    VehicleState s;
    s.speed = 50.0;
    const auto n = bicycle_step(s, {0.0, 0.0}, 0.1, 3.048);
    CHECK(n.pose.x == doctest::Approx(5.0));
    CHECK(n.pose.y == doctest::Approx(0.0));
    CHECK(n.timestamp == doctest::Approx(0.1));

    VehicleState slow;
    slow.speed = 0.5;
    CHECK(bicycle_step(slow, {0.0, -10.0}, 0.1, 3.0).speed == 0.0);

    const auto r = bicycle_step(s, {0.1, 0.0}, 0.01, 3.048);
    CHECK(r.yaw_rate == doctest::Approx(50.0 * std::tan(0.1) / 3.048));
}

TEST_CASE("state vector round trip")
{
    VehicleState s;
    s.pose = {1.0, 2.0, 0.3};
    s.speed = 4.0;
    s.yaw_rate = -0.1;
    const auto v = s.to_vector();
    CHECK(v(kX) == 1.0);
    CHECK(v(kYawRate) == -0.1);
    const auto back = VehicleState::from_vector(v, 2.5);
    CHECK(back.pose.yaw == doctest::Approx(0.3));
    CHECK(back.timestamp == 2.5);
    CHECK(is_finite(back));
}
