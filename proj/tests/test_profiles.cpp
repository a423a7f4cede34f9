#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "gasnet/profiles.hpp"

using namespace gasnet;

namespace {
constexpr double T = 86400.0;
}

TEST(Profiles, Constant) {
    const Profile p = Profile::constant(3.5, T);
    for (double t : {0.0, 100.0, 5e4, 2.5 * T}) {
        EXPECT_EQ(p.eval(t), 3.5);
        EXPECT_EQ(p.eval_deriv(t), 0.0);
    }
    EXPECT_EQ(p.mean(), 3.5);
}

TEST(Profiles, SinglePipeWithdrawal) {
    const Profile d = Profile::relative_sinusoid(68.094, 0.1, 2, T);
    EXPECT_NEAR(d.eval(0.0), 68.094, 1e-12);
    EXPECT_NEAR(d.eval(T / 8.0), 68.094 * 1.1, 1e-12);
    EXPECT_NEAR(d.eval_deriv(0.0), 0.0009903870840441823, 1e-17);
    EXPECT_NEAR(d.mean(), 68.094, 1e-12);
    EXPECT_NEAR(d.eval(0.3 * T), d.eval(1.3 * T), 1e-10);
}

TEST(Profiles, SplineInterpolatesAndIsPeriodic) {
    std::vector<double> knots, values;
    for (int k = 0; k < 24; ++k) {
        knots.push_back(k * T / 24.0);
        values.push_back(10.0 + std::sin(2.0 * std::numbers::pi * k / 24.0));
    }
    const Profile s = Profile::spline(T, knots, values);
    for (std::size_t k = 0; k < knots.size(); ++k) EXPECT_NEAR(s.eval(knots[k]), values[k], 1e-12);
    EXPECT_NEAR(s.eval(T), s.eval(0.0), 1e-12);
    EXPECT_NEAR(s.eval_deriv(T - 1e-9), s.eval_deriv(1e-9), 1e-9);
    // a smooth periodic signal is reproduced between knots
    for (double t : {1000.0, 33333.0, 70000.0}) EXPECT_NEAR(s.eval(t), 10.0 + std::sin(2.0 * std::numbers::pi * t / T), 2e-4);
    EXPECT_NEAR(s.mean(), 10.0, 1e-3);
}

TEST(Profiles, DerivativeMatchesFiniteDifference) {
    const Profile p(SinusoidSum{T, 5.0, {{1.0, 1, 0.3}, {0.4, 3, -1.0}}});
    const Profile s = Profile::spline(T, {0.0, 20000.0, 41000.0, 60000.0, 80000.0}, {1.0, 3.0, 2.0, 4.0, 1.5});
    for (double t : {1234.0, 40000.0, 77777.0}) {
        const double h = 1e-3;
        EXPECT_NEAR(p.eval_deriv(t), (p.eval(t + h) - p.eval(t - h)) / (2 * h), 1e-9);
        EXPECT_NEAR(s.eval_deriv(t), (s.eval(t + h) - s.eval(t - h)) / (2 * h), 1e-9);
    }
}

TEST(Profiles, Rescaling) {
    const Profile d = Profile::relative_sinusoid(68.094, 0.1, 2, T);
    const double ts = 265.25198938992042; // seconds per nondimensional time unit
    const Profile nd = d.rescaled(ts, 0.5);
    EXPECT_NEAR(nd.period(), T / ts, 1e-12);
    EXPECT_NEAR(nd.eval(T / 8.0 / ts), 0.5 * 68.094 * 1.1, 1e-12);
}

TEST(Profiles, RejectsInvalidSplines) {
    EXPECT_THROW(Profile::spline(T, {0.0, 1.0}, {1.0, 2.0}), Error);
    EXPECT_THROW(Profile::spline(T, {0.0, 2.0, 1.0}, {1.0, 2.0, 3.0}), Error);
    EXPECT_THROW(Profile::spline(T, {0.0, 1.0, T}, {1.0, 2.0, 3.0}), Error);
    EXPECT_THROW(Profile::constant(1.0, 0.0), Error);
}
