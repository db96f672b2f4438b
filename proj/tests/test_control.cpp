//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/control.hpp"
#include "frontnet/error.hpp"
#include "frontnet/rng.hpp"
#include "frontnet/scenario.hpp"

#include <doctest.h>

#include <cmath>

using namespace frontnet;

namespace
{

constexpr double kDeg = kPi / 180.0;

bool SymmetricPd(const std::array<double, 4>& P)
{
    return P[1] == P[2] && P[0] > 0.0 && P[0] * P[3] - P[1] * P[2] > 0.0;
}

}    // namespace

TEST_CASE("angle wrapping")
{
    CHECK(WrapAngle(0.0) == 0.0);
    CHECK(WrapAngle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
    CHECK(WrapAngle(-3 * kPi / 2) == doctest::Approx(kPi / 2));
    CHECK(WrapAngle(20 * kPi + 0.1) == doctest::Approx(0.1));
    Rng rng(1);
    for (int i = 0; i < 1000; ++i)
    {
        const double a = rng.Uniform(-100, 100);
        const double w = WrapAngle(a);
        CHECK(w >= -kPi);
        CHECK(w <= kPi);
        CHECK(std::abs(std::remainder(a - w, 2 * kPi)) < 1e-9);
    }
}

TEST_CASE("odometry transform examples")
{
    const Pose pred{ { 1.0, 2.0, 0.5 }, 0.3 };
    const Pose id = ToOdometry(pred, Pose{});
    CHECK(id.p[0] == doctest::Approx(1.0));
    CHECK(id.p[1] == doctest::Approx(2.0));
    CHECK(id.p[2] == doctest::Approx(0.5));
    CHECK(id.theta == doctest::Approx(0.3));

    const Pose r = ToOdometry(Pose{ { 1.0, 0.0, 0.0 }, 0.0 }, Pose{ { 0, 0, 0 }, kPi / 2 });
    CHECK(r.p[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.p[1] == doctest::Approx(1.0));
    CHECK(r.theta == doctest::Approx(kPi / 2));
}

TEST_CASE("odometry round trip")
{
    Rng rng(7);
    for (int i = 0; i < 2000; ++i)
    {
        const Pose drone{ { rng.Uniform(-10, 10), rng.Uniform(-10, 10), rng.Uniform(0, 3) }, rng.Uniform(-kPi, kPi) };
        const Pose pred{ { rng.Uniform(-5, 5), rng.Uniform(-5, 5), rng.Uniform(-1, 1) }, rng.Uniform(-kPi, kPi) };
        const Pose back = ToDroneFrame(ToOdometry(pred, drone), drone);
        for (int k = 0; k < 3; ++k)
        {
            CHECK(std::abs(back.p[k] - pred.p[k]) < 1e-12);
        }
        CHECK(std::abs(WrapAngle(back.theta - pred.theta)) < 1e-12);
        CHECK(std::abs(back.theta) <= kPi);
    }
}

TEST_CASE("noiseless filter converges to a constant-velocity track")
{
    KalmanComponent k;
    const double dt = 0.02;
    for (int n = 1; n <= 500; ++n)
    {
        KfStep(k, 0.5 + 1.5 * n * dt, dt, 0.0, 1e-12);
    }
    CHECK(k.x == doctest::Approx(0.5 + 1.5 * 500 * dt).epsilon(1e-6));
    CHECK(k.v == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(SymmetricPd(k.P));
}

TEST_CASE("predict-only covariance grows")
{
    KalmanComponent k;
    double prev = k.P[0];
    for (int n = 0; n < 200; ++n)
    {
        KfStep(k, std::nullopt, 0.01, 1.0, 0.01);
        CHECK(k.P[0] > prev);
        CHECK(SymmetricPd(k.P));
        prev = k.P[0];
    }
}

TEST_CASE("angular innovations are wrapped")
{
    KalmanComponent k;
    k.angular = true;
    k.x       = kPi - 0.05;
    k.P       = { 0.01, 0.0, 0.0, 0.01 };
    KfStep(k, -kPi + 0.05, 0.01, 0.1, 0.01);
    // The shortest way from just below pi to just above -pi crosses the seam.
    CHECK(std::abs(WrapAngle(k.x - kPi)) < 0.1);
    CHECK(std::abs(k.x) <= kPi);
}

TEST_CASE("invalid covariance is a numeric failure")
{
    KalmanComponent k;
    k.P = { -1.0, 0.0, 0.0, 1.0 };
    CHECK_THROWS_AS(KfStep(k, 1.0, 0.01, 1.0, 0.1), Error);
}

TEST_CASE("filter beats raw observations on noisy tracks")
{
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed)
    {
        Rng rng(seed);
        const double x0 = rng.Uniform(-2, 2), v0 = rng.Uniform(-1, 1), sigma = 0.25, dt = 1.0 / 48.0;
        KalmanComponent k;
        k.P = { 1.0, 0.0, 0.0, 1.0 };
        double seRaw = 0.0, seKf = 0.0;
        for (int n = 0; n < 480; ++n)
        {
            const double truth = x0 + v0 * n * dt;
            const double obs   = truth + rng.Normal(0.0, sigma);
            KfStep(k, obs, dt, 0.01, sigma * sigma);
            if (n >= 48)
            {
                seRaw += (obs - truth) * (obs - truth);
                seKf += (k.x - truth) * (k.x - truth);
            }
        }
        wins += seKf < seRaw ? 1 : 0;
    }
    CHECK(wins == 100);
}

TEST_CASE("command examples")
{
    ControlConfig cfg;
    cfg.tau = 1.0;

    SubjectState s;
    s.pose = { { 0.0, 0.0, 1.6 }, kPi / 2 };    // subject faces +y, toward the drone
    const Pose drone{ { 0.0, 3.6, 1.3 }, -kPi / 2 };
    VelocityCommand c = ComputeCommand(drone, s, cfg);
    // Target 1.3 m in front of the subject: (3.6 - 1.3) / 1 = 2.3 m/s, clamped.
    CHECK(c.v[1] == doctest::Approx(-1.0));
    CHECK(c.v[0] == doctest::Approx(0.0));
    CHECK(c.v[2] == 0.0);
    CHECK(c.omega == doctest::Approx(0.0).epsilon(1e-12));

    // Already at the target, facing the subject, subject still: nothing to do.
    const Pose there{ { 0.0, 1.3, 1.3 }, -kPi / 2 };
    c = ComputeCommand(there, s, cfg);
    CHECK(std::abs(c.v[0]) < 1e-12);
    CHECK(std::abs(c.v[1]) < 1e-12);
    CHECK(std::abs(c.omega) < 1e-12);

    // Subject 30 degrees to the left of boresight.
    const Pose side{ { 0.0, 0.0, 1.3 }, 0.0 };
    SubjectState off;
    off.pose = { { 2.0 * std::cos(30 * kDeg), 2.0 * std::sin(30 * kDeg), 1.6 }, kPi };
    c        = ComputeCommand(side, off, cfg);
    CHECK(c.omega == doctest::Approx(0.5236).epsilon(1e-4));

    // 60 degrees saturates.
    off.pose.p = { std::cos(60 * kDeg), std::sin(60 * kDeg), 1.6 };
    CHECK(ComputeCommand(side, off, cfg).omega == doctest::Approx(0.8));
}

TEST_CASE("coincident subject keeps the heading")
{
    SubjectState s;
    s.pose = { { 1.0, 1.0, 1.6 }, 0.0 };
    const VelocityCommand c = ComputeCommand(Pose{ { 1.0, 1.0, 1.3 }, 0.4 }, s, ControlConfig{});
    CHECK(c.omega == 0.0);
}

TEST_CASE("dynamics: rest stays at rest")
{
    DroneState s;
    s.pose = { { 1.0, 2.0, 1.3 }, 0.2 };
    for (int i = 0; i < 1000; ++i)
    {
        CHECK(StepDynamics(s, VelocityCommand{}, 0.002, DynamicsConfig{}) == 0.0);
    }
    CHECK(s.pose.p[0] == 1.0);
    CHECK(s.pose.p[1] == 2.0);
    CHECK(s.pose.theta == 0.2);
}

TEST_CASE("dynamics: first-order approach with time constant T_v")
{
    DynamicsConfig cfg;
    cfg.accelLimit = 1e9;    // unclamped to see the pure lag
    DroneState s;
    VelocityCommand c;
    c.v[0]          = 0.5;
    const double dt = 0.0005;
    for (double t = 0; t < cfg.tv - 1e-12; t += dt)
    {
        StepDynamics(s, c, dt, cfg);
    }
    CHECK(s.vel[0] == doctest::Approx(0.5 * (1 - std::exp(-1.0))).epsilon(2e-3));
    CHECK_THROWS_AS(StepDynamics(s, c, 0.02, cfg), Error);
}

TEST_CASE("dynamics: acceleration bound under random commands")
{
    Rng rng(3);
    DroneState s;
    const DynamicsConfig cfg;
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i)
    {
        VelocityCommand c;
        if (i % 50 == 0)
        {
            c.v   = { rng.Uniform(-1, 1), rng.Uniform(-1, 1), 0.0 };
            c.omega = rng.Uniform(-0.8, 0.8);
        }
        const Vec3 before = s.vel;
        const double a    = StepDynamics(s, c, 0.002, cfg);
        const double meas = std::hypot(s.vel[0] - before[0], s.vel[1] - before[1]) / 0.002;
        CHECK(meas == doctest::Approx(a).epsilon(1e-9));
        worst = std::max(worst, a);
    }
    CHECK(worst <= 9.81 * std::sin(12 * kDeg) + 1e-12);
    CHECK(worst == doctest::Approx(2.04).epsilon(1e-2));
}

TEST_CASE("scripted subject path")
{
    const ScenarioScript sc;
    CHECK(sc.TotalDuration() == doctest::Approx(50.0));
    CHECK(sc.PhaseAt(0.0) == 0);
    CHECK(sc.PhaseAt(49.99) == 7);
    CHECK(sc.PhaseAt(1e6) == 7);
    const Pose d0 = sc.InitialDrone();
    const Pose h0 = sc.SubjectAt(0.0).pose;
    CHECK(std::hypot(d0.p[0] - h0.p[0], d0.p[1] - h0.p[1]) == doctest::Approx(3.6));
    // The drone must turn left by 30 degrees to face the subject.
    const double bearing = std::atan2(h0.p[1] - d0.p[1], h0.p[0] - d0.p[0]);
    CHECK(WrapAngle(bearing - d0.theta) == doctest::Approx(30 * kDeg));
    // Continuous in time.
    for (double t = 0.0; t < 50.0; t += 0.01)
    {
        const Pose a = sc.SubjectAt(t).pose;
        const Pose b = sc.SubjectAt(t + 0.01).pose;
        CHECK(std::hypot(a.p[0] - b.p[0], a.p[1] - b.p[1]) < 0.03);
        CHECK(std::abs(WrapAngle(a.theta - b.theta)) < 0.03);
    }
}

TEST_CASE("mocap run converges and keeps the subject in view")
{
    const SimResult r = RunExperiment(DefaultSimConfig("mocap", 1));
    CHECK(std::abs(r.metrics.phase0Distance - 1.3) < 0.1);
    CHECK(r.metrics.etheta.median < 5 * kDeg);
    CHECK(r.log.back().phase == 7);
    CHECK(r.log.back().t == doctest::Approx(50.0).epsilon(1e-3));
    CHECK(r.metrics.maxCmdSpeed <= 1.0);
    CHECK(r.metrics.maxCmdOmega <= 0.8);
    CHECK(r.metrics.maxAccel <= 2.04);
    CHECK(r.metrics.r2[0] > 0.99);
}

TEST_CASE("runs are deterministic")
{
    const SimConfig c = DefaultSimConfig("160x16", 9);
    CHECK(TrajectoryCsv(RunExperiment(c), "x") == TrajectoryCsv(RunExperiment(c), "x"));
    CHECK(TrajectoryCsv(RunExperiment(c), "x") != TrajectoryCsv(RunExperiment(DefaultSimConfig("160x16", 10)), "x"));
}

TEST_CASE("stationary subject is regulated to the fixed point")
{
    SimConfig c = DefaultSimConfig("mocap", 1);
    // Collapse the moving phases; the subject then stands still for the last 30 s.
    for (double& d : c.script.durations)
    {
        d = 1e-3;
    }
    c.script.durations[0] = 5.0;
    c.script.durations[7] = 30.0;
    c.script.walkDistance = 0.0;
    const SimResult r     = RunExperiment(c);
    CHECK(r.log.back().exy < 1e-3);
    CHECK(r.log.back().etheta < 1e-3);
}

TEST_CASE("filter covariance stays positive definite at the fastest rate")
{
    SimConfig c = DefaultSimConfig("80x32", 4);
    CHECK_NOTHROW(RunExperiment(c));
    SubjectFilter f(c.kalman);
    f.Reset(Pose{}, 0.0);
    Rng rng(2);
    for (int n = 1; n <= 135 * 50; ++n)
    {
        f.Observe(Pose{ { rng.Normal(0, 0.25), rng.Normal(0, 0.28), rng.Normal(0, 0.14) }, rng.Normal(0, 0.6) },
                  n / 135.0);
    }
    for (const KalmanComponent& k : f.Components())
    {
        CHECK(SymmetricPd(k.P));
    }
}

TEST_CASE("noise-free observations give the best tracking")
{
    for (const char* net : { "160x32", "160x16", "80x32" })
    {
        int better = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed)
        {
            const double m = RunExperiment(DefaultSimConfig("mocap", seed)).metrics.exy.median;
            const SimMetrics n = RunExperiment(DefaultSimConfig(net, seed)).metrics;
            better += m < n.exy.median ? 1 : 0;
            CHECK(n.etheta.median < 40.5 * kDeg);
        }
        CAPTURE(net);
        CHECK(better == 20);
    }
}

TEST_CASE("controller horizon sensitivity")
{
    // Shorter horizons chase harder; every setting must still respect the clamps and converge.
    for (double tau : { 0.25, 0.5, 1.0, 2.0 })
    {
        SimConfig c   = DefaultSimConfig("mocap", 1);
        c.control.tau = tau;
        const SimResult r = RunExperiment(c);
        CAPTURE(tau);
        CHECK(r.metrics.maxCmdSpeed <= 1.0);
        CHECK(r.metrics.maxCmdOmega <= 0.8);
        CHECK(r.metrics.etheta.median < 40.5 * kDeg);
        CHECK(std::abs(r.metrics.phase0Distance - 1.3) < 0.3);
    }
}

TEST_CASE("config JSON roundtrip and validation")
{
    const SimConfig c = DefaultSimConfig("160x16", 3);
    const SimConfig r = SimConfigFromJson(SimConfigToJson(c));
    CHECK(SimConfigToJson(r) == SimConfigToJson(c));
    nlohmann::json bad = SimConfigToJson(c);
    bad["control"]["tau"] = -1.0;
    CHECK_THROWS_AS(SimConfigFromJson(bad), Error);
    CHECK_THROWS_AS(DefaultSimConfig("120x8", 1), Error);
}
