//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/control.hpp"

#include "frontnet/error.hpp"

#include <algorithm>
#include <cmath>

namespace frontnet
{

double WrapAngle(double a)
{
    if (!std::isfinite(a))
    {
        Fail(ErrorKind::Numeric, "non-finite angle");
    }
    double w = std::remainder(a, 2.0 * kPi);
    // remainder can land a hair outside on the boundary
    return std::clamp(w, -kPi, kPi);
}

Pose ToOdometry(const Pose& pred, const Pose& drone)
{
    const double c = std::cos(drone.theta);
    const double s = std::sin(drone.theta);
    Pose out;
    out.p[0]  = drone.p[0] + c * pred.p[0] - s * pred.p[1];
    out.p[1]  = drone.p[1] + s * pred.p[0] + c * pred.p[1];
    out.p[2]  = drone.p[2] + pred.p[2];
    out.theta = WrapAngle(pred.theta + drone.theta);
    return out;
}

Pose ToDroneFrame(const Pose& world, const Pose& drone)
{
    const double c  = std::cos(drone.theta);
    const double s  = std::sin(drone.theta);
    const double dx = world.p[0] - drone.p[0];
    const double dy = world.p[1] - drone.p[1];
    Pose out;
    out.p[0]  = c * dx + s * dy;
    out.p[1]  = -s * dx + c * dy;
    out.p[2]  = world.p[2] - drone.p[2];
    out.theta = WrapAngle(world.theta - drone.theta);
    return out;
}

void KfStep(KalmanComponent& k, std::optional<double> obs, double dt, double q, double r)
{
    if (!(dt > 0.0) || !(q >= 0.0) || !(r > 0.0))
    {
        Fail(ErrorKind::InvalidArgument, "filter step needs dt > 0, q >= 0 and r > 0");
    }
    if (!(k.P[0] > 0.0) || !(k.P[0] * k.P[3] - k.P[1] * k.P[2] > 0.0))
    {
        Fail(ErrorKind::Numeric, "filter covariance is not positive definite");
    }
    // Predict with white acceleration noise.
    auto& P         = k.P;
    k.x += k.v * dt;
    const double p00 = P[0] + dt * (P[1] + P[2]) + dt * dt * P[3] + q * dt * dt * dt * dt / 4.0;
    const double p01 = P[1] + dt * P[3] + q * dt * dt * dt / 2.0;
    const double p10 = P[2] + dt * P[3] + q * dt * dt * dt / 2.0;
    const double p11 = P[3] + q * dt * dt;
    P                = { p00, p01, p10, p11 };

    if (obs)
    {
        double innov = *obs - k.x;
        if (k.angular)
        {
            innov = WrapAngle(innov);
        }
        const double s  = P[0] + r;
        const double k0 = P[0] / s;
        const double k1 = P[2] / s;
        k.x += k0 * innov;
        k.v += k1 * innov;
        // Joseph form keeps the update well conditioned.
        const double a00 = 1.0 - k0, a10 = -k1;
        const double n00 = a00 * a00 * P[0] + r * k0 * k0;
        const double n01 = a00 * (a10 * P[0] + P[1]) + r * k0 * k1;
        const double n11 = a10 * a10 * P[0] + 2.0 * a10 * P[1] + P[3] + r * k1 * k1;
        P                = { n00, n01, n01, n11 };
    }
    if (k.angular)
    {
        k.x = WrapAngle(k.x);
    }
    const double sym = 0.5 * (P[1] + P[2]);
    P[1] = P[2] = sym;
    if (!(P[0] > 0.0) || !(P[3] > 0.0) || !(P[0] * P[3] - sym * sym > 0.0) || !std::isfinite(k.x) ||
        !std::isfinite(k.v))
    {
        Fail(ErrorKind::Numeric, "filter covariance lost positive definiteness");
    }
}

SubjectFilter::SubjectFilter(const KalmanConfig& cfg)
    : m_Cfg(cfg)
{
    if (!(cfg.accelStd >= 0.0) || !(cfg.minObsStd > 0.0) || !(cfg.initPosVar > 0.0) || !(cfg.initVelVar > 0.0))
    {
        Fail(ErrorKind::InvalidArgument, "invalid filter configuration");
    }
    for (double s : cfg.obsStd)
    {
        if (!(s >= 0.0))
        {
            Fail(ErrorKind::InvalidArgument, "observation std must be non-negative");
        }
    }
}

void SubjectFilter::Reset(const Pose& first, double t)
{
    const double vals[4] = { first.p[0], first.p[1], first.p[2], first.theta };
    for (int i = 0; i < 4; ++i)
    {
        m_K[i]         = KalmanComponent{};
        m_K[i].x       = vals[i];
        m_K[i].P       = { m_Cfg.initPosVar, 0.0, 0.0, m_Cfg.initVelVar };
        m_K[i].angular = i == 3;
    }
    m_T    = t;
    m_Init = true;
}

void SubjectFilter::Observe(const Pose& obs, double t)
{
    if (!m_Init)
    {
        Reset(obs, t);
        return;
    }
    const double dt = t - m_T;
    if (!(dt > 0.0))
    {
        Fail(ErrorKind::InvalidArgument, "observations must arrive in increasing time order");
    }
    const double q       = m_Cfg.accelStd * m_Cfg.accelStd;
    const double vals[4] = { obs.p[0], obs.p[1], obs.p[2], obs.theta };
    for (int i = 0; i < 4; ++i)
    {
        const double sd = std::max(m_Cfg.obsStd[i], m_Cfg.minObsStd);
        KfStep(m_K[i], vals[i], dt, q, sd * sd);
    }
    m_T = t;
}

SubjectState SubjectFilter::PredictAt(double t) const
{
    const double dt = std::max(0.0, t - m_T);
    SubjectState s;
    for (int i = 0; i < 3; ++i)
    {
        s.pose.p[i] = m_K[i].x + m_K[i].v * dt;
        s.vel[i]    = m_K[i].v;
    }
    s.pose.theta = WrapAngle(m_K[3].x + m_K[3].v * dt);
    s.omega      = m_K[3].v;
    return s;
}

void ControlConfig::Validate() const
{
    if (!(tau > 0.0) || !(delta >= 0.0) || !(vMax > 0.0) || !(omegaMax > 0.0))
    {
        Fail(ErrorKind::InvalidArgument, "controller needs tau > 0 and positive clamps");
    }
}

VelocityCommand ComputeCommand(const Pose& drone, const SubjectState& subject, const ControlConfig& cfg)
{
    cfg.Validate();
    const Pose& h = subject.pose;
    const double tx = h.p[0] + std::cos(h.theta) * cfg.delta;
    const double ty = h.p[1] + std::sin(h.theta) * cfg.delta;
    VelocityCommand c;
    c.v[0] = std::clamp((tx - drone.p[0]) / cfg.tau + subject.vel[0], -cfg.vMax, cfg.vMax);
    c.v[1] = std::clamp((ty - drone.p[1]) / cfg.tau + subject.vel[1], -cfg.vMax, cfg.vMax);
    c.v[2] = 0.0;

    const double bx = h.p[0] - drone.p[0];
    const double by = h.p[1] - drone.p[1];
    if (std::hypot(bx, by) < 1e-9)
    {
        return c;    // no bearing, hold heading
    }
    const double err = WrapAngle(std::atan2(by, bx) - drone.theta);
    c.omega          = std::clamp(err / cfg.tau, -cfg.omegaMax, cfg.omegaMax);
    return c;
}

void DynamicsConfig::Validate() const
{
    if (!(tv > 0.0) || !(tw > 0.0) || !(accelLimit > 0.0))
    {
        Fail(ErrorKind::InvalidArgument, "dynamics time constants and acceleration limit must be positive");
    }
}

double StepDynamics(DroneState& s, const VelocityCommand& cmd, double dt, const DynamicsConfig& cfg)
{
    if (!(dt > 0.0) || dt > 0.010 + 1e-12)
    {
        Fail(ErrorKind::InvalidArgument, "dynamics step must be in (0, 10 ms]");
    }
    double ax  = (cmd.v[0] - s.vel[0]) / cfg.tv;
    double ay  = (cmd.v[1] - s.vel[1]) / cfg.tv;
    // Never overshoot the command within one step.
    const double cap = 1.0 / dt;
    if (1.0 / cfg.tv > cap)
    {
        ax = (cmd.v[0] - s.vel[0]) * cap;
        ay = (cmd.v[1] - s.vel[1]) * cap;
    }
    const double mag = std::hypot(ax, ay);
    if (mag > cfg.accelLimit)
    {
        ax *= cfg.accelLimit / mag;
        ay *= cfg.accelLimit / mag;
    }
    s.vel[0] += ax * dt;
    s.vel[1] += ay * dt;
    s.vel[2] = 0.0;
    s.omega += (cmd.omega - s.omega) * std::min(1.0, dt / cfg.tw);

    for (int i = 0; i < 3; ++i)
    {
        s.pose.p[i] += s.vel[i] * dt;
    }
    s.pose.theta = WrapAngle(s.pose.theta + s.omega * dt);
    return std::hypot(ax, ay);
}

}    // namespace frontnet
