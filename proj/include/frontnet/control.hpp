//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <optional>

namespace frontnet
{

using Vec3 = std::array<double, 3>;

constexpr double kPi      = 3.14159265358979323846;
constexpr double kGravity = 9.81;

/// Maps any finite angle into [-pi, pi].
double WrapAngle(double a);

struct Pose
{
    Vec3 p{};
    double theta = 0.0;
};

/// Expresses a pose given in the drone frame in the odometry frame.
Pose ToOdometry(const Pose& predInDrone, const Pose& drone);
/// Inverse of ToOdometry.
Pose ToDroneFrame(const Pose& inOdometry, const Pose& drone);

struct SubjectState
{
    Pose pose;
    Vec3 vel{};
    double omega = 0.0;
};

/// One decoupled constant-velocity filter: mean (position, velocity) and 2x2 covariance.
struct KalmanComponent
{
    double x = 0.0;
    double v = 0.0;
    std::array<double, 4> P{ 1.0, 0.0, 0.0, 1.0 };    ///< row-major
    bool angular = false;
};

/// q is the acceleration variance, r the observation variance. Throws Numeric if the
/// covariance stops being positive definite.
void KfStep(KalmanComponent& k, std::optional<double> obs, double dt, double q, double r);

struct KalmanConfig
{
    double accelStd = 1.0;
    std::array<double, 4> obsStd{ 0.1, 0.1, 0.1, 0.1 };    ///< x, y, z, theta
    double minObsStd = 1e-4;
    double initPosVar = 1.0;
    double initVelVar = 1.0;
};

/// The four filters (x, y, z, theta) of the subject estimate in the odometry frame.
class SubjectFilter
{
public:
    explicit SubjectFilter(const KalmanConfig& cfg);

    void Reset(const Pose& first, double t);
    bool Initialized() const
    {
        return m_Init;
    }
    /// Advances to time t and folds in a pose observation.
    void Observe(const Pose& obs, double t);
    /// Prediction at time t without touching the stored state.
    SubjectState PredictAt(double t) const;
    const std::array<KalmanComponent, 4>& Components() const
    {
        return m_K;
    }

private:
    KalmanConfig m_Cfg;
    std::array<KalmanComponent, 4> m_K;
    double m_T  = 0.0;
    bool m_Init = false;
};

struct ControlConfig
{
    double tau      = 0.5;
    double delta    = 1.3;
    double vMax     = 1.0;
    double omegaMax = 0.8;
    void Validate() const;
};

struct VelocityCommand
{
    Vec3 v{};
    double omega = 0.0;
};

/// Target p' = p_H + e_H * delta; heading aims at the subject. z is not commanded.
VelocityCommand ComputeCommand(const Pose& drone, const SubjectState& subject, const ControlConfig& cfg);

struct DynamicsConfig
{
    double tv = 0.3;    ///< velocity time constant (s)
    double tw = 0.1;    ///< yaw-rate time constant (s)
    double accelLimit = kGravity * 0.20791169081775931;    ///< g sin(12 deg)
    void Validate() const;
};

struct DroneState
{
    Pose pose;
    Vec3 vel{};
    double omega = 0.0;
};

/// Explicit first-order step. Returns the horizontal acceleration magnitude applied.
double StepDynamics(DroneState& s, const VelocityCommand& cmd, double dt, const DynamicsConfig& cfg);

}    // namespace frontnet
