//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "frontnet/control.hpp"
#include "frontnet/metrics.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace frontnet
{

/// Eight-phase walking pattern. The subject starts at the origin facing +y and the drone
/// starts `separation` metres ahead of them, yawed `offsetRad` to the right of the subject.
struct ScenarioScript
{
    std::array<double, 8> durations{ 5.0, 6.0, 6.0, 7.0, 7.0, 6.0, 8.0, 5.0 };
    double walkDistance  = 2.4;
    double circleRadius  = 2.4;
    double separation    = 3.6;
    double offsetRad     = kPi / 6.0;
    double subjectHeight = 1.6;
    double droneHeight   = 1.3;

    static const char* PhaseName(int phase);
    double TotalDuration() const;
    double PhaseStart(int phase) const;
    /// Phase index for time t, clamped to [0, 7].
    int PhaseAt(double t) const;
    SubjectState SubjectAt(double t) const;
    Pose InitialDrone() const;
    void Validate() const;
};

/// Per-component observation noise (x, y, z in m, theta in rad).
struct NoiseModel
{
    std::array<double, 4> std{};
    void Validate() const;
};

struct SimConfig
{
    std::string net = "mocap";
    ScenarioScript script;
    ControlConfig control;
    DynamicsConfig dynamics;
    KalmanConfig kalman;
    NoiseModel noise;
    double obsRate     = 30.0;
    double dynRate     = 500.0;
    double readoutRate = 100.0;
    int latencyFrames  = 1;
    std::uint64_t seed = 1;
    void Validate() const;
};

/// Noise and inference rate for "160x32", "160x16", "80x32" or "mocap". The filter's
/// observation std follows the noise, floored by KalmanConfig::minObsStd.
SimConfig DefaultSimConfig(const std::string& net, std::uint64_t seed);

nlohmann::json SimConfigToJson(const SimConfig& c);
/// Missing keys keep their defaults for the named net. Throws Schema on bad values.
SimConfig SimConfigFromJson(const nlohmann::json& j);

struct LogRow
{
    double t  = 0.0;
    int phase = 0;
    Pose subject;
    Pose drone;
    SubjectState estimate;
    VelocityCommand cmd;
    double distance = 0.0;    ///< horizontal drone-subject distance
    double exy      = 0.0;
    double etheta   = 0.0;
};

struct ObservationRecord
{
    double t = 0.0;
    Pose truth;       ///< subject in the drone frame at capture
    Pose observed;
};

struct SimMetrics
{
    Distribution exy;
    Distribution etheta;
    double phase0Distance = 0.0;    ///< at the end of phase 0
    std::array<double, 4> r2{};     ///< observations vs truth, x y z theta
    double maxCmdSpeed  = 0.0;      ///< largest per-axis |v_cmd|
    double maxCmdOmega  = 0.0;
    double maxAccel     = 0.0;
    std::size_t observations = 0;
    std::size_t ticks        = 0;
};

struct SimResult
{
    SimConfig config;
    std::vector<LogRow> log;
    std::vector<ObservationRecord> observations;
    SimMetrics metrics;
};

/// Deterministic in the config. Throws Internal if a clamp or the acceleration bound is
/// ever violated.
SimResult RunExperiment(const SimConfig& cfg);

SimMetrics ComputeMetrics(const std::vector<LogRow>& log, const std::vector<ObservationRecord>& obs,
                          const ScenarioScript& script);

std::string TrajectoryCsv(const SimResult& r, const std::string& comment);
std::string MetricsCsv(const std::vector<SimResult>& runs, const std::string& comment);

}    // namespace frontnet
