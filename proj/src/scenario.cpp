//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/scenario.hpp"

#include "frontnet/error.hpp"
#include "frontnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <sstream>

namespace frontnet
{

const char* ScenarioScript::PhaseName(int phase)
{
    static const char* kNames[8] = { "stand",    "forward",       "backward", "left",
                                     "right",    "quarter_circle", "rotate",  "stand_end" };
    return phase >= 0 && phase < 8 ? kNames[phase] : "?";
}

double ScenarioScript::TotalDuration() const
{
    double t = 0.0;
    for (double d : durations)
    {
        t += d;
    }
    return t;
}

double ScenarioScript::PhaseStart(int phase) const
{
    double t = 0.0;
    for (int i = 0; i < phase && i < 8; ++i)
    {
        t += durations[i];
    }
    return t;
}

int ScenarioScript::PhaseAt(double t) const
{
    double start = 0.0;
    for (int i = 0; i < 8; ++i)
    {
        if (t < start + durations[i])
        {
            return i;
        }
        start += durations[i];
    }
    return 7;
}

void ScenarioScript::Validate() const
{
    for (double d : durations)
    {
        if (!(d > 0.0))
        {
            Fail(ErrorKind::InvalidArgument, "phase durations must be positive");
        }
    }
    if (!(walkDistance >= 0.0) || !(circleRadius > 0.0) || !(separation > 0.0))
    {
        Fail(ErrorKind::InvalidArgument, "scenario distances must be positive");
    }
}

SubjectState ScenarioScript::SubjectAt(double t) const
{
    const int ph    = PhaseAt(t);
    const double u  = std::clamp((t - PhaseStart(ph)) / durations[ph], 0.0, 1.0);
    const double vw = walkDistance / durations[1];
    SubjectState s;
    s.pose.p     = { 0.0, 0.0, subjectHeight };
    s.pose.theta = kPi / 2.0;
    switch (ph)
    {
        case 0:
            break;
        case 1:
            s.pose.p[1] = walkDistance * u;
            s.vel[1]    = vw;
            break;
        case 2:
            s.pose.p[1] = walkDistance * (1.0 - u);
            s.vel[1]    = -walkDistance / durations[2];
            break;
        case 3:
            s.pose.p[0] = -walkDistance * u;
            s.vel[0]    = -walkDistance / durations[3];
            break;
        case 4:
            s.pose.p[0] = -walkDistance * (1.0 - u);
            s.vel[0]    = walkDistance / durations[4];
            break;
        case 5:
        {
            // Counter-clockwise around (-r, 0), starting at the origin, facing the tangent.
            const double w   = (kPi / 2.0) / durations[5];
            const double phi = (kPi / 2.0) * u;
            s.pose.p[0]      = -circleRadius + circleRadius * std::cos(phi);
            s.pose.p[1]      = circleRadius * std::sin(phi);
            s.vel[0]         = -circleRadius * w * std::sin(phi);
            s.vel[1]         = circleRadius * w * std::cos(phi);
            s.pose.theta     = WrapAngle(phi + kPi / 2.0);
            s.omega          = w;
            break;
        }
        default:
        {
            s.pose.p[0] = -circleRadius;
            s.pose.p[1] = circleRadius;
            if (ph == 6)
            {
                s.pose.theta = WrapAngle(kPi - kPi * u);
                s.omega      = -kPi / durations[6];
            }
            else
            {
                s.pose.theta = 0.0;
            }
            break;
        }
    }
    return s;
}

Pose ScenarioScript::InitialDrone() const
{
    Pose d;
    d.p     = { 0.0, separation, droneHeight };
    d.theta = WrapAngle(kPi / 2.0 + kPi - offsetRad);
    return d;
}

void NoiseModel::Validate() const
{
    for (double s : std)
    {
        if (!(s >= 0.0) || !std::isfinite(s))
        {
            Fail(ErrorKind::InvalidArgument, "noise std must be finite and non-negative");
        }
    }
}

void SimConfig::Validate() const
{
    script.Validate();
    control.Validate();
    dynamics.Validate();
    noise.Validate();
    if (!(obsRate > 0.0) || !(dynRate >= 100.0) || !(readoutRate > 0.0) || readoutRate > dynRate ||
        obsRate > dynRate || latencyFrames < 0)
    {
        Fail(ErrorKind::InvalidArgument, "invalid simulation rates");
    }
}

SimConfig DefaultSimConfig(const std::string& net, std::uint64_t seed)
{
    // Observation MSE (x, y, z in m^2, theta in rad^2) and inference rate per network.
    struct Row
    {
        const char* name;
        double mse[4];
        double rate;
    };
    static const Row kRows[] = {
        { "160x32", { 0.066, 0.078, 0.020, 0.386 }, 48.0 },
        { "160x16", { 0.074, 0.083, 0.025, 0.412 }, 111.0 },
        { "80x32", { 0.088, 0.084, 0.029, 0.504 }, 135.0 },
        { "mocap", { 0.0, 0.0, 0.0, 0.0 }, 30.0 },
    };
    for (const Row& r : kRows)
    {
        if (net == r.name)
        {
            SimConfig c;
            c.net     = net;
            c.seed    = seed;
            c.obsRate = r.rate;
            for (int i = 0; i < 4; ++i)
            {
                c.noise.std[i]    = std::sqrt(r.mse[i]);
                c.kalman.obsStd[i] = c.noise.std[i];
            }
            return c;
        }
    }
    Fail(ErrorKind::InvalidArgument, "unknown network '" + net + "' (expected 160x32, 160x16, 80x32 or mocap)");
}

nlohmann::json SimConfigToJson(const SimConfig& c)
{
    nlohmann::json j;
    j["format"]         = "frontnet-sim-config";
    j["net"]            = c.net;
    j["seed"]           = c.seed;
    j["obs_rate"]       = c.obsRate;
    j["dyn_rate"]       = c.dynRate;
    j["readout_rate"]   = c.readoutRate;
    j["latency_frames"] = c.latencyFrames;
    j["noise_std"]      = c.noise.std;
    j["control"]  = { { "tau", c.control.tau },
                      { "delta", c.control.delta },
                      { "v_max", c.control.vMax },
                      { "omega_max", c.control.omegaMax } };
    j["dynamics"] = { { "tv", c.dynamics.tv }, { "tw", c.dynamics.tw }, { "accel_limit", c.dynamics.accelLimit } };
    j["kalman"]   = { { "accel_std", c.kalman.accelStd },
                      { "obs_std", c.kalman.obsStd },
                      { "min_obs_std", c.kalman.minObsStd } };
    j["script"]   = { { "durations", c.script.durations },
                      { "walk_distance", c.script.walkDistance },
                      { "circle_radius", c.script.circleRadius },
                      { "separation", c.script.separation },
                      { "offset_rad", c.script.offsetRad },
                      { "subject_height", c.script.subjectHeight },
                      { "drone_height", c.script.droneHeight } };
    return j;
}

SimConfig SimConfigFromJson(const nlohmann::json& j)
{
    SimConfig c;
    try
    {
        c = DefaultSimConfig(j.value("net", std::string("mocap")), j.value("seed", std::uint64_t{ 1 }));
        c.obsRate       = j.value("obs_rate", c.obsRate);
        c.dynRate       = j.value("dyn_rate", c.dynRate);
        c.readoutRate   = j.value("readout_rate", c.readoutRate);
        c.latencyFrames = j.value("latency_frames", c.latencyFrames);
        c.noise.std     = j.value("noise_std", c.noise.std);
        if (j.contains("control"))
        {
            const auto& k     = j.at("control");
            c.control.tau     = k.value("tau", c.control.tau);
            c.control.delta   = k.value("delta", c.control.delta);
            c.control.vMax    = k.value("v_max", c.control.vMax);
            c.control.omegaMax = k.value("omega_max", c.control.omegaMax);
        }
        if (j.contains("dynamics"))
        {
            const auto& k         = j.at("dynamics");
            c.dynamics.tv         = k.value("tv", c.dynamics.tv);
            c.dynamics.tw         = k.value("tw", c.dynamics.tw);
            c.dynamics.accelLimit = k.value("accel_limit", c.dynamics.accelLimit);
        }
        if (j.contains("kalman"))
        {
            const auto& k       = j.at("kalman");
            c.kalman.accelStd   = k.value("accel_std", c.kalman.accelStd);
            c.kalman.obsStd     = k.value("obs_std", c.kalman.obsStd);
            c.kalman.minObsStd  = k.value("min_obs_std", c.kalman.minObsStd);
        }
        if (j.contains("script"))
        {
            const auto& k          = j.at("script");
            c.script.durations     = k.value("durations", c.script.durations);
            c.script.walkDistance  = k.value("walk_distance", c.script.walkDistance);
            c.script.circleRadius  = k.value("circle_radius", c.script.circleRadius);
            c.script.separation    = k.value("separation", c.script.separation);
            c.script.offsetRad     = k.value("offset_rad", c.script.offsetRad);
            c.script.subjectHeight = k.value("subject_height", c.script.subjectHeight);
            c.script.droneHeight   = k.value("drone_height", c.script.droneHeight);
        }
        c.Validate();
    }
    catch (const nlohmann::json::exception& e)
    {
        Fail(ErrorKind::Schema, std::string("simulation config: ") + e.what());
    }
    catch (const Error& e)
    {
        Fail(ErrorKind::Schema, std::string("simulation config: ") + e.what());
    }
    return c;
}

namespace
{

struct Capture
{
    double t;
    Pose drone;
    Pose relTruth;
};

LogRow MakeRow(double t, const ScenarioScript& script, const SubjectState& h, const DroneState& d,
               const SubjectState& est, const VelocityCommand& cmd, double delta)
{
    LogRow r;
    r.t        = t;
    r.phase    = script.PhaseAt(t);
    r.subject  = h.pose;
    r.drone    = d.pose;
    r.estimate = est;
    r.cmd      = cmd;
    r.distance = std::hypot(h.pose.p[0] - d.pose.p[0], h.pose.p[1] - d.pose.p[1]);
    const double tx = h.pose.p[0] + std::cos(h.pose.theta) * delta;
    const double ty = h.pose.p[1] + std::sin(h.pose.theta) * delta;
    r.exy           = std::hypot(tx - d.pose.p[0], ty - d.pose.p[1]);
    r.etheta        = std::abs(WrapAngle(h.pose.theta + kPi - d.pose.theta));
    return r;
}

}    // namespace

SimResult RunExperiment(const SimConfig& cfg)
{
    cfg.Validate();
    SimResult res;
    res.config = cfg;

    Rng rng(cfg.seed);
    SubjectFilter filter(cfg.kalman);
    DroneState drone;
    drone.pose = cfg.script.InitialDrone();
    VelocityCommand cmd;
    std::deque<Capture> pending;

    const double dt      = 1.0 / cfg.dynRate;
    const auto ticks     = static_cast<std::int64_t>(std::llround(cfg.script.TotalDuration() * cfg.dynRate));
    const double obsDt   = 1.0 / cfg.obsRate;
    const double readDt  = 1.0 / cfg.readoutRate;
    std::int64_t nextObs = 0, nextRead = 0;
    const double tol     = 1e-12;

    SimMetrics& m = res.metrics;
    for (std::int64_t k = 0; k <= ticks; ++k)
    {
        const double t        = static_cast<double>(k) * dt;
        const SubjectState h  = cfg.script.SubjectAt(t);

        // Camera frame and inference: the prediction delivered now describes an earlier frame.
        if (t + tol >= static_cast<double>(nextObs) * obsDt)
        {
            ++nextObs;
            pending.push_back({ t, drone.pose, ToDroneFrame(h.pose, drone.pose) });
            if (pending.size() > static_cast<std::size_t>(cfg.latencyFrames))
            {
                const Capture cap = pending.front();
                pending.pop_front();
                ObservationRecord rec;
                rec.t        = t;
                rec.truth    = cap.relTruth;
                rec.observed = cap.relTruth;
                for (int i = 0; i < 3; ++i)
                {
                    rec.observed.p[i] += cfg.noise.std[i] > 0.0 ? rng.Normal(0.0, cfg.noise.std[i]) : 0.0;
                }
                if (cfg.noise.std[3] > 0.0)
                {
                    rec.observed.theta = WrapAngle(rec.observed.theta + rng.Normal(0.0, cfg.noise.std[3]));
                }
                res.observations.push_back(rec);
                // Project with the odometry of the capture instant, then run the high-level loop.
                filter.Observe(ToOdometry(rec.observed, cap.drone), t);
                cmd = ComputeCommand(drone.pose, filter.PredictAt(t), cfg.control);
            }
        }

        if (t + tol >= static_cast<double>(nextRead) * readDt)
        {
            ++nextRead;
            const SubjectState est = filter.Initialized() ? filter.PredictAt(t) : SubjectState{};
            res.log.push_back(MakeRow(t, cfg.script, h, drone, est, cmd, cfg.control.delta));
        }
        if (k == ticks)
        {
            break;
        }

        const double a = StepDynamics(drone, cmd, dt, cfg.dynamics);
        m.maxCmdSpeed  = std::max({ m.maxCmdSpeed, std::abs(cmd.v[0]), std::abs(cmd.v[1]), std::abs(cmd.v[2]) });
        m.maxCmdOmega  = std::max(m.maxCmdOmega, std::abs(cmd.omega));
        m.maxAccel     = std::max(m.maxAccel, a);
        if (m.maxCmdSpeed > cfg.control.vMax + 1e-12 || m.maxCmdOmega > cfg.control.omegaMax + 1e-12 ||
            m.maxAccel > cfg.dynamics.accelLimit * (1.0 + 1e-12))
        {
            Fail(ErrorKind::Internal, "control clamp violated at t = " + std::to_string(t));
        }
        ++m.ticks;
    }

    const SimMetrics inLoop = m;
    m                      = ComputeMetrics(res.log, res.observations, cfg.script);
    m.maxCmdSpeed          = inLoop.maxCmdSpeed;
    m.maxCmdOmega          = inLoop.maxCmdOmega;
    m.maxAccel             = inLoop.maxAccel;
    m.ticks                = inLoop.ticks;
    return res;
}

SimMetrics ComputeMetrics(const std::vector<LogRow>& log, const std::vector<ObservationRecord>& obs,
                          const ScenarioScript& script)
{
    if (log.empty())
    {
        Fail(ErrorKind::InvalidArgument, "empty trajectory log");
    }
    SimMetrics m;
    std::vector<double> exy, eth;
    exy.reserve(log.size());
    eth.reserve(log.size());
    const double end0 = script.PhaseStart(1);
    for (const LogRow& r : log)
    {
        exy.push_back(r.exy);
        eth.push_back(r.etheta);
        if (r.t <= end0 + 1e-9)
        {
            m.phase0Distance = r.distance;
        }
    }
    m.exy          = Summarize(exy);
    m.etheta       = Summarize(eth);
    m.observations = obs.size();
    if (!obs.empty())
    {
        for (int c = 0; c < 4; ++c)
        {
            std::vector<double> truth, pred;
            for (const ObservationRecord& o : obs)
            {
                const double tv = c < 3 ? o.truth.p[c] : o.truth.theta;
                const double pv = c < 3 ? o.observed.p[c] : tv + WrapAngle(o.observed.theta - o.truth.theta);
                truth.push_back(tv);
                pred.push_back(pv);
            }
            m.r2[c] = RSquared(truth, pred);
        }
    }
    return m;
}

std::string TrajectoryCsv(const SimResult& r, const std::string& comment)
{
    std::ostringstream os;
    if (!comment.empty())
    {
        os << "# " << comment << "\n";
    }
    os << "t,phase,h_x,h_y,h_z,h_theta,d_x,d_y,d_z,d_theta,est_x,est_y,est_z,est_theta,cmd_vx,cmd_vy,cmd_vz,"
          "cmd_omega,distance,e_xy,e_theta\n";
    char buf[512];
    for (const LogRow& l : r.log)
    {
        std::snprintf(buf, sizeof buf,
                      "%.2f,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,"
                      "%.6f,%.6f\n",
                      l.t, l.phase, l.subject.p[0], l.subject.p[1], l.subject.p[2], l.subject.theta, l.drone.p[0],
                      l.drone.p[1], l.drone.p[2], l.drone.theta, l.estimate.pose.p[0], l.estimate.pose.p[1],
                      l.estimate.pose.p[2], l.estimate.pose.theta, l.cmd.v[0], l.cmd.v[1], l.cmd.v[2], l.cmd.omega,
                      l.distance, l.exy, l.etheta);
        os << buf;
    }
    return os.str();
}

std::string MetricsCsv(const std::vector<SimResult>& runs, const std::string& comment)
{
    std::ostringstream os;
    if (!comment.empty())
    {
        os << "# " << comment << "\n";
    }
    os << "net,seed,rate_hz,exy_median,exy_p5,exy_p95,etheta_median_deg,etheta_p5_deg,etheta_p95_deg,"
          "phase0_distance,r2_x,r2_y,r2_z,r2_theta,max_cmd_speed,max_cmd_omega,max_accel\n";
    char buf[512];
    const double deg = 180.0 / kPi;
    for (const SimResult& r : runs)
    {
        const SimMetrics& m = r.metrics;
        std::snprintf(buf, sizeof buf,
                      "%s,%llu,%.0f,%.6f,%.6f,%.6f,%.4f,%.4f,%.4f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                      r.config.net.c_str(), static_cast<unsigned long long>(r.config.seed), r.config.obsRate,
                      m.exy.median, m.exy.p5, m.exy.p95, m.etheta.median * deg, m.etheta.p5 * deg,
                      m.etheta.p95 * deg, m.phase0Distance, m.r2[0], m.r2[1], m.r2[2], m.r2[3], m.maxCmdSpeed,
                      m.maxCmdOmega, m.maxAccel);
        os << buf;
    }
    return os.str();
}

}    // namespace frontnet
