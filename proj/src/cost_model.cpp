//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/cost_model.hpp"

#include "frontnet/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace frontnet
{

double MinVdd(double fMHz)
{
    if (!(fMHz > 0.0))
    {
        Fail(ErrorKind::InvalidArgument, "clock frequency must be positive");
    }
    static const struct
    {
        double maxMHz;
        double vdd;
    } kTable[] = { { 75.0, 1.00 }, { 100.0, 1.05 }, { 150.0, 1.10 }, { 200.0, 1.15 }, { 250.0, 1.20 } };
    for (const auto& row : kTable)
    {
        if (fMHz <= row.maxMHz + 1e-9)
        {
            return row.vdd;
        }
    }
    Fail(ErrorKind::InvalidArgument, "clock " + std::to_string(fMHz) + " MHz exceeds the 250 MHz table limit");
}

OperatingPoint MakeOperatingPoint(double fFc, double fCl)
{
    if (!(fFc > 0.0) || !(fCl > 0.0))
    {
        Fail(ErrorKind::InvalidArgument, "operating point frequencies must be positive");
    }
    return { MinVdd(std::max(fFc, fCl)), fFc, fCl };
}

void CostParams::Validate() const
{
    const double v[] = { etaPeak, effConv, effShallow, poolElemsPerCycle, fcMacsPerCycle, dmaBytesPerFcCycle,
                         cCl, cFc, staticW, fcIdleActivity };
    for (double x : v)
    {
        if (!(x > 0.0) || !std::isfinite(x))
        {
            Fail(ErrorKind::InvalidArgument, "cost parameters must be positive and finite");
        }
    }
    if (effConv > 1.0 || effShallow > 1.0 || cores <= 0 || fcIdleActivity > 1.0)
    {
        Fail(ErrorKind::InvalidArgument, "utilisation coefficients must not exceed 1");
    }
}

nlohmann::json CostParamsToJson(const CostParams& p)
{
    return { { "format", "frontnet-cost-params" },
             { "eta_peak", p.etaPeak },
             { "eff_conv", p.effConv },
             { "eff_shallow", p.effShallow },
             { "shallow_in_ch", p.shallowInCh },
             { "cores", p.cores },
             { "pool_elems_per_cycle", p.poolElemsPerCycle },
             { "fc_macs_per_cycle", p.fcMacsPerCycle },
             { "dma_bytes_per_fc_cycle", p.dmaBytesPerFcCycle },
             { "c_cl", p.cCl },
             { "c_fc", p.cFc },
             { "static_w", p.staticW },
             { "fc_idle_activity", p.fcIdleActivity } };
}

CostParams CostParamsFromJson(const nlohmann::json& j)
{
    CostParams p;
    try
    {
        p.etaPeak            = j.value("eta_peak", p.etaPeak);
        p.effConv            = j.at("eff_conv").get<double>();
        p.effShallow         = j.at("eff_shallow").get<double>();
        p.shallowInCh        = j.value("shallow_in_ch", p.shallowInCh);
        p.cores              = j.value("cores", p.cores);
        p.poolElemsPerCycle  = j.value("pool_elems_per_cycle", p.poolElemsPerCycle);
        p.fcMacsPerCycle     = j.value("fc_macs_per_cycle", p.fcMacsPerCycle);
        p.dmaBytesPerFcCycle = j.at("dma_bytes_per_fc_cycle").get<double>();
        p.cCl                = j.at("c_cl").get<double>();
        p.cFc                = j.at("c_fc").get<double>();
        p.staticW            = j.at("static_w").get<double>();
        p.fcIdleActivity     = j.value("fc_idle_activity", p.fcIdleActivity);
    }
    catch (const nlohmann::json::exception& e)
    {
        Fail(ErrorKind::Schema, std::string("cost parameter document: ") + e.what());
    }
    try
    {
        p.Validate();
    }
    catch (const Error& e)
    {
        Fail(ErrorKind::Schema, e.what());
    }
    return p;
}

CostEstimate Estimate(const DeploymentPlan& plan, const OperatingPoint& op, const CostParams& params)
{
    params.Validate();
    if (!(op.fFc > 0.0) || !(op.fCl > 0.0) || !(op.vdd > 0.0))
    {
        Fail(ErrorKind::InvalidArgument, "operating point must have positive clocks and supply");
    }
    CostEstimate est;
    est.op           = op;
    const double fcl = op.fCl * 1e6;
    const double ffc = op.fFc * 1e6;
    const double v2  = op.vdd * op.vdd;
    const auto n     = plan.layers.size();
    double eCl = 0.0, dmaS = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const LayerSpec& l = plan.layers[i].spec;
        LayerCost lc;
        lc.name = l.name;
        lc.kind = l.kind;
        if (l.kind == LayerKind::Conv2d)
        {
            // Rows are split across cores; a partial last round leaves cores idle.
            const int rows      = l.outShape[1];
            const int rounds    = (rows + params.cores - 1) / params.cores;
            const double bal    = static_cast<double>(rows) / (params.cores * rounds);
            const double eff    = l.inCh < params.shallowInCh ? params.effShallow : params.effConv;
            lc.computeCycles    = plan.layers[i].macs / (params.etaPeak * eff * bal);
            lc.activity         = bal;
        }
        else if (l.kind == LayerKind::MaxPool)
        {
            lc.computeCycles = static_cast<double>(NumElements(l.inShape)) / params.poolElemsPerCycle;
            lc.activity      = 1.0;
        }
        else
        {
            lc.computeCycles = plan.layers[i].macs / params.fcMacsPerCycle;
            lc.activity      = 1.0 / params.cores;
        }
        const double nextBytes =
            plan.policy == WeightPolicy::ResidentL2 ? 0.0 : static_cast<double>(plan.layers[(i + 1) % n].weightBytes);
        lc.dmaCycles  = nextBytes / params.dmaBytesPerFcCycle;
        lc.computeS   = lc.computeCycles / fcl;
        lc.streamS    = lc.dmaCycles / ffc;
        lc.wallS      = std::max(lc.computeS, lc.streamS);
        lc.idleS      = lc.wallS - lc.computeS;
        lc.idleCycles = lc.idleS * fcl;
        eCl += params.cCl * v2 * fcl * lc.activity * lc.computeS;
        dmaS += lc.streamS;
        est.latencyS += lc.wallS;
        est.layers.push_back(lc);
    }
    if (!(est.latencyS > 0.0))
    {
        Fail(ErrorKind::InvalidArgument, "plan has no compute layers");
    }
    const double t   = est.latencyS;
    // The fabric controller is fully busy while programming transfers and partly busy otherwise.
    const double fcBusy = std::min(dmaS, t);
    const double eFc    = params.cFc * v2 * ffc * (fcBusy + params.fcIdleActivity * (t - fcBusy));
    const double eStat  = params.staticW * t;
    est.fps             = 1.0 / t;
    est.mWCl            = (eCl + 0.5 * eStat) / t * 1e3;
    est.mWFc            = (eFc + 0.5 * eStat) / t * 1e3;
    est.mWTotal         = est.mWCl + est.mWFc;
    est.mJFrame         = est.mWTotal * t;
    return est;
}

SweepGrid SweepGrid::Default()
{
    SweepGrid g;
    for (int f = 25; f <= 250; f += 25)
    {
        g.fFc.push_back(f);
    }
    for (int f = 25; f <= 175; f += 25)
    {
        g.fCl.push_back(f);
    }
    return g;
}

SweepResult Sweep(const DeploymentPlan& plan, const SweepGrid& grid, const CostParams& params)
{
    SweepResult s;
    for (double ffc : grid.fFc)
    {
        for (double fcl : grid.fCl)
        {
            s.rows.push_back(Estimate(plan, MakeOperatingPoint(ffc, fcl), params));
        }
    }
    if (s.rows.empty())
    {
        Fail(ErrorKind::InvalidArgument, "empty sweep grid");
    }
    for (std::size_t i = 1; i < s.rows.size(); ++i)
    {
        if (s.rows[i].mJFrame < s.rows[s.bestEnergy].mJFrame)
        {
            s.bestEnergy = i;
        }
        if (s.rows[i].fps > s.rows[s.bestThroughput].fps)
        {
            s.bestThroughput = i;
        }
    }
    return s;
}

std::string SweepCsv(const SweepResult& s, const std::string& comment)
{
    std::ostringstream os;
    if (!comment.empty())
    {
        os << "# " << comment << "\n";
    }
    os << "f_fc,f_cl,vdd,fps,mW_fc,mW_cl,mJ_frame\n";
    char line[200];
    for (const CostEstimate& e : s.rows)
    {
        std::snprintf(line, sizeof line, "%.0f,%.0f,%.2f,%.4f,%.4f,%.4f,%.6f\n", e.op.fFc, e.op.fCl, e.op.vdd, e.fps,
                      e.mWFc, e.mWCl, e.mJFrame);
        os << line;
    }
    return os.str();
}

namespace
{

constexpr int kFitParams = 6;

CostParams WithLogParams(const CostParams& base, const Eigen::VectorXd& x)
{
    CostParams p           = base;
    p.effConv              = std::exp(x[0]);
    p.effShallow           = std::exp(x[1]);
    p.dmaBytesPerFcCycle   = std::exp(x[2]);
    p.cCl                  = std::exp(x[3]);
    p.cFc                  = std::exp(x[4]);
    p.staticW              = std::exp(x[5]);
    return p;
}

Eigen::VectorXd Residuals(const std::vector<CalibrationTarget>& targets, const CostParams& base,
                          const Eigen::VectorXd& x)
{
    CostParams p = WithLogParams(base, x);
    // Keep efficiencies valid while the solver explores.
    p.effConv    = std::min(p.effConv, 1.0);
    p.effShallow = std::min(p.effShallow, 1.0);
    Eigen::VectorXd r(2 * targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i)
    {
        const CostEstimate e = Estimate(targets[i].plan, targets[i].op, p);
        r[2 * i]             = (e.fps - targets[i].fps) / targets[i].fps;
        r[2 * i + 1]         = (e.mWTotal - targets[i].mW) / targets[i].mW;
    }
    return r;
}

Eigen::MatrixXd Jacobian(const std::vector<CalibrationTarget>& targets, const CostParams& base,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& r0)
{
    Eigen::MatrixXd j(r0.size(), kFitParams);
    for (int k = 0; k < kFitParams; ++k)
    {
        Eigen::VectorXd xp = x;
        const double h     = 1e-6 * std::max(1.0, std::abs(x[k]));
        xp[k] += h;
        j.col(k) = (Residuals(targets, base, xp) - r0) / h;
    }
    return j;
}

}    // namespace

CalibrationResult CalibrateParams(const std::vector<CalibrationTarget>& targets, const CostParams& init)
{
    if (targets.size() < 3)
    {
        Fail(ErrorKind::InvalidArgument, "calibration needs at least three target points");
    }
    for (const CalibrationTarget& t : targets)
    {
        if (!(t.fps > 0.0) || !(t.mW > 0.0))
        {
            Fail(ErrorKind::InvalidArgument, "calibration targets must have positive fps and power");
        }
    }
    init.Validate();
    Eigen::VectorXd x(kFitParams);
    x << std::log(init.effConv), std::log(init.effShallow), std::log(init.dmaBytesPerFcCycle), std::log(init.cCl),
        std::log(init.cFc), std::log(init.staticW);

    Eigen::VectorXd r = Residuals(targets, init, x);
    double cost       = r.squaredNorm();
    double lambda     = 1e-3;
    int it            = 0;
    for (; it < 500 && cost > 1e-24; ++it)
    {
        const Eigen::MatrixXd j   = Jacobian(targets, init, x, r);
        const Eigen::MatrixXd jtj = j.transpose() * j;
        const Eigen::VectorXd g   = j.transpose() * r;
        bool accepted             = false;
        for (int tries = 0; tries < 30 && !accepted; ++tries)
        {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * (jtj.diagonal().array() + 1e-12).matrix();
            const Eigen::VectorXd step = a.ldlt().solve(-g);
            const Eigen::VectorXd xn   = x + step;
            const Eigen::VectorXd rn   = Residuals(targets, init, xn);
            const double cn            = rn.squaredNorm();
            if (std::isfinite(cn) && cn < cost)
            {
                const double gain = cost - cn;
                x                 = xn;
                r                 = rn;
                cost              = cn;
                lambda            = std::max(lambda / 3.0, 1e-12);
                accepted          = true;
                if (step.norm() < 1e-12 || gain < 1e-30)
                {
                    it = 500;
                }
            }
            else
            {
                lambda *= 4.0;
            }
        }
        if (!accepted)
        {
            break;
        }
    }

    const Eigen::MatrixXd j = Jacobian(targets, init, x, r);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
    const auto& sv = svd.singularValues();
    if (sv.size() < kFitParams || sv[sv.size() - 1] <= 1e-9 * sv[0])
    {
        Fail(ErrorKind::Degenerate, "cost calibration is rank deficient: the targets do not constrain all "
                                    "six coefficients");
    }
    CalibrationResult res;
    res.params = WithLogParams(init, x);
    try
    {
        res.params.Validate();
    }
    catch (const Error& e)
    {
        Fail(ErrorKind::Degenerate, std::string("cost calibration left the valid region: ") + e.what());
    }
    res.residuals.assign(r.data(), r.data() + r.size());
    res.iterations = std::min(it, 500);
    return res;
}

std::vector<CalibrationTarget> AnchorTargets(const MemoryHierarchy& mem)
{
    const NetGraph n80  = BuildFrontnet(Variant::W80C32);
    const NetGraph n160 = BuildFrontnet(Variant::W160C16);
    const DeploymentPlan s80 = Plan(n80, mem, { WeightPolicy::StreamedL3, false });
    const DeploymentPlan r160 = Plan(n160, mem, { WeightPolicy::ResidentL2, false });
    return {
        { "80x32 streamed 250/175", s80, MakeOperatingPoint(250, 175), 134.7, 86.6 },
        { "160x16 resident 250/175", r160, MakeOperatingPoint(250, 175), 110.7, 99.0 },
        { "80x32 streamed 25/25", s80, MakeOperatingPoint(25, 25), 18.5, 8.6 },
    };
}

}    // namespace frontnet
