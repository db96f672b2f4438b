//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "frontnet/planner.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace frontnet
{

struct OperatingPoint
{
    double vdd   = 1.2;
    double fFc   = 250.0;    ///< MHz
    double fCl   = 175.0;    ///< MHz
};

/// Minimum supply for a clock, transcribed as a step table in 0.05 V increments:
/// <=75 MHz 1.00 V, 100 MHz 1.05 V, <=150 MHz 1.10 V, <=200 MHz 1.15 V, <=250 MHz 1.20 V.
/// Throws InvalidArgument above 250 MHz or for non-positive clocks.
double MinVdd(double fMHz);
/// Operating point at the minimum supply for max(fFc, fCl).
OperatingPoint MakeOperatingPoint(double fFc, double fCl);

struct CostParams
{
    double etaPeak          = 15.6;      ///< MAC/cycle of the cluster kernels
    double effConv          = 0.83;      ///< fraction of etaPeak reached by conv layers
    double effShallow       = 0.08;      ///< same, for convs with fewer than shallowInCh inputs
    int shallowInCh         = 4;
    int cores               = 8;
    double poolElemsPerCycle = 4.0;
    double fcMacsPerCycle   = 1.0;       ///< fc runs on a single core
    double dmaBytesPerFcCycle = 0.8;
    double cCl              = 3.5e-10;   ///< W / (Hz V^2) at full activity
    double cFc              = 1.7e-10;
    double staticW          = 9e-4;      ///< both domains together, split evenly
    double fcIdleActivity   = 0.3;       ///< fabric activity while not orchestrating DMA

    /// All coefficients positive and effConv, effShallow <= 1.
    void Validate() const;
};

nlohmann::json CostParamsToJson(const CostParams& p);
CostParams CostParamsFromJson(const nlohmann::json& j);

struct LayerCost
{
    std::string name;
    LayerKind kind = LayerKind::Conv2d;
    double computeCycles = 0.0;    ///< cluster cycles
    double dmaCycles     = 0.0;    ///< fabric cycles streaming the next layer's weights
    double idleCycles    = 0.0;    ///< cluster cycles spent waiting for the stream
    double activity      = 0.0;    ///< fraction of cluster cores busy while computing
    double computeS      = 0.0;
    double streamS       = 0.0;
    double wallS         = 0.0;
    double idleS         = 0.0;
};

struct CostEstimate
{
    OperatingPoint op;
    std::vector<LayerCost> layers;
    double latencyS = 0.0;
    double fps      = 0.0;
    double mWFc     = 0.0;
    double mWCl     = 0.0;
    double mWTotal  = 0.0;
    double mJFrame  = 0.0;
};

/// Per layer: compute = cycles / f_cl, stream = next layer's weight bytes / (rate f_fc)
/// (cyclic, zero for resident plans), wall = max of the two and idle = wall - compute.
/// Energy integrates C V^2 f activity over each domain plus static power.
CostEstimate Estimate(const DeploymentPlan& plan, const OperatingPoint& op, const CostParams& params);

struct SweepGrid
{
    std::vector<double> fFc;
    std::vector<double> fCl;

    /// FC 25..250 MHz and CL 25..175 MHz in 25 MHz steps.
    static SweepGrid Default();
};

struct SweepResult
{
    std::vector<CostEstimate> rows;
    std::size_t bestEnergy     = 0;
    std::size_t bestThroughput = 0;
};

SweepResult Sweep(const DeploymentPlan& plan, const SweepGrid& grid, const CostParams& params);
/// Columns f_fc, f_cl, vdd, fps, mW_fc, mW_cl, mJ_frame.
std::string SweepCsv(const SweepResult& s, const std::string& comment = "");

struct CalibrationTarget
{
    std::string label;
    DeploymentPlan plan;
    OperatingPoint op;
    double fps = 0.0;
    double mW  = 0.0;
};

struct CalibrationResult
{
    CostParams params;
    std::vector<double> residuals;    ///< relative fps and power errors, two per target
    int iterations = 0;
};

/// Levenberg-Marquardt over log(effConv, effShallow, dma rate, cCl, cFc, static) minimising
/// relative fps and power errors. Needs at least three targets; throws Degenerate when the
/// Jacobian is rank deficient.
CalibrationResult CalibrateParams(const std::vector<CalibrationTarget>& targets, const CostParams& init = {});

/// The three published anchors: 80x32 at 250/175 MHz streamed (134.7 fps, 86.6 mW), 160x16
/// at 250/175 MHz with resident weights (110.7 fps, 99 mW) and 80x32 at 25/25 MHz streamed
/// (18.5 fps, 8.6 mW).
std::vector<CalibrationTarget> AnchorTargets(const MemoryHierarchy& mem = {});

}    // namespace frontnet
