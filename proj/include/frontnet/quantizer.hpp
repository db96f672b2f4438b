//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "frontnet/graph.hpp"
#include "frontnet/tensor.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace frontnet
{

/// Float parameters for one graph layer. Conv and fc layers carry `weight`; fc also carries
/// `bias`; requant_act layers carry the batch-norm statistics of the conv before them.
struct FloatParams
{
    RTensor weight;
    std::vector<float> bias;
    std::vector<float> gamma;
    std::vector<float> beta;
    std::vector<float> mean;
    std::vector<float> var;
};

struct FloatNet
{
    NetGraph graph;
    std::vector<FloatParams> params;    ///< one entry per graph layer
    double bnEps = 1e-5;

    /// Checks parameter shapes against the graph and rejects non-finite values.
    void Validate() const;
};

/// He-initialised conv weights, batch-norm gamma in [0.8, 1.2], small positive beta, unit
/// statistics, and an fc head with bias (2, 0, 0, 0).
FloatNet RandomFloatNet(const NetGraph& g, std::uint64_t seed);

/// Directory layout: <layer>.weight.qtns for conv and fc, fc.bias.qtns, and <act>.bn.qtns
/// holding a (4, C) tensor of gamma, beta, mean, var rows. All F32.
FloatNet LoadFloatNet(const NetGraph& g, const std::string& dir);
void SaveFloatNet(const FloatNet& net, const std::string& dir);

struct CalibrationSet
{
    std::vector<RTensor> inputs;
};

/// Images whose pixels are exact multiples of 1/255 so the integer path sees the same input.
CalibrationSet RandomCalibration(const NetGraph& g, int count, std::uint64_t seed);
/// Reads every .pgm in a directory (sorted by name) and center-crops/downscales to the graph input.
CalibrationSet LoadCalibration(const NetGraph& g, const std::string& dir);

/// alpha per graph layer: the maximum ReLU output over the set for requant_act layers, 0
/// elsewhere. Throws Degenerate naming every layer whose maximum is 0.
std::vector<double> Calibrate(const FloatNet& net, const CalibrationSet& calib);

struct RequantFit
{
    std::int32_t multiplier = 0;
    std::int32_t shift      = 0;
    std::int32_t bias       = 0;
    double relError         = 0.0;
};

/// Largest shift in [0, 31] for which round(scale 2^s) and round(offset 2^s) both fit a signed
/// 32-bit word. Throws Overflow if none does or the relative scale error exceeds 2^-15.
RequantFit FitRequant(double scale, double offset, const std::string& layer);

struct QLayer
{
    QTensor weights;                 ///< conv/fc: W* with W*_min in qp.zeroBase
    Requant requant;                 ///< requant_act only
    std::vector<double> scale;       ///< requant_act: real per-channel multiplier
    std::vector<double> offset;      ///< requant_act: real per-channel offset, in output steps
    std::vector<std::int32_t> fcBias;
    double epsIn  = 0.0;
    double epsOut = 0.0;
    double alpha  = 0.0;
};

struct QuantizedGraph
{
    NetGraph graph;
    std::vector<QLayer> layers;
    double inputEps = 1.0 / 255.0;
    std::array<double, 4> outputEps{};

    void Validate() const;
};

/// Folds batch norm and activation scales into per-channel integer affines and decomposes the
/// weights. Throws Overflow naming the layer when a parameter does not fit 32 bits.
QuantizedGraph Convert(const FloatNet& net, const std::vector<double>& alphas);

nlohmann::json QGraphToJson(const QuantizedGraph& qg);
QuantizedGraph QGraphFromJson(const nlohmann::json& j);

}    // namespace frontnet
