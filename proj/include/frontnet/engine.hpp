//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "frontnet/augment.hpp"
#include "frontnet/image.hpp"
#include "frontnet/quantizer.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace frontnet
{

struct InferOptions
{
    int threads          = 1;
    bool keepActivations = false;
};

struct InferenceResult
{
    std::array<std::int32_t, 4> raw{};
    PoseLabel pose;    ///< outputEps * raw per component
    /// Output of every layer when requested: I32 for conv and fc, U8 otherwise.
    std::vector<QTensor> activations;
};

/// Integer-only forward pass. Conv accumulates exactly and rejects any value that does not
/// fit 32 bits; rows are split across threads with disjoint ownership so results do not
/// depend on the thread count.
InferenceResult InferInt(const QuantizedGraph& qg, const QTensor& image, const InferOptions& opt = {});

/// Single conv on u8 codes with effective int weights (out, in, kh, kw) and zero padding.
QTensor ConvInt(const QTensor& in, const std::vector<std::int32_t>& weights, const LayerSpec& l, int threads);
QTensor MaxPoolInt(const QTensor& in, const LayerSpec& l);

/// Float reference. With `alphas`, every activation is additionally clipped at its alpha,
/// matching the saturation of the integer path. `trace` receives every layer output.
std::array<double, 4> InferFloat(const FloatNet& net, const RTensor& image, const std::vector<double>* alphas = nullptr,
                                 std::vector<RTensor>* trace = nullptr);

/// Centered crop without resampling. Throws InvalidArgument when the target exceeds the source.
GrayImage CropCenter(const GrayImage& frame, int height, int width);
/// 2x bilinear downscale; interpolation weights are 8.8 fixed point.
GrayImage Downscale2x(const GrayImage& img);
/// Crop (and downscale for the 80-wide variant) a camera frame to the graph input.
GrayImage PrepareInput(const GrayImage& frame, const NetGraph& g);

/// Worst-case |pose_int - pose_float| per output, accumulated layer by layer from the weight
/// steps, the requant fitting error and the output rounding of each activation.
std::array<double, 4> QuantErrorBound(const FloatNet& net, const QuantizedGraph& qg);

}    // namespace frontnet
