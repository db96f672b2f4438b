//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "frontnet/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace frontnet
{

enum class LayerKind
{
    Conv2d,
    MaxPool,
    RequantAct,
    FullyConnected,
    DropoutNoop,
};

const char* ToString(LayerKind kind);
LayerKind LayerKindFromString(const std::string& s);

/// One node of the chain. Shapes are (C, H, W); the fully connected output is (4, 1, 1).
struct LayerSpec
{
    std::string name;
    LayerKind kind = LayerKind::Conv2d;
    int inCh       = 0;
    int outCh      = 0;
    int kh = 1, kw = 1;
    int sh = 1, sw = 1;
    int ph = 0, pw = 0;
    Shape inShape;
    Shape outShape;

    bool HasWeights() const
    {
        return kind == LayerKind::Conv2d || kind == LayerKind::FullyConnected;
    }
    /// (out, in, kh, kw) for conv, (out, in) for fc, empty otherwise.
    Shape WeightShape() const;
    std::int64_t NumWeights() const;
    std::int64_t Macs() const;
    std::int64_t OutputElements() const;
};

enum class Variant
{
    W160C32,
    W160C16,
    W80C32,
};

const char* ToString(Variant v);
/// Accepts "160x32", "160x16" and "80x32".
Variant VariantFromString(const std::string& s);
int InputWidth(Variant v);
int InputHeight(Variant v);
int BaseChannels(Variant v);

struct NetGraph
{
    Variant variant = Variant::W160C32;
    Shape inputShape;
    std::vector<LayerSpec> layers;
};

/// Throws InvalidArgument for any (width, channels) pair outside the three variants.
NetGraph BuildFrontnet(int inputWidth, int baseChannels);
NetGraph BuildFrontnet(Variant v);

/// Fills every out_shape from input_shape. Stride-2 layers halve with ceiling division.
NetGraph InferShapes(NetGraph g);

/// Checks the chain: adjacent shapes match and every shape agrees with InferShapes.
void ValidateGraph(const NetGraph& g);

/// Output size of a strided window op with ceil-mode division.
int OutDim(int in, int kernel, int stride, int pad, bool ceilMode);

struct LayerStats
{
    std::string name;
    LayerKind kind;
    std::int64_t macs        = 0;
    std::int64_t params      = 0;
    std::int64_t bufferBytes = 0;
};

struct GraphStats
{
    std::int64_t macs        = 0;
    std::int64_t params      = 0;
    std::int64_t memoryBytes = 0;
    std::int64_t inputBytes  = 0;
    std::vector<LayerStats> layers;
};

/// MACs count conv and fc only. Memory is the input image, every weight byte and each
/// materialised activation buffer: u8 outputs of requant and pool, the 32-bit fc output.
/// Conv accumulators are fused into the requant and dropout is an alias.
GraphStats Analyze(const NetGraph& g);

/// Bytes of the activation buffer a layer writes, 0 for fused or aliased layers.
std::int64_t ActivationBufferBytes(const LayerSpec& l);

/// Human-readable per-layer table plus totals with three-significant-figure rounding.
std::string TableReport(const NetGraph& g, const GraphStats& s);

nlohmann::json LayerToJson(const LayerSpec& l);
LayerSpec LayerFromJson(const nlohmann::json& j);
nlohmann::json GraphToJson(const NetGraph& g);
/// Throws Schema on malformed documents.
NetGraph GraphFromJson(const nlohmann::json& j);

}    // namespace frontnet
