//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace frontnet
{

/// Element storage tag. Values match the dtype byte of the QTNS file format.
enum class DType : std::uint8_t
{
    U8  = 0,
    I8  = 1,
    I32 = 2,
    F32 = 3,
};

const char* ToString(DType dtype);

/// Scale and integer range of a fixed-point tensor.
///
/// A real value t is represented as eps * (q + zero_base). Activations use 256 unsigned
/// levels [0, 255]; weights use 128 signed levels [-64, 63] with the layer's W*_min held in
/// zero_base; accumulators use the full signed 32-bit range.
struct QuantParams
{
    double eps             = 1.0;
    std::int64_t levels    = 256;
    bool isSigned          = false;
    std::int32_t zeroBase  = 0;

    static QuantParams Activation(double eps);
    static QuantParams Weight(double eps, std::int32_t wStarMin);
    static QuantParams Accumulator(double eps);

    std::int64_t Min() const;
    std::int64_t Max() const;
    /// Throws InvalidArgument unless eps is positive and finite and the level count is one
    /// of 128, 256 or 2^32.
    void Validate() const;
};

using Shape = std::vector<int>;

std::size_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

/// Integer tensor. Data is held widened to int32 regardless of the storage tag.
struct QTensor
{
    Shape shape;
    DType dtype = DType::U8;
    std::vector<std::int32_t> data;
    QuantParams qp;

    QTensor() = default;
    QTensor(Shape s, DType d, QuantParams q);

    std::size_t Size() const
    {
        return data.size();
    }
    /// Checks data length against the shape and every element against the range of qp.
    void Validate() const;
};

/// Real-valued tensor used by the float reference path.
struct RTensor
{
    Shape shape;
    std::vector<float> data;

    RTensor() = default;
    explicit RTensor(Shape s);
    RTensor(Shape s, std::vector<float> values);

    std::size_t Size() const
    {
        return data.size();
    }
    void Validate() const;
};

/// Q(t) = eps * floor(t / eps), saturated to the representable range. Returns the integer
/// codes; a non-finite element is rejected with its index.
QTensor Quantize(const RTensor& t, const QuantParams& qp, DType dtype);
RTensor Dequantize(const QTensor& q);

/// (w_max - w_min) / (2^7 - 1).
double WeightEps(double wMin, double wMax);
/// alpha / (2^8 - 1).
double ActEps(double alpha);

struct DecomposedWeights
{
    QTensor wStar;              ///< values in [-64, 63]
    std::int32_t wStarMin = 0;  ///< layer offset, also stored in wStar.qp.zeroBase
};

/// W ~= eps_w * W*_min + eps_w * W*. eps_w must cover the tensor's range, i.e. be at least
/// WeightEps(min, max). Throws Overflow if W*_min + W* does not fit a signed byte and
/// Internal if the reconstruction bound is violated.
DecomposedWeights DecomposeWeights(const RTensor& w, double epsW);

/// Per-channel integer affine with a fused ReLU:
///     out = clamp((multiplier * acc + bias) >> shift, 0, 255)
/// The product is formed in 64 bits and the shift rounds toward negative infinity, which
/// coincides with rounding toward zero on every value that survives the clamp.
struct Requant
{
    std::vector<std::int32_t> multiplier;
    std::vector<std::int32_t> shift;
    std::vector<std::int32_t> bias;

    std::size_t Channels() const
    {
        return bias.size();
    }
    void Validate() const;
};

/// acc is an I32 tensor of shape (C, H, W); the result is U8 with the given output params.
QTensor IntAffineRequant(const QTensor& acc, const Requant& rq, const QuantParams& outQp);

/// Single-value kernel shared by the engine's fused conv path.
inline std::int32_t RequantOne(std::int64_t acc, std::int32_t multiplier, std::int32_t shift, std::int32_t bias)
{
    const std::int64_t v = static_cast<std::int64_t>(multiplier) * acc + bias;
    const std::int64_t s = v >> shift;
    return static_cast<std::int32_t>(s < 0 ? 0 : (s > 255 ? 255 : s));
}

}    // namespace frontnet
