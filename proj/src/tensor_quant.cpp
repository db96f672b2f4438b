//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/error.hpp"
#include "frontnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace frontnet
{

namespace
{

constexpr std::int64_t kAccLevels = std::int64_t{ 1 } << 32;

}    // namespace

const char* ToString(DType dtype)
{
    switch (dtype)
    {
        case DType::U8:
            return "u8";
        case DType::I8:
            return "i8";
        case DType::I32:
            return "i32";
        case DType::F32:
            return "f32";
    }
    return "?";
}

QuantParams QuantParams::Activation(double eps)
{
    return QuantParams{ eps, 256, false, 0 };
}

QuantParams QuantParams::Weight(double eps, std::int32_t wStarMin)
{
    return QuantParams{ eps, 128, true, wStarMin };
}

QuantParams QuantParams::Accumulator(double eps)
{
    return QuantParams{ eps, kAccLevels, true, 0 };
}

std::int64_t QuantParams::Min() const
{
    return isSigned ? -(levels / 2) : 0;
}

std::int64_t QuantParams::Max() const
{
    return isSigned ? levels / 2 - 1 : levels - 1;
}

void QuantParams::Validate() const
{
    if (!(eps > 0.0) || !std::isfinite(eps))
    {
        Fail(ErrorKind::InvalidArgument, "quantization step must be positive and finite");
    }
    if (levels != 128 && levels != 256 && levels != kAccLevels)
    {
        Fail(ErrorKind::InvalidArgument, "unsupported level count " + std::to_string(levels));
    }
}

std::size_t NumElements(const Shape& shape)
{
    std::size_t n = 1;
    for (int d : shape)
    {
        if (d < 0)
        {
            Fail(ErrorKind::ShapeMismatch, "negative dimension in shape " + ShapeToString(shape));
        }
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

std::string ShapeToString(const Shape& shape)
{
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i)
    {
        os << (i ? "," : "") << shape[i];
    }
    os << ")";
    return os.str();
}

QTensor::QTensor(Shape s, DType d, QuantParams q)
    : shape(std::move(s))
    , dtype(d)
    , data(NumElements(shape), 0)
    , qp(q)
{}

void QTensor::Validate() const
{
    if (data.size() != NumElements(shape))
    {
        Fail(ErrorKind::ShapeMismatch, "tensor data length " + std::to_string(data.size()) +
                                           " does not match shape " + ShapeToString(shape));
    }
    const std::int64_t lo = qp.Min();
    const std::int64_t hi = qp.Max();
    for (std::size_t i = 0; i < data.size(); ++i)
    {
        if (data[i] < lo || data[i] > hi)
        {
            Fail(ErrorKind::Overflow, "element " + std::to_string(i) + " = " + std::to_string(data[i]) +
                                          " outside representable range");
        }
    }
}

RTensor::RTensor(Shape s)
    : shape(std::move(s))
    , data(NumElements(shape), 0.0f)
{}

RTensor::RTensor(Shape s, std::vector<float> values)
    : shape(std::move(s))
    , data(std::move(values))
{
    if (data.size() != NumElements(shape))
    {
        Fail(ErrorKind::ShapeMismatch, "tensor data length does not match shape " + ShapeToString(shape));
    }
}

void RTensor::Validate() const
{
    if (data.size() != NumElements(shape))
    {
        Fail(ErrorKind::ShapeMismatch, "tensor data length does not match shape " + ShapeToString(shape));
    }
    for (std::size_t i = 0; i < data.size(); ++i)
    {
        if (!std::isfinite(data[i]))
        {
            Fail(ErrorKind::Numeric, "non-finite element at index " + std::to_string(i));
        }
    }
}

QTensor Quantize(const RTensor& t, const QuantParams& qp, DType dtype)
{
    qp.Validate();
    QTensor out(t.shape, dtype, qp);
    const double lo = static_cast<double>(qp.Min());
    const double hi = static_cast<double>(qp.Max());
    for (std::size_t i = 0; i < t.data.size(); ++i)
    {
        const double x = t.data[i];
        if (!std::isfinite(x))
        {
            Fail(ErrorKind::Numeric, "non-finite element at index " + std::to_string(i));
        }
        const double q = std::floor(x / qp.eps) - qp.zeroBase;
        out.data[i]    = static_cast<std::int32_t>(std::clamp(q, lo, hi));
    }
    return out;
}

RTensor Dequantize(const QTensor& q)
{
    RTensor out(q.shape);
    for (std::size_t i = 0; i < q.data.size(); ++i)
    {
        out.data[i] = static_cast<float>(q.qp.eps * (static_cast<double>(q.data[i]) + q.qp.zeroBase));
    }
    return out;
}

double WeightEps(double wMin, double wMax)
{
    if (!std::isfinite(wMin) || !std::isfinite(wMax) || !(wMax > wMin))
    {
        Fail(ErrorKind::Degenerate, "degenerate weight range [" + std::to_string(wMin) + ", " +
                                        std::to_string(wMax) + "]");
    }
    return (wMax - wMin) / 127.0;
}

double ActEps(double alpha)
{
    if (!(alpha > 0.0) || !std::isfinite(alpha))
    {
        Fail(ErrorKind::Degenerate, "dead activation: alpha = " + std::to_string(alpha));
    }
    return alpha / 255.0;
}

DecomposedWeights DecomposeWeights(const RTensor& w, double epsW)
{
    w.Validate();
    if (w.data.empty())
    {
        Fail(ErrorKind::InvalidArgument, "empty weight tensor");
    }
    if (!(epsW > 0.0) || !std::isfinite(epsW))
    {
        Fail(ErrorKind::InvalidArgument, "weight step must be positive");
    }
    const auto [minIt, maxIt] = std::minmax_element(w.data.begin(), w.data.end());
    const double wMin         = *minIt;
    const double wMax         = *maxIt;
    if ((wMax - wMin) / epsW > 127.0 * (1.0 + 1e-9))
    {
        Fail(ErrorKind::InvalidArgument, "weight step does not cover the tensor range");
    }

    // Nearest-code rounding keeps the reconstruction unbiased. Since round() commutes with
    // integer shifts, every code lands in base + [0, 127], i.e. W* in [-64, 63].
    const auto base             = static_cast<std::int64_t>(std::round(wMin / epsW));
    const std::int64_t wStarMin = base + 64;
    if (base < -128 || base + 127 > 127)
    {
        Fail(ErrorKind::Overflow, "weight range [" + std::to_string(wMin) + ", " + std::to_string(wMax) +
                                      "] is not representable as a signed byte at this step");
    }

    DecomposedWeights out;
    out.wStarMin = static_cast<std::int32_t>(wStarMin);
    out.wStar    = QTensor(w.shape, DType::I8, QuantParams::Weight(epsW, out.wStarMin));
    for (std::size_t i = 0; i < w.data.size(); ++i)
    {
        const double x         = w.data[i];
        const std::int64_t rel = std::clamp<std::int64_t>(std::llround(x / epsW) - wStarMin, -64, 63);
        const double recon     = epsW * static_cast<double>(rel + wStarMin);
        if (std::abs(recon - x) > epsW * (1.0 + 1e-9))
        {
            Fail(ErrorKind::Internal, "weight reconstruction bound violated at index " + std::to_string(i));
        }
        out.wStar.data[i] = static_cast<std::int32_t>(rel);
    }
    return out;
}

void Requant::Validate() const
{
    if (multiplier.size() != bias.size() || shift.size() != bias.size())
    {
        Fail(ErrorKind::InvalidArgument, "requant multiplier/shift/bias lengths differ");
    }
    for (std::int32_t s : shift)
    {
        if (s < 0 || s > 31)
        {
            Fail(ErrorKind::InvalidArgument, "requant shift " + std::to_string(s) + " outside [0, 31]");
        }
    }
}

QTensor IntAffineRequant(const QTensor& acc, const Requant& rq, const QuantParams& outQp)
{
    rq.Validate();
    if (acc.dtype != DType::I32)
    {
        Fail(ErrorKind::InvalidArgument, "requant input must be a 32-bit accumulator tensor");
    }
    if (acc.shape.empty() || static_cast<std::size_t>(acc.shape[0]) != rq.Channels())
    {
        Fail(ErrorKind::ShapeMismatch, "requant bias length " + std::to_string(rq.Channels()) +
                                           " does not match channel count of " + ShapeToString(acc.shape));
    }
    if (acc.data.size() != NumElements(acc.shape))
    {
        Fail(ErrorKind::ShapeMismatch, "accumulator data length does not match its shape");
    }
    QTensor out(acc.shape, DType::U8, outQp);
    const std::size_t channels = rq.Channels();
    const std::size_t plane    = channels ? acc.data.size() / channels : 0;
    for (std::size_t c = 0; c < channels; ++c)
    {
        for (std::size_t i = 0; i < plane; ++i)
        {
            const std::size_t idx = c * plane + i;
            out.data[idx]         = RequantOne(acc.data[idx], rq.multiplier[c], rq.shift[c], rq.bias[c]);
        }
    }
    return out;
}

}    // namespace frontnet
