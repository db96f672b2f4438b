//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/engine.hpp"

#include "frontnet/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace frontnet
{

namespace
{

std::vector<std::int32_t> EffectiveWeights(const QTensor& wStar)
{
    std::vector<std::int32_t> w(wStar.data.size());
    for (std::size_t i = 0; i < w.size(); ++i)
    {
        w[i] = wStar.data[i] + wStar.qp.zeroBase;
    }
    return w;
}

template <typename Fn>
void ParallelRows(int rows, int threads, Fn&& fn)
{
    threads = std::clamp(threads, 1, std::max(rows, 1));
    if (threads == 1)
    {
        fn(0, rows);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (rows + threads - 1) / threads;
    for (int t = 0; t < threads; ++t)
    {
        const int r0 = t * chunk;
        const int r1 = std::min(rows, r0 + chunk);
        if (r0 < r1)
        {
            pool.emplace_back([&fn, r0, r1] { fn(r0, r1); });
        }
    }
    for (auto& th : pool)
    {
        th.join();
    }
}

}    // namespace

QTensor ConvInt(const QTensor& in, const std::vector<std::int32_t>& weights, const LayerSpec& l, int threads)
{
    if (in.shape.size() != 3 || in.shape[0] != l.inCh)
    {
        Fail(ErrorKind::ShapeMismatch, "layer " + l.name + ": input " + ShapeToString(in.shape) +
                                           " does not match " + std::to_string(l.inCh) + " channels");
    }
    if (weights.size() != static_cast<std::size_t>(l.NumWeights()))
    {
        Fail(ErrorKind::ShapeMismatch, "layer " + l.name + ": weight count mismatch");
    }
    const int hi = in.shape[1], wi = in.shape[2];
    const int ho = OutDim(hi, l.kh, l.sh, l.ph, false);
    const int wo = OutDim(wi, l.kw, l.sw, l.pw, false);
    QTensor out({ l.outCh, ho, wo }, DType::I32, QuantParams::Accumulator(1.0));
    std::atomic<bool> overflow{ false };

    ParallelRows(ho, threads, [&](int r0, int r1) {
        std::vector<std::int64_t> row(static_cast<std::size_t>(wo));
        for (int co = 0; co < l.outCh; ++co)
        {
            for (int r = r0; r < r1; ++r)
            {
                std::fill(row.begin(), row.end(), 0);
                for (int ci = 0; ci < l.inCh; ++ci)
                {
                    const std::int32_t* plane = in.data.data() + static_cast<std::size_t>(ci) * hi * wi;
                    const std::int32_t* wk =
                        weights.data() + (static_cast<std::size_t>(co) * l.inCh + ci) * l.kh * l.kw;
                    for (int ki = 0; ki < l.kh; ++ki)
                    {
                        const int y = r * l.sh - l.ph + ki;
                        if (y < 0 || y >= hi)
                        {
                            continue;
                        }
                        const std::int32_t* src = plane + static_cast<std::size_t>(y) * wi;
                        for (int kj = 0; kj < l.kw; ++kj)
                        {
                            const std::int64_t w = wk[ki * l.kw + kj];
                            for (int c = 0; c < wo; ++c)
                            {
                                const int x = c * l.sw - l.pw + kj;
                                if (x >= 0 && x < wi)
                                {
                                    row[c] += w * src[x];
                                }
                            }
                        }
                    }
                }
                std::int32_t* dst = out.data.data() + (static_cast<std::size_t>(co) * ho + r) * wo;
                for (int c = 0; c < wo; ++c)
                {
                    if (row[c] > std::numeric_limits<std::int32_t>::max() ||
                        row[c] < std::numeric_limits<std::int32_t>::min())
                    {
                        overflow = true;
                    }
                    dst[c] = static_cast<std::int32_t>(row[c]);
                }
            }
        }
    });
    if (overflow)
    {
        Fail(ErrorKind::Overflow, "layer " + l.name + ": accumulator exceeds 32 bits");
    }
    return out;
}

QTensor MaxPoolInt(const QTensor& in, const LayerSpec& l)
{
    const int c = in.shape[0], hi = in.shape[1], wi = in.shape[2];
    const int ho = OutDim(hi, l.kh, l.sh, l.ph, true);
    const int wo = OutDim(wi, l.kw, l.sw, l.pw, true);
    QTensor out({ c, ho, wo }, DType::U8, in.qp);
    for (int ch = 0; ch < c; ++ch)
    {
        for (int r = 0; r < ho; ++r)
        {
            for (int col = 0; col < wo; ++col)
            {
                std::int32_t m = std::numeric_limits<std::int32_t>::min();
                for (int ki = 0; ki < l.kh; ++ki)
                {
                    for (int kj = 0; kj < l.kw; ++kj)
                    {
                        const int y = r * l.sh - l.ph + ki;
                        const int x = col * l.sw - l.pw + kj;
                        if (y >= 0 && y < hi && x >= 0 && x < wi)
                        {
                            m = std::max(m, in.data[(static_cast<std::size_t>(ch) * hi + y) * wi + x]);
                        }
                    }
                }
                out.data[(static_cast<std::size_t>(ch) * ho + r) * wo + col] = m;
            }
        }
    }
    return out;
}

InferenceResult InferInt(const QuantizedGraph& qg, const QTensor& image, const InferOptions& opt)
{
    if (image.shape != qg.graph.inputShape)
    {
        Fail(ErrorKind::ShapeMismatch, "image " + ShapeToString(image.shape) + " does not match graph input " +
                                           ShapeToString(qg.graph.inputShape));
    }
    if (image.data.size() != NumElements(image.shape) ||
        std::any_of(image.data.begin(), image.data.end(), [](std::int32_t v) { return v < 0 || v > 255; }))
    {
        Fail(ErrorKind::InvalidArgument, "image must hold u8 codes");
    }
    InferenceResult res;
    QTensor cur = image;
    for (std::size_t i = 0; i < qg.graph.layers.size(); ++i)
    {
        const LayerSpec& l = qg.graph.layers[i];
        const QLayer& q    = qg.layers[i];
        switch (l.kind)
        {
            case LayerKind::Conv2d:
                cur    = ConvInt(cur, EffectiveWeights(q.weights), l, opt.threads);
                cur.qp = QuantParams::Accumulator(q.epsOut);
                break;
            case LayerKind::RequantAct:
                cur = IntAffineRequant(cur, q.requant, QuantParams::Activation(q.epsOut));
                break;
            case LayerKind::MaxPool:
                cur = MaxPoolInt(cur, l);
                break;
            case LayerKind::DropoutNoop:
                break;
            case LayerKind::FullyConnected:
            {
                const auto w = EffectiveWeights(q.weights);
                QTensor out({ l.outCh, 1, 1 }, DType::I32, QuantParams::Accumulator(q.epsOut));
                for (int o = 0; o < l.outCh; ++o)
                {
                    std::int64_t acc = q.fcBias[o];
                    for (int k = 0; k < l.inCh; ++k)
                    {
                        acc += static_cast<std::int64_t>(w[static_cast<std::size_t>(o) * l.inCh + k]) * cur.data[k];
                    }
                    if (acc > std::numeric_limits<std::int32_t>::max() ||
                        acc < std::numeric_limits<std::int32_t>::min())
                    {
                        Fail(ErrorKind::Overflow, "layer " + l.name + ": output exceeds 32 bits");
                    }
                    out.data[o] = static_cast<std::int32_t>(acc);
                }
                cur = std::move(out);
                break;
            }
        }
        if (opt.keepActivations)
        {
            res.activations.push_back(cur);
        }
    }
    if (cur.data.size() != 4)
    {
        Fail(ErrorKind::ShapeMismatch, "graph does not end in a 4-output layer");
    }
    for (int k = 0; k < 4; ++k)
    {
        res.raw[k] = cur.data[k];
    }
    res.pose = { qg.outputEps[0] * res.raw[0], qg.outputEps[1] * res.raw[1], qg.outputEps[2] * res.raw[2],
                 qg.outputEps[3] * res.raw[3] };
    return res;
}

std::array<double, 4> InferFloat(const FloatNet& net, const RTensor& image, const std::vector<double>* alphas,
                                 std::vector<RTensor>* trace)
{
    const NetGraph& g = net.graph;
    if (image.shape != g.inputShape)
    {
        Fail(ErrorKind::ShapeMismatch, "image " + ShapeToString(image.shape) + " does not match graph input " +
                                           ShapeToString(g.inputShape));
    }
    if (net.params.size() != g.layers.size())
    {
        Fail(ErrorKind::ShapeMismatch, "float parameter list does not match the graph");
    }
    RTensor cur = image;
    for (std::size_t i = 0; i < g.layers.size(); ++i)
    {
        const LayerSpec& l   = g.layers[i];
        const FloatParams& p = net.params[i];
        switch (l.kind)
        {
            case LayerKind::Conv2d:
            {
                const int hi = cur.shape[1], wi = cur.shape[2];
                const int ho = l.outShape[1], wo = l.outShape[2];
                RTensor out({ l.outCh, ho, wo });
                for (int co = 0; co < l.outCh; ++co)
                {
                    for (int r = 0; r < ho; ++r)
                    {
                        for (int c = 0; c < wo; ++c)
                        {
                            double acc = 0.0;
                            for (int ci = 0; ci < l.inCh; ++ci)
                            {
                                for (int ki = 0; ki < l.kh; ++ki)
                                {
                                    const int y = r * l.sh - l.ph + ki;
                                    if (y < 0 || y >= hi)
                                    {
                                        continue;
                                    }
                                    for (int kj = 0; kj < l.kw; ++kj)
                                    {
                                        const int x = c * l.sw - l.pw + kj;
                                        if (x < 0 || x >= wi)
                                        {
                                            continue;
                                        }
                                        acc += static_cast<double>(
                                                   p.weight.data[((static_cast<std::size_t>(co) * l.inCh + ci) * l.kh +
                                                                  ki) * l.kw + kj]) *
                                               cur.data[(static_cast<std::size_t>(ci) * hi + y) * wi + x];
                                    }
                                }
                            }
                            out.data[(static_cast<std::size_t>(co) * ho + r) * wo + c] = static_cast<float>(acc);
                        }
                    }
                }
                cur = std::move(out);
                break;
            }
            case LayerKind::RequantAct:
            {
                const std::size_t plane = cur.data.size() / l.outCh;
                const double clip = alphas ? (*alphas)[i] : std::numeric_limits<double>::infinity();
                for (int c = 0; c < l.outCh; ++c)
                {
                    const double k = p.gamma[c] / std::sqrt(static_cast<double>(p.var[c]) + net.bnEps);
                    for (std::size_t j = 0; j < plane; ++j)
                    {
                        float& v       = cur.data[c * plane + j];
                        const double y = k * (v - p.mean[c]) + p.beta[c];
                        v              = static_cast<float>(std::min(std::max(y, 0.0), clip));
                    }
                }
                break;
            }
            case LayerKind::MaxPool:
            {
                const int ch = cur.shape[0], hi = cur.shape[1], wi = cur.shape[2];
                const int ho = l.outShape[1], wo = l.outShape[2];
                RTensor out({ ch, ho, wo });
                for (int c = 0; c < ch; ++c)
                {
                    for (int r = 0; r < ho; ++r)
                    {
                        for (int col = 0; col < wo; ++col)
                        {
                            float m = -std::numeric_limits<float>::infinity();
                            for (int ki = 0; ki < l.kh; ++ki)
                            {
                                for (int kj = 0; kj < l.kw; ++kj)
                                {
                                    const int y = r * l.sh - l.ph + ki;
                                    const int x = col * l.sw - l.pw + kj;
                                    if (y >= 0 && y < hi && x >= 0 && x < wi)
                                    {
                                        m = std::max(m, cur.data[(static_cast<std::size_t>(c) * hi + y) * wi + x]);
                                    }
                                }
                            }
                            out.data[(static_cast<std::size_t>(c) * ho + r) * wo + col] = m;
                        }
                    }
                }
                cur = std::move(out);
                break;
            }
            case LayerKind::DropoutNoop:
                break;
            case LayerKind::FullyConnected:
            {
                RTensor out({ l.outCh, 1, 1 });
                for (int o = 0; o < l.outCh; ++o)
                {
                    double acc = p.bias[o];
                    for (int k = 0; k < l.inCh; ++k)
                    {
                        acc += static_cast<double>(p.weight.data[static_cast<std::size_t>(o) * l.inCh + k]) *
                               cur.data[k];
                    }
                    out.data[o] = static_cast<float>(acc);
                }
                cur = std::move(out);
                break;
            }
        }
        if (trace)
        {
            trace->push_back(cur);
        }
    }
    return { cur.data[0], cur.data[1], cur.data[2], cur.data[3] };
}

GrayImage CropCenter(const GrayImage& frame, int height, int width)
{
    if (height <= 0 || width <= 0 || height > frame.height || width > frame.width)
    {
        Fail(ErrorKind::InvalidArgument, "crop " + std::to_string(width) + "x" + std::to_string(height) +
                                             " does not fit a " + std::to_string(frame.width) + "x" +
                                             std::to_string(frame.height) + " frame");
    }
    const int top  = (frame.height - height) / 2;
    const int left = (frame.width - width) / 2;
    GrayImage out(width, height);
    for (int r = 0; r < height; ++r)
    {
        std::copy_n(frame.pixels.begin() + static_cast<std::ptrdiff_t>(top + r) * frame.width + left, width,
                    out.pixels.begin() + static_cast<std::ptrdiff_t>(r) * width);
    }
    return out;
}

GrayImage Downscale2x(const GrayImage& img)
{
    if (img.width < 2 || img.height < 2)
    {
        Fail(ErrorKind::InvalidArgument, "image too small to downscale");
    }
    // Output pixel centres fall midway between source pixels, so both weights are 0.5.
    constexpr std::uint32_t wx = 128, wy = 128;
    GrayImage out(img.width / 2, img.height / 2);
    for (int r = 0; r < out.height; ++r)
    {
        for (int c = 0; c < out.width; ++c)
        {
            const std::uint32_t a = img.At(2 * r, 2 * c), b = img.At(2 * r, 2 * c + 1);
            const std::uint32_t d = img.At(2 * r + 1, 2 * c), e = img.At(2 * r + 1, 2 * c + 1);
            const std::uint32_t v = a * (256 - wx) * (256 - wy) + b * wx * (256 - wy) + d * (256 - wx) * wy +
                                    e * wx * wy;
            out.At(r, c) = static_cast<std::uint8_t>((v + 32768) >> 16);
        }
    }
    return out;
}

GrayImage PrepareInput(const GrayImage& frame, const NetGraph& g)
{
    const int h = g.inputShape[1];
    const int w = g.inputShape[2];
    if (frame.height == h && frame.width == w)
    {
        return frame;
    }
    if (2 * h <= frame.height && 2 * w <= frame.width)
    {
        return Downscale2x(CropCenter(frame, 2 * h, 2 * w));
    }
    return CropCenter(frame, h, w);
}

std::array<double, 4> QuantErrorBound(const FloatNet& net, const QuantizedGraph& qg)
{
    const NetGraph& g = net.graph;
    double e          = 0.0;    // bound on |real(int) - float| of the current activations
    double a          = 1.0;    // bound on |float| of the current activations
    std::vector<double> pre;    // per-channel pre-activation bound of the last conv
    std::vector<double> accMax;
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < g.layers.size(); ++i)
    {
        const LayerSpec& l = g.layers[i];
        const QLayer& q    = qg.layers[i];
        const double epsW  = l.HasWeights() ? q.weights.qp.eps : 0.0;
        if (l.kind == LayerKind::Conv2d || l.kind == LayerKind::FullyConnected)
        {
            const std::size_t taps = static_cast<std::size_t>(l.NumWeights() / l.outCh);
            pre.assign(l.outCh, 0.0);
            accMax.assign(l.outCh, 0.0);
            for (int o = 0; o < l.outCh; ++o)
            {
                double w1 = 0.0, wq = 0.0;
                for (std::size_t t = 0; t < taps; ++t)
                {
                    const std::size_t idx = o * taps + t;
                    w1 += std::abs(net.params[i].weight.data[idx]) + epsW;
                    wq += std::abs(q.weights.data[idx] + q.weights.qp.zeroBase);
                }
                pre[o]    = w1 * e + static_cast<double>(taps) * epsW * a;
                accMax[o] = wq * 255.0;
            }
            if (l.kind == LayerKind::FullyConnected)
            {
                for (int o = 0; o < 4; ++o)
                {
                    const double biasErr = std::abs(q.fcBias[o] * q.epsOut - net.params[i].bias[o]);
                    out[o]               = pre[o] + biasErr;
                }
            }
        }
        else if (l.kind == LayerKind::RequantAct)
        {
            const FloatParams& p = net.params[i];
            double worst         = 0.0;
            for (int c = 0; c < l.outCh; ++c)
            {
                const double k     = p.gamma[c] / std::sqrt(static_cast<double>(p.var[c]) + net.bnEps);
                const double twoS  = std::ldexp(1.0, q.requant.shift[c]);
                const double dm    = std::abs(q.requant.multiplier[c] / twoS - q.scale[c]);
                const double db    = std::abs(q.requant.bias[c] / twoS - q.offset[c]);
                const double bound = std::abs(k) * pre[c] + q.epsOut * (1.0 + dm * accMax[c] + db);
                worst              = std::max(worst, bound);
            }
            e = worst;
            a = q.alpha;
        }
    }
    return out;
}

}    // namespace frontnet
