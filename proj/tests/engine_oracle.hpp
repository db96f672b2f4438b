//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

// Reference integer pipeline built from plain loops over the stored parameters. It shares
// no code with the engine.

#include "frontnet/quantizer.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace testoracle
{

using namespace frontnet;

// Straight six-loop convolution with explicit bounds checks for padding.
inline std::vector<std::int64_t> NaiveConv(const std::vector<std::int32_t>& in, int ci, int hi, int wi,
                                    const std::vector<std::int32_t>& w, int co, int k, int s, int p, int ho, int wo)
{
    std::vector<std::int64_t> out(static_cast<std::size_t>(co) * ho * wo, 0);
    for (int o = 0; o < co; ++o)
        for (int y = 0; y < ho; ++y)
            for (int x = 0; x < wo; ++x)
            {
                std::int64_t acc = 0;
                for (int c = 0; c < ci; ++c)
                    for (int dy = 0; dy < k; ++dy)
                        for (int dx = 0; dx < k; ++dx)
                        {
                            const int yy = y * s + dy - p;
                            const int xx = x * s + dx - p;
                            if (yy < 0 || yy >= hi || xx < 0 || xx >= wi)
                            {
                                continue;
                            }
                            acc += static_cast<std::int64_t>(w[((o * ci + c) * k + dy) * k + dx]) *
                                   in[(c * hi + yy) * wi + xx];
                        }
                out[(o * ho + y) * wo + x] = acc;
            }
    return out;
}

inline std::int32_t OracleRequant(std::int64_t acc, std::int32_t m, std::int32_t sh, std::int32_t b)
{
    const __int128 v = static_cast<__int128>(m) * acc + b;
    // Floor division by 2^sh done arithmetically, not by shifting.
    const __int128 d = static_cast<__int128>(1) << sh;
    __int128 q       = v / d;
    if (v % d != 0 && v < 0)
    {
        --q;
    }
    return static_cast<std::int32_t>(std::clamp<__int128>(q, 0, 255));
}

inline std::vector<std::int32_t> Effective(const QTensor& w)
{
    std::vector<std::int32_t> out(w.data.size());
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        out[i] = w.data[i] + w.qp.zeroBase;
    }
    return out;
}

// Whole integer pipeline, rebuilt from the stored parameters alone.
inline std::vector<std::vector<std::int64_t>> OracleForward(const QuantizedGraph& qg, const QTensor& img)
{
    std::vector<std::vector<std::int64_t>> acts;
    std::vector<std::int32_t> cur(img.data.begin(), img.data.end());
    std::vector<std::int64_t> acc;
    int c = img.shape[0], h = img.shape[1], w = img.shape[2];
    for (std::size_t i = 0; i < qg.graph.layers.size(); ++i)
    {
        const LayerSpec& l = qg.graph.layers[i];
        const QLayer& q    = qg.layers[i];
        std::vector<std::int64_t> out;
        switch (l.kind)
        {
            case LayerKind::Conv2d:
            {
                const int ho = (h + 2 * l.ph - l.kh) / l.sh + 1;
                const int wo = (w + 2 * l.pw - l.kw) / l.sw + 1;
                out          = NaiveConv(cur, c, h, w, Effective(q.weights), l.outCh, l.kh, l.sh, l.ph, ho, wo);
                acc          = out;
                c = l.outCh, h = ho, w = wo;
                break;
            }
            case LayerKind::RequantAct:
            {
                const std::size_t plane = static_cast<std::size_t>(h) * w;
                cur.assign(acc.size(), 0);
                for (std::size_t k = 0; k < acc.size(); ++k)
                {
                    const std::size_t ch = k / plane;
                    cur[k] = OracleRequant(acc[k], q.requant.multiplier[ch], q.requant.shift[ch], q.requant.bias[ch]);
                }
                out.assign(cur.begin(), cur.end());
                break;
            }
            case LayerKind::MaxPool:
            {
                const int ho = (h + 1) / 2, wo = (w + 1) / 2;
                std::vector<std::int32_t> pooled(static_cast<std::size_t>(c) * ho * wo, 0);
                for (int ch = 0; ch < c; ++ch)
                    for (int y = 0; y < ho; ++y)
                        for (int x = 0; x < wo; ++x)
                        {
                            std::int32_t m = 0;
                            for (int dy = 0; dy < 2; ++dy)
                                for (int dx = 0; dx < 2; ++dx)
                                    if (2 * y + dy < h && 2 * x + dx < w)
                                        m = std::max(m, cur[(ch * h + 2 * y + dy) * w + 2 * x + dx]);
                            pooled[(ch * ho + y) * wo + x] = m;
                        }
                cur = pooled;
                h = ho, w = wo;
                out.assign(cur.begin(), cur.end());
                break;
            }
            case LayerKind::DropoutNoop:
                out.assign(cur.begin(), cur.end());
                break;
            case LayerKind::FullyConnected:
            {
                const auto wt = Effective(q.weights);
                for (int o = 0; o < 4; ++o)
                {
                    std::int64_t a = q.fcBias[o];
                    for (std::size_t k = 0; k < cur.size(); ++k)
                    {
                        a += static_cast<std::int64_t>(wt[o * cur.size() + k]) * cur[k];
                    }
                    out.push_back(a);
                }
                break;
            }
        }
        acts.push_back(out);
    }
    return acts;
}

}    // namespace testoracle
