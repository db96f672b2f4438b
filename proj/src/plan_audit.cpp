//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/plan_audit.hpp"

#include <algorithm>
#include <vector>

namespace frontnet
{

namespace
{

std::int64_t Bytes(const LayerSpec& l, const Tile& t, std::int64_t& in, std::int64_t& w, std::int64_t& out)
{
    const std::int64_t ch   = t.chEnd - t.chBegin;
    const std::int64_t rows = t.rowEnd - t.rowBegin;
    switch (l.kind)
    {
        case LayerKind::Conv2d:
            in  = static_cast<std::int64_t>(t.inRowEnd - t.inRowBegin) * l.inShape[2] * l.inShape[0];
            w   = ch * l.inShape[0] * l.kh * l.kw;
            out = rows * l.outShape[2] * ch;
            break;
        case LayerKind::MaxPool:
            in  = static_cast<std::int64_t>(t.inRowEnd - t.inRowBegin) * l.inShape[2] * ch;
            w   = 0;
            out = rows * l.outShape[2] * ch;
            break;
        default:
            in  = l.inShape[0] * l.inShape[1] * l.inShape[2];
            w   = ch * in;
            out = ch * 4;
            break;
    }
    return in + w + out;
}

}    // namespace

AuditReport AuditPlan(const DeploymentPlan& p)
{
    AuditReport rep;
    auto flag = [&rep](const std::string& s) { rep.violations.push_back(s); };

    std::vector<std::int64_t> layerWeights;
    std::int64_t allWeights = 0;
    for (const PlanLayer& pl : p.layers)
    {
        const LayerSpec& l = pl.spec;
        const int cOut     = l.outShape[0];
        const int hOut     = l.outShape[1];
        std::vector<int> grid(static_cast<std::size_t>(cOut) * hOut, 0);
        const std::int64_t w = l.kind == LayerKind::Conv2d         ? std::int64_t{ l.outShape[0] } * l.inShape[0] * l.kh * l.kw
                               : l.kind == LayerKind::FullyConnected ? std::int64_t{ l.outShape[0] } * l.inShape[0] *
                                                                           l.inShape[1] * l.inShape[2]
                                                                     : 0;
        layerWeights.push_back(w);
        allWeights += w;
        if (w != pl.weightBytes)
        {
            flag(l.name + ": recorded weight bytes " + std::to_string(pl.weightBytes) + " != " + std::to_string(w));
        }
        for (const Tile& t : pl.tiles)
        {
            ++rep.tilesChecked;
            if (t.rowBegin < 0 || t.rowEnd > hOut || t.rowBegin >= t.rowEnd || t.chBegin < 0 || t.chEnd > cOut ||
                t.chBegin >= t.chEnd)
            {
                flag(l.name + ": tile bounds outside the output tensor");
                continue;
            }
            for (int c = t.chBegin; c < t.chEnd; ++c)
            {
                for (int r = t.rowBegin; r < t.rowEnd; ++r)
                {
                    ++grid[static_cast<std::size_t>(c) * hOut + r];
                }
            }
            if (l.kind != LayerKind::FullyConnected)
            {
                int lo = l.inShape[1], hi = -1;
                for (int r = t.rowBegin; r < t.rowEnd; ++r)
                {
                    for (int k = 0; k < l.kh; ++k)
                    {
                        const int y = r * l.sh - l.ph + k;
                        if (y >= 0 && y < l.inShape[1])
                        {
                            lo = std::min(lo, y);
                            hi = std::max(hi, y);
                        }
                    }
                }
                if (hi >= 0 && (t.inRowBegin > lo || t.inRowEnd < hi + 1))
                {
                    flag(l.name + ": tile rows [" + std::to_string(t.rowBegin) + "," + std::to_string(t.rowEnd) +
                         ") miss input rows of their receptive field");
                }
            }
            std::int64_t in = 0, wt = 0, out = 0;
            const std::int64_t ws = Bytes(l, t, in, wt, out);
            if (in != t.inBytes || wt != t.weightBytes || out != t.outBytes)
            {
                flag(l.name + ": tile byte counts disagree with the layer geometry");
            }
            if (2 * ws > p.mem.l1Bytes)
            {
                flag(l.name + ": tile needs " + std::to_string(2 * ws) + " B of L1 with double buffering");
            }
        }
        for (std::size_t k = 0; k < grid.size(); ++k)
        {
            if (grid[k] != 1)
            {
                flag(l.name + ": output cell covered " + std::to_string(grid[k]) + " times");
                break;
            }
        }
    }
    if (allWeights != p.l3WeightBytes)
    {
        flag("L3 weight total " + std::to_string(p.l3WeightBytes) + " != " + std::to_string(allWeights));
    }

    // Nodes must partition the layer list in order.
    std::vector<int> order;
    for (const L2Occupancy& o : p.occupancy)
    {
        order.insert(order.end(), o.layers.begin(), o.layers.end());
    }
    for (std::size_t k = 0; k < p.layers.size(); ++k)
    {
        if (k >= order.size() || order[k] != static_cast<int>(k))
        {
            flag("occupancy nodes do not partition the layers in execution order");
            break;
        }
    }
    if (order.size() != p.layers.size())
    {
        flag("occupancy nodes reference the wrong number of layers");
        return rep;
    }

    const int n = static_cast<int>(p.occupancy.size());
    std::vector<std::int64_t> nodeWeights(n, 0);
    for (int i = 0; i < n; ++i)
    {
        for (int li : p.occupancy[i].layers)
        {
            nodeWeights[i] += layerWeights[li];
        }
    }
    std::int64_t pair = 0;
    for (int i = 0; i < n; ++i)
    {
        ++rep.nodesChecked;
        const L2Occupancy& o    = p.occupancy[i];
        const LayerSpec& first  = p.layers[o.layers.front()].spec;
        const LayerSpec& last   = p.layers[o.layers.back()].spec;
        const std::int64_t in   = std::int64_t{ first.inShape[0] } * first.inShape[1] * first.inShape[2];
        const std::int64_t out  = std::int64_t{ last.outShape[0] } * last.outShape[1] * last.outShape[2] *
                                 (last.kind == LayerKind::FullyConnected ? 4 : 1);
        pair = std::max(pair, in + out);
        std::int64_t expect = p.mem.codeBudget + in + out;
        if (o.input != in || o.output != out || o.code != p.mem.codeBudget)
        {
            flag(o.node + ": activation or code bytes disagree with the layer geometry");
        }
        if (p.policy == WeightPolicy::StreamedL3)
        {
            const std::int64_t next = nodeWeights[(i + 1) % n];
            expect += nodeWeights[i] + next;
            if (o.weightsCurrent != nodeWeights[i] || o.weightsNext != next)
            {
                flag(o.node + ": streamed weight columns disagree with layer weights");
            }
            if (o.weightsLoadedDuring != (i + n - 1) % n)
            {
                flag(o.node + ": weights are not loaded during the preceding node");
            }
        }
        else
        {
            expect += allWeights;
            if (o.weightsResident != allWeights || o.weightsLoadedDuring != -1)
            {
                flag(o.node + ": resident weight column disagrees with the weight total");
            }
        }
        if (o.total != expect)
        {
            flag(o.node + ": total " + std::to_string(o.total) + " != recomputed " + std::to_string(expect));
        }
        if (expect > p.mem.l2Bytes)
        {
            flag(o.node + ": needs " + std::to_string(expect) + " B of L2");
        }
    }
    if (p.policy == WeightPolicy::ResidentL2 && allWeights + p.mem.codeBudget + pair > p.mem.l2Bytes)
    {
        flag("resident policy used although weights, code and activations exceed L2");
    }
    return rep;
}

}    // namespace frontnet
