//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/planner.hpp"

#include "frontnet/error.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace frontnet
{

void MemoryHierarchy::Validate() const
{
    if (!(l1Bytes > 0 && l1Bytes < l2Bytes && l2Bytes < l3Bytes))
    {
        Fail(ErrorKind::InvalidArgument, "memory hierarchy must satisfy 0 < l1 < l2 < l3");
    }
    if (!(codeBudget >= 0 && codeBudget < l2Bytes))
    {
        Fail(ErrorKind::InvalidArgument, "code budget must be non-negative and below the L2 size");
    }
}

nlohmann::json MemoryToJson(const MemoryHierarchy& m)
{
    return { { "l1_bytes", m.l1Bytes },
             { "l2_bytes", m.l2Bytes },
             { "l3_bytes", m.l3Bytes },
             { "code_budget_l2", m.codeBudget },
             { "dma_channels", m.dmaChannels } };
}

MemoryHierarchy MemoryFromJson(const nlohmann::json& j)
{
    MemoryHierarchy m;
    try
    {
        m.l1Bytes    = j.value("l1_bytes", m.l1Bytes);
        m.l2Bytes    = j.value("l2_bytes", m.l2Bytes);
        m.l3Bytes    = j.value("l3_bytes", m.l3Bytes);
        m.codeBudget = j.value("code_budget_l2", m.codeBudget);
        m.dmaChannels = j.value("dma_channels", m.dmaChannels);
    }
    catch (const nlohmann::json::exception& e)
    {
        Fail(ErrorKind::Schema, std::string("memory hierarchy document: ") + e.what());
    }
    try
    {
        m.Validate();
    }
    catch (const Error& e)
    {
        Fail(ErrorKind::Schema, e.what());
    }
    return m;
}

const char* ToString(WeightPolicy p)
{
    return p == WeightPolicy::StreamedL3 ? "streamed" : "resident";
}

WeightPolicy WeightPolicyFromString(const std::string& s)
{
    if (s == "streamed" || s == "streamed_l3")
    {
        return WeightPolicy::StreamedL3;
    }
    if (s == "resident" || s == "resident_l2")
    {
        return WeightPolicy::ResidentL2;
    }
    Fail(ErrorKind::InvalidArgument, "unknown weight policy '" + s + "' (expected streamed or resident)");
}

int OutputElementBytes(const LayerSpec& l)
{
    return l.kind == LayerKind::FullyConnected ? 4 : 1;
}

namespace
{

bool IsCompute(const LayerSpec& l)
{
    return l.kind == LayerKind::Conv2d || l.kind == LayerKind::MaxPool || l.kind == LayerKind::FullyConnected;
}

Tile MakeTile(const LayerSpec& l, int r0, int r1, int c0, int c1)
{
    Tile t;
    t.rowBegin = r0;
    t.rowEnd   = r1;
    t.chBegin  = c0;
    t.chEnd    = c1;
    const int hIn = l.inShape[1];
    const int wIn = l.inShape[2];
    const int wOut = l.outShape[2];
    const int ch   = c1 - c0;
    if (l.kind == LayerKind::FullyConnected)
    {
        t.inRowBegin  = 0;
        t.inRowEnd    = hIn;
        t.inBytes     = l.inCh;
        t.weightBytes = static_cast<std::int64_t>(ch) * l.inCh;
        t.outBytes    = static_cast<std::int64_t>(ch) * 4;
        return t;
    }
    t.inRowBegin  = std::max(0, r0 * l.sh - l.ph);
    t.inRowEnd    = std::min(hIn, (r1 - 1) * l.sh - l.ph + l.kh);
    const int inCh = l.kind == LayerKind::MaxPool ? ch : l.inCh;
    t.inBytes     = static_cast<std::int64_t>(t.inRowEnd - t.inRowBegin) * wIn * inCh;
    t.weightBytes = l.kind == LayerKind::Conv2d ? static_cast<std::int64_t>(ch) * l.inCh * l.kh * l.kw : 0;
    t.outBytes    = static_cast<std::int64_t>(r1 - r0) * wOut * ch * OutputElementBytes(l);
    return t;
}

std::vector<Tile> Enumerate(const LayerSpec& l, int rows, int chans)
{
    const int hOut = l.outShape[1];
    const int cOut = l.outShape[0];
    std::vector<Tile> tiles;
    for (int r = 0; r < hOut; r += rows)
    {
        for (int c = 0; c < cOut; c += chans)
        {
            tiles.push_back(MakeTile(l, r, std::min(hOut, r + rows), c, std::min(cOut, c + chans)));
        }
    }
    return tiles;
}

bool Fits(const std::vector<Tile>& tiles, std::int64_t budget)
{
    return std::all_of(tiles.begin(), tiles.end(), [budget](const Tile& t) { return t.L1Bytes() <= budget; });
}

/// Tallest row strip that fits with the given channel slice, or 0.
int BestRows(const LayerSpec& l, int chans, std::int64_t budget)
{
    for (int rows = l.outShape[1]; rows >= 1; --rows)
    {
        if (Fits(Enumerate(l, rows, chans), budget))
        {
            return rows;
        }
    }
    return 0;
}

}    // namespace

std::vector<Tile> TileLayer(const LayerSpec& l, std::int64_t l1Budget)
{
    if (!IsCompute(l))
    {
        Fail(ErrorKind::InvalidArgument, "layer " + l.name + " is not a compute layer");
    }
    const int cOut = l.outShape[0];
    const int hOut = l.outShape[1];
    if (const int rows = BestRows(l, cOut, l1Budget))
    {
        return Enumerate(l, rows, cOut);
    }
    int bestRows = 0, bestChans = 0;
    long bestCount = 0;
    for (int n = 2; n <= cOut; ++n)
    {
        const int chans = (cOut + n - 1) / n;
        const int rows  = BestRows(l, chans, l1Budget);
        if (!rows)
        {
            continue;
        }
        const long count = static_cast<long>((hOut + rows - 1) / rows) * ((cOut + chans - 1) / chans);
        const bool better = !bestRows || count < bestCount ||
                            (count == bestCount && (chans > bestChans || (chans == bestChans && rows > bestRows)));
        if (better)
        {
            bestRows  = rows;
            bestChans = chans;
            bestCount = count;
        }
    }
    if (!bestRows)
    {
        const Tile minimal = MakeTile(l, 0, 1, 0, 1);
        Fail(ErrorKind::Constraint, "layer " + l.name + " is untileable: a single row and channel needs " +
                                        std::to_string(minimal.L1Bytes()) + " B of L1 with double buffering, budget " +
                                        std::to_string(l1Budget) + " B");
    }
    return Enumerate(l, bestRows, bestChans);
}

namespace
{

struct Node
{
    std::string name;
    std::vector<int> layers;
    std::int64_t weights = 0;
    std::int64_t input   = 0;
    std::int64_t output  = 0;
};

std::vector<PlanLayer> ComputeLayers(const NetGraph& g)
{
    std::vector<PlanLayer> out;
    for (const LayerSpec& l : g.layers)
    {
        if (IsCompute(l))
        {
            PlanLayer pl;
            pl.spec        = l;
            pl.macs        = l.Macs();
            pl.weightBytes = l.NumWeights();
            out.push_back(std::move(pl));
        }
    }
    return out;
}

std::vector<Node> BuildNodes(const std::vector<PlanLayer>& layers, bool fusePool)
{
    std::vector<Node> nodes;
    for (std::size_t i = 0; i < layers.size(); ++i)
    {
        const LayerSpec& l = layers[i].spec;
        Node n;
        n.name    = l.name;
        n.layers  = { static_cast<int>(i) };
        n.weights = layers[i].weightBytes;
        n.input   = static_cast<std::int64_t>(NumElements(l.inShape));
        n.output  = l.OutputElements() * OutputElementBytes(l);
        if (fusePool && l.kind == LayerKind::Conv2d && i + 1 < layers.size() &&
            layers[i + 1].spec.kind == LayerKind::MaxPool)
        {
            const LayerSpec& p = layers[i + 1].spec;
            n.name += "+" + p.name;
            n.layers.push_back(static_cast<int>(i + 1));
            n.output = p.OutputElements();
            ++i;
        }
        nodes.push_back(std::move(n));
    }
    return nodes;
}

}    // namespace

bool ResidentFeasible(const NetGraph& g, const MemoryHierarchy& mem)
{
    const auto layers = ComputeLayers(g);
    const auto nodes  = BuildNodes(layers, false);
    std::int64_t weights = 0, pair = 0;
    for (const Node& n : nodes)
    {
        weights += n.weights;
        pair = std::max(pair, n.input + n.output);
    }
    return weights + mem.codeBudget + pair <= mem.l2Bytes;
}

DeploymentPlan Plan(const NetGraph& g, const MemoryHierarchy& mem, const PlanOptions& opt)
{
    mem.Validate();
    ValidateGraph(g);
    DeploymentPlan p;
    p.variant  = g.variant;
    p.policy   = opt.policy;
    p.mem      = mem;
    p.fusePool = opt.fusePool;
    p.inputBytes = g.inputShape.empty() ? 0 : static_cast<std::int64_t>(NumElements(g.inputShape));
    p.layers   = ComputeLayers(g);
    for (PlanLayer& pl : p.layers)
    {
        pl.tiles = TileLayer(pl.spec, mem.l1Bytes);
        p.l3WeightBytes += pl.weightBytes;
    }
    if (p.l3WeightBytes > mem.l3Bytes)
    {
        Fail(ErrorKind::Constraint, "weights need " + std::to_string(p.l3WeightBytes) + " B of L3, limit " +
                                        std::to_string(mem.l3Bytes));
    }

    const std::vector<Node> nodes = BuildNodes(p.layers, opt.fusePool);
    if (opt.policy == WeightPolicy::ResidentL2)
    {
        std::int64_t pair = 0;
        for (const Node& n : nodes)
        {
            pair = std::max(pair, n.input + n.output);
        }
        if (p.l3WeightBytes + mem.codeBudget + pair > mem.l2Bytes)
        {
            Fail(ErrorKind::Constraint, "resident weights infeasible: " + std::to_string(p.l3WeightBytes) +
                                            " B weights + " + std::to_string(mem.codeBudget) + " B code + " +
                                            std::to_string(pair) + " B activations exceed " +
                                            std::to_string(mem.l2Bytes) + " B of L2");
        }
    }
    const int count = static_cast<int>(nodes.size());
    for (int i = 0; i < count; ++i)
    {
        const Node& n = nodes[i];
        L2Occupancy o;
        o.node       = n.name;
        o.layers     = n.layers;
        o.code       = mem.codeBudget;
        o.input      = n.input;
        o.output     = n.output;
        o.naiveTotal = mem.codeBudget + p.l3WeightBytes + n.input + n.output;
        if (opt.policy == WeightPolicy::StreamedL3)
        {
            // The last node prefetches the first node's weights for the next frame.
            o.weightsCurrent      = n.weights;
            o.weightsNext         = nodes[(i + 1) % count].weights;
            o.total               = o.code + o.weightsCurrent + o.weightsNext + o.input + o.output;
            o.weightsLoadedDuring = (i + count - 1) % count;
        }
        else
        {
            o.weightsResident     = p.l3WeightBytes;
            o.total               = o.code + o.weightsResident + o.input + o.output;
            o.weightsLoadedDuring = -1;
        }
        if (o.total > mem.l2Bytes)
        {
            Fail(ErrorKind::Constraint, "node " + o.node + " needs " + std::to_string(o.total) + " B of L2, limit " +
                                            std::to_string(mem.l2Bytes));
        }
        p.occupancy.push_back(std::move(o));
    }
    return p;
}

nlohmann::json PlanToJson(const DeploymentPlan& p)
{
    nlohmann::json layers = nlohmann::json::array();
    for (const PlanLayer& pl : p.layers)
    {
        nlohmann::json tiles = nlohmann::json::array();
        for (const Tile& t : pl.tiles)
        {
            tiles.push_back({ t.rowBegin, t.rowEnd, t.chBegin, t.chEnd, t.inRowBegin, t.inRowEnd, t.inBytes,
                              t.weightBytes, t.outBytes });
        }
        layers.push_back({ { "layer", LayerToJson(pl.spec) },
                           { "macs", pl.macs },
                           { "weight_bytes", pl.weightBytes },
                           { "tiles", tiles } });
    }
    nlohmann::json occ = nlohmann::json::array();
    for (const L2Occupancy& o : p.occupancy)
    {
        occ.push_back({ { "node", o.node },
                        { "layers", o.layers },
                        { "code", o.code },
                        { "weights_current", o.weightsCurrent },
                        { "weights_next", o.weightsNext },
                        { "weights_resident", o.weightsResident },
                        { "input", o.input },
                        { "output", o.output },
                        { "total", o.total },
                        { "naive_total", o.naiveTotal },
                        { "weights_loaded_during", o.weightsLoadedDuring } });
    }
    return { { "format", "frontnet-plan" },
             { "variant", ToString(p.variant) },
             { "policy", ToString(p.policy) },
             { "fuse_pool", p.fusePool },
             { "memory", MemoryToJson(p.mem) },
             { "input_bytes", p.inputBytes },
             { "l3_weight_bytes", p.l3WeightBytes },
             { "tile_fields",
               { "row_begin", "row_end", "ch_begin", "ch_end", "in_row_begin", "in_row_end", "in_bytes",
                 "weight_bytes", "out_bytes" } },
             { "layers", layers },
             { "occupancy", occ } };
}

DeploymentPlan PlanFromJson(const nlohmann::json& j)
{
    try
    {
        if (j.at("format").get<std::string>() != "frontnet-plan")
        {
            Fail(ErrorKind::Schema, "not a frontnet-plan document");
        }
        DeploymentPlan p;
        p.variant       = VariantFromString(j.at("variant").get<std::string>());
        p.policy        = WeightPolicyFromString(j.at("policy").get<std::string>());
        p.fusePool      = j.at("fuse_pool").get<bool>();
        p.mem           = MemoryFromJson(j.at("memory"));
        p.inputBytes    = j.at("input_bytes").get<std::int64_t>();
        p.l3WeightBytes = j.at("l3_weight_bytes").get<std::int64_t>();
        for (const auto& jl : j.at("layers"))
        {
            PlanLayer pl;
            pl.spec        = LayerFromJson(jl.at("layer"));
            pl.macs        = jl.at("macs").get<std::int64_t>();
            pl.weightBytes = jl.at("weight_bytes").get<std::int64_t>();
            for (const auto& jt : jl.at("tiles"))
            {
                const auto v = jt.get<std::vector<std::int64_t>>();
                if (v.size() != 9)
                {
                    Fail(ErrorKind::Schema, "tile record must have 9 fields");
                }
                Tile t;
                t.rowBegin    = static_cast<int>(v[0]);
                t.rowEnd      = static_cast<int>(v[1]);
                t.chBegin     = static_cast<int>(v[2]);
                t.chEnd       = static_cast<int>(v[3]);
                t.inRowBegin  = static_cast<int>(v[4]);
                t.inRowEnd    = static_cast<int>(v[5]);
                t.inBytes     = v[6];
                t.weightBytes = v[7];
                t.outBytes    = v[8];
                pl.tiles.push_back(t);
            }
            p.layers.push_back(std::move(pl));
        }
        for (const auto& jo : j.at("occupancy"))
        {
            L2Occupancy o;
            o.node                = jo.at("node").get<std::string>();
            o.layers              = jo.at("layers").get<std::vector<int>>();
            o.code                = jo.at("code").get<std::int64_t>();
            o.weightsCurrent      = jo.at("weights_current").get<std::int64_t>();
            o.weightsNext         = jo.at("weights_next").get<std::int64_t>();
            o.weightsResident     = jo.at("weights_resident").get<std::int64_t>();
            o.input               = jo.at("input").get<std::int64_t>();
            o.output              = jo.at("output").get<std::int64_t>();
            o.total               = jo.at("total").get<std::int64_t>();
            o.naiveTotal          = jo.at("naive_total").get<std::int64_t>();
            o.weightsLoadedDuring = jo.at("weights_loaded_during").get<int>();
            for (int li : o.layers)
            {
                if (li < 0 || li >= static_cast<int>(p.layers.size()))
                {
                    Fail(ErrorKind::Schema, "occupancy node " + o.node + " references an unknown layer");
                }
            }
            p.occupancy.push_back(std::move(o));
        }
        return p;
    }
    catch (const nlohmann::json::exception& e)
    {
        Fail(ErrorKind::Schema, std::string("plan document: ") + e.what());
    }
    catch (const Error& e)
    {
        if (e.Kind() == ErrorKind::Schema)
        {
            throw;
        }
        Fail(ErrorKind::Schema, std::string("plan document: ") + e.what());
    }
}

std::string MemoryReportCsv(const DeploymentPlan& p)
{
    std::ostringstream os;
    const bool streamed = p.policy == WeightPolicy::StreamedL3;
    os << (streamed ? "layer,code,weights_current,weights_next,input,output,total,l3_weights,naive_total\n"
                    : "layer,code,weights_resident,input,output,total,l3_weights,naive_total\n");
    for (const L2Occupancy& o : p.occupancy)
    {
        os << o.node << "," << o.code << ",";
        if (streamed)
        {
            os << o.weightsCurrent << "," << o.weightsNext << ",";
        }
        else
        {
            os << o.weightsResident << ",";
        }
        os << o.input << "," << o.output << "," << o.total << "," << (streamed ? p.l3WeightBytes : 0) << ","
           << o.naiveTotal << "\n";
    }
    return os.str();
}

std::string MemoryReportText(const DeploymentPlan& p)
{
    std::ostringstream os;
    const bool streamed = p.policy == WeightPolicy::StreamedL3;
    os << "network " << ToString(p.variant) << "  policy " << ToString(p.policy) << "  L2 limit " << p.mem.l2Bytes
       << " B  L1 limit " << p.mem.l1Bytes << " B\n";
    char line[200];
    if (streamed)
    {
        std::snprintf(line, sizeof line, "%-28s %8s %10s %10s %8s %8s %8s %8s\n", "node", "code", "w_current",
                      "w_next", "input", "output", "total", "tiles");
    }
    else
    {
        std::snprintf(line, sizeof line, "%-28s %8s %10s %8s %8s %8s %8s\n", "node", "code", "w_resident", "input",
                      "output", "total", "tiles");
    }
    os << line;
    for (const L2Occupancy& o : p.occupancy)
    {
        std::size_t tiles = 0;
        for (int li : o.layers)
        {
            tiles += p.layers[li].tiles.size();
        }
        if (streamed)
        {
            std::snprintf(line, sizeof line, "%-28s %8lld %10lld %10lld %8lld %8lld %8lld %8zu\n", o.node.c_str(),
                          static_cast<long long>(o.code), static_cast<long long>(o.weightsCurrent),
                          static_cast<long long>(o.weightsNext), static_cast<long long>(o.input),
                          static_cast<long long>(o.output), static_cast<long long>(o.total), tiles);
        }
        else
        {
            std::snprintf(line, sizeof line, "%-28s %8lld %10lld %8lld %8lld %8lld %8zu\n", o.node.c_str(),
                          static_cast<long long>(o.code), static_cast<long long>(o.weightsResident),
                          static_cast<long long>(o.input), static_cast<long long>(o.output),
                          static_cast<long long>(o.total), tiles);
        }
        os << line;
    }
    os << "L3 weights " << p.l3WeightBytes << " B\n";
    return os.str();
}

}    // namespace frontnet
