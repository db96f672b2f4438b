//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/graph.hpp"

#include "frontnet/error.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace frontnet
{

const char* ToString(LayerKind kind)
{
    switch (kind)
    {
        case LayerKind::Conv2d:
            return "conv2d";
        case LayerKind::MaxPool:
            return "maxpool";
        case LayerKind::RequantAct:
            return "requant_act";
        case LayerKind::FullyConnected:
            return "fully_connected";
        case LayerKind::DropoutNoop:
            return "dropout_noop";
    }
    return "?";
}

LayerKind LayerKindFromString(const std::string& s)
{
    for (LayerKind k : { LayerKind::Conv2d, LayerKind::MaxPool, LayerKind::RequantAct, LayerKind::FullyConnected,
                         LayerKind::DropoutNoop })
    {
        if (s == ToString(k))
        {
            return k;
        }
    }
    Fail(ErrorKind::Schema, "unknown layer kind '" + s + "'");
}

Shape LayerSpec::WeightShape() const
{
    if (kind == LayerKind::Conv2d)
    {
        return { outCh, inCh, kh, kw };
    }
    if (kind == LayerKind::FullyConnected)
    {
        return { outCh, inCh };
    }
    return {};
}

std::int64_t LayerSpec::NumWeights() const
{
    return HasWeights() ? static_cast<std::int64_t>(NumElements(WeightShape())) : 0;
}

std::int64_t LayerSpec::OutputElements() const
{
    return static_cast<std::int64_t>(NumElements(outShape));
}

std::int64_t LayerSpec::Macs() const
{
    if (kind == LayerKind::Conv2d)
    {
        return OutputElements() * inCh * kh * kw;
    }
    if (kind == LayerKind::FullyConnected)
    {
        return static_cast<std::int64_t>(inCh) * outCh;
    }
    return 0;
}

const char* ToString(Variant v)
{
    switch (v)
    {
        case Variant::W160C32:
            return "160x32";
        case Variant::W160C16:
            return "160x16";
        case Variant::W80C32:
            return "80x32";
    }
    return "?";
}

Variant VariantFromString(const std::string& s)
{
    for (Variant v : { Variant::W160C32, Variant::W160C16, Variant::W80C32 })
    {
        if (s == ToString(v))
        {
            return v;
        }
    }
    Fail(ErrorKind::InvalidArgument, "unknown network variant '" + s + "' (expected 160x32, 160x16 or 80x32)");
}

int InputWidth(Variant v)
{
    return v == Variant::W80C32 ? 80 : 160;
}

int InputHeight(Variant v)
{
    return v == Variant::W80C32 ? 48 : 96;
}

int BaseChannels(Variant v)
{
    return v == Variant::W160C16 ? 16 : 32;
}

int OutDim(int in, int kernel, int stride, int pad, bool ceilMode)
{
    const int span = in + 2 * pad - kernel;
    if (span < 0)
    {
        return 0;
    }
    int out = (ceilMode ? (span + stride - 1) / stride : span / stride) + 1;
    // A ceil-mode window must start inside the padded input.
    if (ceilMode && (out - 1) * stride >= in + pad)
    {
        --out;
    }
    return out;
}

namespace
{

LayerSpec Conv(const std::string& name, int in, int out, int k, int s, int p)
{
    LayerSpec l;
    l.name  = name;
    l.kind  = LayerKind::Conv2d;
    l.inCh  = in;
    l.outCh = out;
    l.kh = l.kw = k;
    l.sh = l.sw = s;
    l.ph = l.pw = p;
    return l;
}

LayerSpec Unary(const std::string& name, LayerKind kind, int ch)
{
    LayerSpec l;
    l.name  = name;
    l.kind  = kind;
    l.inCh  = ch;
    l.outCh = ch;
    return l;
}

}    // namespace

NetGraph BuildFrontnet(Variant v)
{
    const int c = BaseChannels(v);
    NetGraph g;
    g.variant    = v;
    g.inputShape = { 1, InputHeight(v), InputWidth(v) };

    g.layers.push_back(Conv("conv1", 1, c, 5, 2, 2));
    g.layers.push_back(Unary("conv1_act", LayerKind::RequantAct, c));
    LayerSpec pool = Unary("pool1", LayerKind::MaxPool, c);
    pool.kh = pool.kw = 2;
    pool.sh = pool.sw = 2;
    g.layers.push_back(pool);

    const int chans[4] = { c, c, 2 * c, 4 * c };
    for (int b = 1; b <= 3; ++b)
    {
        const std::string prefix = "block" + std::to_string(b) + "_";
        g.layers.push_back(Conv(prefix + "conv1", chans[b - 1], chans[b], 3, 2, 1));
        g.layers.push_back(Unary(prefix + "conv1_act", LayerKind::RequantAct, chans[b]));
        g.layers.push_back(Conv(prefix + "conv2", chans[b], chans[b], 3, 1, 1));
        g.layers.push_back(Unary(prefix + "conv2_act", LayerKind::RequantAct, chans[b]));
    }
    g.layers.push_back(Unary("dropout", LayerKind::DropoutNoop, 4 * c));

    LayerSpec fc;
    fc.name  = "fc";
    fc.kind  = LayerKind::FullyConnected;
    fc.outCh = 4;
    g.layers.push_back(fc);
    return InferShapes(std::move(g));
}

NetGraph BuildFrontnet(int inputWidth, int baseChannels)
{
    if (inputWidth == 160 && baseChannels == 32)
    {
        return BuildFrontnet(Variant::W160C32);
    }
    if (inputWidth == 160 && baseChannels == 16)
    {
        return BuildFrontnet(Variant::W160C16);
    }
    if (inputWidth == 80 && baseChannels == 32)
    {
        return BuildFrontnet(Variant::W80C32);
    }
    Fail(ErrorKind::InvalidArgument, "unsupported variant width " + std::to_string(inputWidth) + " channels " +
                                         std::to_string(baseChannels));
}

NetGraph InferShapes(NetGraph g)
{
    if (g.inputShape.size() != 3)
    {
        Fail(ErrorKind::ShapeMismatch, "input shape must be (C, H, W), got " + ShapeToString(g.inputShape));
    }
    Shape cur = g.inputShape;
    for (LayerSpec& l : g.layers)
    {
        l.inShape = cur;
        switch (l.kind)
        {
            case LayerKind::Conv2d:
            case LayerKind::MaxPool:
            {
                const bool pool = l.kind == LayerKind::MaxPool;
                if (pool)
                {
                    l.inCh = l.outCh = cur[0];
                }
                const int h = OutDim(cur[1], l.kh, l.sh, l.ph, pool);
                const int w = OutDim(cur[2], l.kw, l.sw, l.pw, pool);
                if (h <= 0 || w <= 0)
                {
                    Fail(ErrorKind::ShapeMismatch, "layer " + l.name + " reduces " + ShapeToString(cur) +
                                                       " to an empty spatial extent");
                }
                l.outShape = { l.outCh, h, w };
                break;
            }
            case LayerKind::RequantAct:
            case LayerKind::DropoutNoop:
                l.inCh = l.outCh = cur[0];
                l.outShape       = cur;
                break;
            case LayerKind::FullyConnected:
                l.inCh     = static_cast<int>(NumElements(cur));
                l.outShape = { l.outCh, 1, 1 };
                break;
        }
        cur = l.outShape;
    }
    return g;
}

void ValidateGraph(const NetGraph& g)
{
    const NetGraph ref = InferShapes(g);
    Shape cur          = g.inputShape;
    for (std::size_t i = 0; i < g.layers.size(); ++i)
    {
        const LayerSpec& l = g.layers[i];
        if (l.inShape != cur)
        {
            Fail(ErrorKind::ShapeMismatch, "layer " + l.name + " input " + ShapeToString(l.inShape) +
                                               " does not follow " + ShapeToString(cur));
        }
        if (l.outShape != ref.layers[i].outShape || l.inCh != ref.layers[i].inCh)
        {
            Fail(ErrorKind::ShapeMismatch, "layer " + l.name + " shape " + ShapeToString(l.outShape) +
                                               " inconsistent with inferred " +
                                               ShapeToString(ref.layers[i].outShape));
        }
        if (l.kind == LayerKind::Conv2d && l.inCh != cur[0])
        {
            Fail(ErrorKind::ShapeMismatch, "layer " + l.name + " expects " + std::to_string(l.inCh) +
                                               " input channels");
        }
        cur = l.outShape;
    }
}

std::int64_t ActivationBufferBytes(const LayerSpec& l)
{
    switch (l.kind)
    {
        case LayerKind::RequantAct:
        case LayerKind::MaxPool:
            return l.OutputElements();
        case LayerKind::FullyConnected:
            return l.OutputElements() * 4;
        case LayerKind::Conv2d:
        case LayerKind::DropoutNoop:
            return 0;
    }
    return 0;
}

GraphStats Analyze(const NetGraph& g)
{
    ValidateGraph(g);
    GraphStats s;
    s.inputBytes  = static_cast<std::int64_t>(NumElements(g.inputShape));
    s.memoryBytes = s.inputBytes;
    for (const LayerSpec& l : g.layers)
    {
        LayerStats ls{ l.name, l.kind, l.Macs(), l.NumWeights(), ActivationBufferBytes(l) };
        s.macs += ls.macs;
        s.params += ls.params;
        s.memoryBytes += ls.params + ls.bufferBytes;
        s.layers.push_back(ls);
    }
    return s;
}

namespace
{

std::string Grouped(std::int64_t v)
{
    std::string digits = std::to_string(v < 0 ? -v : v);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i)
    {
        if (i && (digits.size() - i) % 3 == 0)
        {
            out += ',';
        }
        out += digits[i];
    }
    return v < 0 ? "-" + out : out;
}

std::string Sci3(double v)
{
    char buf[32];
    const int e  = static_cast<int>(std::floor(std::log10(v)));
    const double m = v / std::pow(10.0, e);
    std::snprintf(buf, sizeof buf, "%.2fe%d", m, e);
    return buf;
}

}    // namespace

std::string TableReport(const NetGraph& g, const GraphStats& s)
{
    std::ostringstream os;
    os << "network " << ToString(g.variant) << "  input " << ShapeToString(g.inputShape) << "\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %-16s %-14s %-14s %12s %10s %10s\n", "layer", "kind", "in", "out",
                  "MACs", "params", "buffer_B");
    os << line;
    for (std::size_t i = 0; i < g.layers.size(); ++i)
    {
        const LayerSpec& l = g.layers[i];
        std::snprintf(line, sizeof line, "%-20s %-16s %-14s %-14s %12s %10s %10s\n", l.name.c_str(),
                      ToString(l.kind), ShapeToString(l.inShape).c_str(), ShapeToString(l.outShape).c_str(),
                      Grouped(s.layers[i].macs).c_str(), Grouped(s.layers[i].params).c_str(),
                      Grouped(s.layers[i].bufferBytes).c_str());
        os << line;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", static_cast<double>(s.macs) / 1e6);
    os << "MACs    " << Grouped(s.macs) << "  (" << buf << " MMAC)\n";
    std::snprintf(buf, sizeof buf, "%.0f", static_cast<double>(s.memoryBytes) / 1e3);
    os << "memory  " << Grouped(s.memoryBytes) << " B  (" << buf << " kB)\n";
    os << "params  " << Grouped(s.params) << "  (" << Sci3(static_cast<double>(s.params)) << ")\n";
    return os.str();
}

nlohmann::json LayerToJson(const LayerSpec& l)
{
    return { { "name", l.name },
             { "kind", ToString(l.kind) },
             { "in_ch", l.inCh },
             { "out_ch", l.outCh },
             { "kernel", { l.kh, l.kw } },
             { "stride", { l.sh, l.sw } },
             { "padding", { l.ph, l.pw } },
             { "in_shape", l.inShape },
             { "out_shape", l.outShape } };
}

LayerSpec LayerFromJson(const nlohmann::json& jl)
{
    LayerSpec l;
    l.name       = jl.at("name").get<std::string>();
    l.kind       = LayerKindFromString(jl.at("kind").get<std::string>());
    l.inCh       = jl.at("in_ch").get<int>();
    l.outCh      = jl.at("out_ch").get<int>();
    const auto k = jl.at("kernel").get<std::vector<int>>();
    const auto s = jl.at("stride").get<std::vector<int>>();
    const auto p = jl.at("padding").get<std::vector<int>>();
    if (k.size() != 2 || s.size() != 2 || p.size() != 2)
    {
        Fail(ErrorKind::Schema, "layer " + l.name + ": kernel/stride/padding must have two entries");
    }
    l.kh       = k[0];
    l.kw       = k[1];
    l.sh       = s[0];
    l.sw       = s[1];
    l.ph       = p[0];
    l.pw       = p[1];
    l.inShape  = jl.at("in_shape").get<Shape>();
    l.outShape = jl.at("out_shape").get<Shape>();
    return l;
}

nlohmann::json GraphToJson(const NetGraph& g)
{
    nlohmann::json layers = nlohmann::json::array();
    for (const LayerSpec& l : g.layers)
    {
        layers.push_back(LayerToJson(l));
    }
    return { { "format", "frontnet-graph" },
             { "variant", ToString(g.variant) },
             { "input_shape", g.inputShape },
             { "layers", layers } };
}

NetGraph GraphFromJson(const nlohmann::json& j)
{
    try
    {
        if (j.at("format").get<std::string>() != "frontnet-graph")
        {
            Fail(ErrorKind::Schema, "not a frontnet-graph document");
        }
        NetGraph g;
        g.variant    = VariantFromString(j.at("variant").get<std::string>());
        g.inputShape = j.at("input_shape").get<Shape>();
        for (const auto& jl : j.at("layers"))
        {
            g.layers.push_back(LayerFromJson(jl));
        }
        ValidateGraph(g);
        return g;
    }
    catch (const nlohmann::json::exception& e)
    {
        Fail(ErrorKind::Schema, std::string("graph document: ") + e.what());
    }
    catch (const Error& e)
    {
        if (e.Kind() == ErrorKind::Schema)
        {
            throw;
        }
        Fail(ErrorKind::Schema, std::string("graph document: ") + e.what());
    }
}

}    // namespace frontnet
