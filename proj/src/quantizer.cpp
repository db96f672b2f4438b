//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/quantizer.hpp"

#include "frontnet/engine.hpp"
#include "frontnet/error.hpp"
#include "frontnet/image.hpp"
#include "frontnet/qtns.hpp"
#include "frontnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

namespace frontnet
{

namespace fs = std::filesystem;

namespace
{

constexpr double kMaxRequantRelError = 1.0 / 32768.0;

void CheckVec(const std::vector<float>& v, std::size_t n, const std::string& what)
{
    if (v.size() != n)
    {
        Fail(ErrorKind::ShapeMismatch, what + " has " + std::to_string(v.size()) + " entries, expected " +
                                           std::to_string(n));
    }
    for (float x : v)
    {
        if (!std::isfinite(x))
        {
            Fail(ErrorKind::Numeric, what + " contains a non-finite value");
        }
    }
}

bool FitsI32(double v)
{
    return v >= -2147483648.0 && v <= 2147483647.0;
}

}    // namespace

void FloatNet::Validate() const
{
    if (params.size() != graph.layers.size())
    {
        Fail(ErrorKind::ShapeMismatch, "float parameter list does not match the graph layer count");
    }
    for (std::size_t i = 0; i < params.size(); ++i)
    {
        const LayerSpec& l   = graph.layers[i];
        const FloatParams& p = params[i];
        if (l.HasWeights())
        {
            if (p.weight.shape != l.WeightShape())
            {
                Fail(ErrorKind::ShapeMismatch, "layer " + l.name + " weight shape " + ShapeToString(p.weight.shape) +
                                                   " expected " + ShapeToString(l.WeightShape()));
            }
            p.weight.Validate();
        }
        if (l.kind == LayerKind::FullyConnected)
        {
            CheckVec(p.bias, static_cast<std::size_t>(l.outCh), l.name + " bias");
        }
        if (l.kind == LayerKind::RequantAct)
        {
            const auto c = static_cast<std::size_t>(l.outCh);
            CheckVec(p.gamma, c, l.name + " gamma");
            CheckVec(p.beta, c, l.name + " beta");
            CheckVec(p.mean, c, l.name + " mean");
            CheckVec(p.var, c, l.name + " var");
            if (std::any_of(p.var.begin(), p.var.end(), [](float v) { return v < 0.0f; }))
            {
                Fail(ErrorKind::Numeric, l.name + " has a negative variance");
            }
            if (i == 0 || graph.layers[i - 1].kind != LayerKind::Conv2d)
            {
                Fail(ErrorKind::Schema, l.name + " must directly follow a conv layer");
            }
        }
    }
}

FloatNet RandomFloatNet(const NetGraph& g, std::uint64_t seed)
{
    Rng rng(seed);
    FloatNet net;
    net.graph = g;
    net.params.resize(g.layers.size());
    for (std::size_t i = 0; i < g.layers.size(); ++i)
    {
        const LayerSpec& l = g.layers[i];
        FloatParams& p     = net.params[i];
        if (l.kind == LayerKind::Conv2d)
        {
            const double std = std::sqrt(2.0 / (l.inCh * l.kh * l.kw));
            p.weight         = RTensor(l.WeightShape());
            for (float& w : p.weight.data)
            {
                w = static_cast<float>(rng.Normal(0.0, std));
            }
        }
        else if (l.kind == LayerKind::RequantAct)
        {
            for (int c = 0; c < l.outCh; ++c)
            {
                p.gamma.push_back(static_cast<float>(rng.Uniform(0.8, 1.2)));
                p.beta.push_back(static_cast<float>(rng.Uniform(0.0, 0.1)));
                p.mean.push_back(0.0f);
                p.var.push_back(1.0f);
            }
        }
        else if (l.kind == LayerKind::FullyConnected)
        {
            // Pose-scaled head: outputs spread a few tenths of a metre around the bias.
            const double std = 0.2 * std::sqrt(1.0 / l.inCh);
            p.weight         = RTensor(l.WeightShape());
            for (float& w : p.weight.data)
            {
                w = static_cast<float>(rng.Normal(0.0, std));
            }
            p.bias = { 2.0f, 0.0f, 0.0f, 0.0f };
        }
    }
    return net;
}

FloatNet LoadFloatNet(const NetGraph& g, const std::string& dir)
{
    if (!fs::is_directory(dir))
    {
        Fail(ErrorKind::NotFound, "weights directory '" + dir + "' not found");
    }
    auto readF32 = [&](const std::string& file) {
        QtnsFile f = ReadQtns((fs::path(dir) / file).string());
        if (f.dtype != DType::F32)
        {
            Fail(ErrorKind::Schema, file + " must hold f32 data");
        }
        return f.r;
    };
    FloatNet net;
    net.graph = g;
    net.params.resize(g.layers.size());
    for (std::size_t i = 0; i < g.layers.size(); ++i)
    {
        const LayerSpec& l = g.layers[i];
        FloatParams& p     = net.params[i];
        if (l.HasWeights())
        {
            p.weight = readF32(l.name + ".weight.qtns");
        }
        if (l.kind == LayerKind::FullyConnected)
        {
            p.bias = readF32(l.name + ".bias.qtns").data;
        }
        if (l.kind == LayerKind::RequantAct)
        {
            const RTensor bn = readF32(l.name + ".bn.qtns");
            if (bn.shape != Shape{ 4, l.outCh })
            {
                Fail(ErrorKind::Schema, l.name + ".bn.qtns must have shape (4, " + std::to_string(l.outCh) + ")");
            }
            const auto c = static_cast<std::ptrdiff_t>(l.outCh);
            p.gamma.assign(bn.data.begin(), bn.data.begin() + c);
            p.beta.assign(bn.data.begin() + c, bn.data.begin() + 2 * c);
            p.mean.assign(bn.data.begin() + 2 * c, bn.data.begin() + 3 * c);
            p.var.assign(bn.data.begin() + 3 * c, bn.data.end());
        }
    }
    net.Validate();
    return net;
}

void SaveFloatNet(const FloatNet& net, const std::string& dir)
{
    net.Validate();
    fs::create_directories(dir);
    for (std::size_t i = 0; i < net.graph.layers.size(); ++i)
    {
        const LayerSpec& l   = net.graph.layers[i];
        const FloatParams& p = net.params[i];
        const fs::path base  = fs::path(dir);
        if (l.HasWeights())
        {
            WriteQtns((base / (l.name + ".weight.qtns")).string(), p.weight);
        }
        if (l.kind == LayerKind::FullyConnected)
        {
            WriteQtns((base / (l.name + ".bias.qtns")).string(),
                      RTensor({ static_cast<int>(p.bias.size()) }, p.bias));
        }
        if (l.kind == LayerKind::RequantAct)
        {
            std::vector<float> rows;
            for (const auto* v : { &p.gamma, &p.beta, &p.mean, &p.var })
            {
                rows.insert(rows.end(), v->begin(), v->end());
            }
            WriteQtns((base / (l.name + ".bn.qtns")).string(), RTensor({ 4, l.outCh }, rows));
        }
    }
}

CalibrationSet RandomCalibration(const NetGraph& g, int count, std::uint64_t seed)
{
    if (count <= 0)
    {
        Fail(ErrorKind::InvalidArgument, "calibration set must not be empty");
    }
    Rng rng(seed);
    CalibrationSet set;
    const int h = g.inputShape[1];
    const int w = g.inputShape[2];
    for (int n = 0; n < count; ++n)
    {
        // Smooth gradient plus texture, loosely resembling an indoor scene.
        const double gx = rng.Uniform(-1.0, 1.0);
        const double gy = rng.Uniform(-1.0, 1.0);
        const double base = rng.Uniform(0.2, 0.8);
        RTensor t({ 1, h, w });
        for (int r = 0; r < h; ++r)
        {
            for (int c = 0; c < w; ++c)
            {
                const double v = base + 0.3 * (gx * c / w + gy * r / h) + rng.Uniform(-0.15, 0.15);
                const long code = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
                t.data[static_cast<std::size_t>(r) * w + c] = static_cast<float>(code / 255.0);
            }
        }
        set.inputs.push_back(std::move(t));
    }
    return set;
}

CalibrationSet LoadCalibration(const NetGraph& g, const std::string& dir)
{
    if (!fs::is_directory(dir))
    {
        Fail(ErrorKind::NotFound, "calibration directory '" + dir + "' not found");
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
    {
        if (e.path().extension() == ".pgm")
        {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    CalibrationSet set;
    for (const auto& f : files)
    {
        GrayImage img = ReadPgm(f.string());
        if (img.height != g.inputShape[1] || img.width != g.inputShape[2])
        {
            img = PrepareInput(img, g);
        }
        set.inputs.push_back(ImageToReal(img));
    }
    if (set.inputs.empty())
    {
        Fail(ErrorKind::NotFound, "no .pgm images in '" + dir + "'");
    }
    return set;
}

std::vector<double> Calibrate(const FloatNet& net, const CalibrationSet& calib)
{
    net.Validate();
    if (calib.inputs.empty())
    {
        Fail(ErrorKind::InvalidArgument, "calibration set must not be empty");
    }
    std::vector<double> alphas(net.graph.layers.size(), 0.0);
    for (const RTensor& img : calib.inputs)
    {
        if (img.shape != net.graph.inputShape)
        {
            Fail(ErrorKind::ShapeMismatch, "calibration image " + ShapeToString(img.shape) +
                                               " does not match graph input " +
                                               ShapeToString(net.graph.inputShape));
        }
        std::vector<RTensor> trace;
        InferFloat(net, img, nullptr, &trace);
        for (std::size_t i = 0; i < trace.size(); ++i)
        {
            if (net.graph.layers[i].kind == LayerKind::RequantAct)
            {
                const float m = *std::max_element(trace[i].data.begin(), trace[i].data.end());
                alphas[i]     = std::max(alphas[i], static_cast<double>(m));
            }
        }
    }
    std::string dead;
    for (std::size_t i = 0; i < alphas.size(); ++i)
    {
        if (net.graph.layers[i].kind == LayerKind::RequantAct && !(alphas[i] > 0.0))
        {
            dead += (dead.empty() ? "" : ", ") + net.graph.layers[i].name;
        }
    }
    if (!dead.empty())
    {
        Fail(ErrorKind::Degenerate, "dead activation layers: " + dead);
    }
    return alphas;
}

RequantFit FitRequant(double scale, double offset, const std::string& layer)
{
    if (!std::isfinite(scale) || !std::isfinite(offset))
    {
        Fail(ErrorKind::Numeric, "layer " + layer + ": non-finite requant scale");
    }
    for (int s = 31; s >= 0; --s)
    {
        const double p = std::ldexp(1.0, s);
        const double m = std::round(scale * p);
        const double b = std::round(offset * p);
        if (std::abs(m) < 2147483648.0 && std::abs(b) < 2147483648.0)
        {
            RequantFit f;
            f.multiplier = static_cast<std::int32_t>(m);
            f.shift      = s;
            f.bias       = static_cast<std::int32_t>(b);
            f.relError   = scale == 0.0 ? 0.0 : std::abs(m / p - scale) / std::abs(scale);
            if (f.relError > kMaxRequantRelError)
            {
                Fail(ErrorKind::Overflow, "layer " + layer + ": requant multiplier cannot represent scale " +
                                              std::to_string(scale) + " within 2^-15");
            }
            return f;
        }
    }
    Fail(ErrorKind::Overflow, "layer " + layer + ": requant parameters overflow 32 bits even at shift 0");
}

QuantizedGraph Convert(const FloatNet& net, const std::vector<double>& alphas)
{
    net.Validate();
    const NetGraph& g = net.graph;
    if (alphas.size() != g.layers.size())
    {
        Fail(ErrorKind::InvalidArgument, "alpha list does not match the graph layer count");
    }
    QuantizedGraph qg;
    qg.graph = g;
    qg.layers.resize(g.layers.size());
    double epsCur = qg.inputEps;
    for (std::size_t i = 0; i < g.layers.size(); ++i)
    {
        const LayerSpec& l   = g.layers[i];
        const FloatParams& p = net.params[i];
        QLayer& q            = qg.layers[i];
        q.epsIn              = epsCur;
        switch (l.kind)
        {
            case LayerKind::Conv2d:
            case LayerKind::FullyConnected:
            {
                const auto [mn, mx] = std::minmax_element(p.weight.data.begin(), p.weight.data.end());
                // The range always includes 0 so single-signed layers keep a representable offset.
                const double epsW = WeightEps(std::min(0.0, static_cast<double>(*mn)),
                                              std::max(0.0, static_cast<double>(*mx)));
                q.weights         = DecomposeWeights(p.weight, epsW).wStar;
                q.epsOut          = epsCur * epsW;
                if (l.kind == LayerKind::FullyConnected)
                {
                    for (std::size_t k = 0; k < p.bias.size(); ++k)
                    {
                        const double b = std::round(p.bias[k] / q.epsOut);
                        if (!FitsI32(b))
                        {
                            Fail(ErrorKind::Overflow, "layer " + l.name + ": bias does not fit 32 bits");
                        }
                        q.fcBias.push_back(static_cast<std::int32_t>(b));
                        qg.outputEps[k] = q.epsOut;
                    }
                }
                epsCur = q.epsOut;
                break;
            }
            case LayerKind::RequantAct:
            {
                const QLayer& conv = qg.layers[i - 1];
                const double epsW  = conv.weights.qp.eps;
                q.alpha            = alphas[i];
                q.epsOut           = ActEps(q.alpha);
                for (int c = 0; c < l.outCh; ++c)
                {
                    const double k      = p.gamma[c] / std::sqrt(static_cast<double>(p.var[c]) + net.bnEps);
                    const double scale  = k * conv.epsIn * epsW / q.epsOut;
                    const double offset = (p.beta[c] - k * p.mean[c]) / q.epsOut;
                    const RequantFit f  = FitRequant(scale, offset, l.name);
                    q.scale.push_back(scale);
                    q.offset.push_back(offset);
                    q.requant.multiplier.push_back(f.multiplier);
                    q.requant.shift.push_back(f.shift);
                    q.requant.bias.push_back(f.bias);
                }
                epsCur = q.epsOut;
                break;
            }
            case LayerKind::MaxPool:
            case LayerKind::DropoutNoop:
                q.epsOut = epsCur;
                break;
        }
    }
    qg.Validate();
    return qg;
}

void QuantizedGraph::Validate() const
{
    ValidateGraph(graph);
    if (layers.size() != graph.layers.size())
    {
        Fail(ErrorKind::Schema, "quantized layer list does not match the graph");
    }
    for (std::size_t i = 0; i < layers.size(); ++i)
    {
        const LayerSpec& l = graph.layers[i];
        const QLayer& q    = layers[i];
        if (l.HasWeights())
        {
            if (q.weights.shape != l.WeightShape() || q.weights.dtype != DType::I8)
            {
                Fail(ErrorKind::Schema, "layer " + l.name + ": weight tensor shape or type mismatch");
            }
            q.weights.Validate();
            for (std::int32_t w : q.weights.data)
            {
                if (w + q.weights.qp.zeroBase < -128 || w + q.weights.qp.zeroBase > 127)
                {
                    Fail(ErrorKind::Overflow, "layer " + l.name + ": W*_min + W* exceeds a signed byte");
                }
            }
        }
        if (l.kind == LayerKind::RequantAct)
        {
            q.requant.Validate();
            if (q.requant.Channels() != static_cast<std::size_t>(l.outCh))
            {
                Fail(ErrorKind::Schema, "layer " + l.name + ": requant channel count mismatch");
            }
        }
        if (l.kind == LayerKind::FullyConnected && q.fcBias.size() != static_cast<std::size_t>(l.outCh))
        {
            Fail(ErrorKind::Schema, "layer " + l.name + ": bias length mismatch");
        }
    }
}

nlohmann::json QGraphToJson(const QuantizedGraph& qg)
{
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t i = 0; i < qg.layers.size(); ++i)
    {
        const QLayer& q = qg.layers[i];
        nlohmann::json jl{ { "name", qg.graph.layers[i].name }, { "eps_in", q.epsIn }, { "eps_out", q.epsOut } };
        if (qg.graph.layers[i].HasWeights())
        {
            jl["eps_w"]      = q.weights.qp.eps;
            jl["w_star_min"] = q.weights.qp.zeroBase;
            jl["weights"]    = q.weights.data;
        }
        if (qg.graph.layers[i].kind == LayerKind::RequantAct)
        {
            jl["alpha"]   = q.alpha;
            jl["requant"] = { { "multiplier", q.requant.multiplier },
                              { "shift", q.requant.shift },
                              { "bias", q.requant.bias },
                              { "scale", q.scale },
                              { "offset", q.offset } };
        }
        if (qg.graph.layers[i].kind == LayerKind::FullyConnected)
        {
            jl["bias"] = q.fcBias;
        }
        layers.push_back(std::move(jl));
    }
    return { { "format", "frontnet-qgraph" },
             { "graph", GraphToJson(qg.graph) },
             { "input_eps", qg.inputEps },
             { "output_eps", qg.outputEps },
             { "layers", layers } };
}

QuantizedGraph QGraphFromJson(const nlohmann::json& j)
{
    try
    {
        if (j.at("format").get<std::string>() != "frontnet-qgraph")
        {
            Fail(ErrorKind::Schema, "not a frontnet-qgraph document");
        }
        QuantizedGraph qg;
        qg.graph     = GraphFromJson(j.at("graph"));
        qg.inputEps  = j.at("input_eps").get<double>();
        qg.outputEps = j.at("output_eps").get<std::array<double, 4>>();
        const auto& jl = j.at("layers");
        if (jl.size() != qg.graph.layers.size())
        {
            Fail(ErrorKind::Schema, "qgraph layer count does not match its graph");
        }
        for (std::size_t i = 0; i < jl.size(); ++i)
        {
            const LayerSpec& l = qg.graph.layers[i];
            QLayer q;
            if (jl[i].at("name").get<std::string>() != l.name)
            {
                Fail(ErrorKind::Schema, "qgraph layer " + std::to_string(i) + " name mismatch");
            }
            q.epsIn  = jl[i].at("eps_in").get<double>();
            q.epsOut = jl[i].at("eps_out").get<double>();
            if (l.HasWeights())
            {
                q.weights = QTensor(l.WeightShape(), DType::I8,
                                    QuantParams::Weight(jl[i].at("eps_w").get<double>(),
                                                        jl[i].at("w_star_min").get<std::int32_t>()));
                q.weights.data = jl[i].at("weights").get<std::vector<std::int32_t>>();
            }
            if (l.kind == LayerKind::RequantAct)
            {
                const auto& r        = jl[i].at("requant");
                q.alpha              = jl[i].at("alpha").get<double>();
                q.requant.multiplier = r.at("multiplier").get<std::vector<std::int32_t>>();
                q.requant.shift      = r.at("shift").get<std::vector<std::int32_t>>();
                q.requant.bias       = r.at("bias").get<std::vector<std::int32_t>>();
                q.scale              = r.at("scale").get<std::vector<double>>();
                q.offset             = r.at("offset").get<std::vector<double>>();
            }
            if (l.kind == LayerKind::FullyConnected)
            {
                q.fcBias = jl[i].at("bias").get<std::vector<std::int32_t>>();
            }
            qg.layers.push_back(std::move(q));
        }
        qg.Validate();
        return qg;
    }
    catch (const nlohmann::json::exception& e)
    {
        Fail(ErrorKind::Schema, std::string("qgraph document: ") + e.what());
    }
    catch (const Error& e)
    {
        if (e.Kind() == ErrorKind::Schema || e.Kind() == ErrorKind::Overflow)
        {
            throw;
        }
        Fail(ErrorKind::Schema, std::string("qgraph document: ") + e.what());
    }
}

}    // namespace frontnet
