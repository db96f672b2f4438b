//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/engine.hpp"
#include "frontnet/error.hpp"
#include "frontnet/rng.hpp"

#include "engine_oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>

using namespace frontnet;

namespace
{

using testoracle::NaiveConv;
using testoracle::OracleForward;

QTensor RandomImage(const NetGraph& g, Rng& rng)
{
    QTensor t(g.inputShape, DType::U8, QuantParams::Activation(1.0 / 255.0));
    for (auto& v : t.data)
    {
        v = static_cast<std::int32_t>(rng.UniformInt(0, 255));
    }
    return t;
}

QuantizedGraph MakeQGraph(Variant v, std::uint64_t seed, FloatNet* keep = nullptr)
{
    FloatNet net = RandomFloatNet(BuildFrontnet(v), seed);
    const auto a = Calibrate(net, RandomCalibration(net.graph, 3, seed + 1000));
    QuantizedGraph qg = Convert(net, a);
    if (keep)
    {
        *keep = std::move(net);
    }
    return qg;
}

}    // namespace

TEST_CASE("conv kernel matches the six-loop oracle on random small layers")
{
    Rng rng(2024);
    for (int trial = 0; trial < 150; ++trial)
    {
        LayerSpec l;
        l.name  = "t";
        l.kind  = LayerKind::Conv2d;
        l.inCh  = static_cast<int>(rng.UniformInt(1, 6));
        l.outCh = static_cast<int>(rng.UniformInt(1, 6));
        l.kh = l.kw = static_cast<int>(rng.UniformInt(0, 2)) * 2 + 1;
        l.sh = l.sw = static_cast<int>(rng.UniformInt(1, 2));
        l.ph = l.pw = static_cast<int>(rng.UniformInt(0, l.kh / 2));
        const int hi = static_cast<int>(rng.UniformInt(l.kh, 13));
        const int wi = static_cast<int>(rng.UniformInt(l.kw, 13));
        const int ho = (hi + 2 * l.ph - l.kh) / l.sh + 1;
        const int wo = (wi + 2 * l.pw - l.kw) / l.sw + 1;
        l.inShape    = { l.inCh, hi, wi };
        l.outShape   = { l.outCh, ho, wo };

        QTensor in({ l.inCh, hi, wi }, DType::U8, QuantParams::Activation(1.0));
        for (auto& v : in.data)
        {
            v = static_cast<std::int32_t>(rng.UniformInt(0, 255));
        }
        std::vector<std::int32_t> w(static_cast<std::size_t>(l.outCh) * l.inCh * l.kh * l.kw);
        for (auto& v : w)
        {
            v = static_cast<std::int32_t>(rng.UniformInt(-128, 127));
        }
        const int threads = static_cast<int>(rng.UniformInt(1, 4));
        const QTensor got = ConvInt(in, w, l, threads);
        const auto want   = NaiveConv(in.data, l.inCh, hi, wi, w, l.outCh, l.kh, l.sh, l.ph, ho, wo);
        CAPTURE(trial);
        REQUIRE(got.shape == Shape{ l.outCh, ho, wo });
        REQUIRE(got.data.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i)
        {
            CHECK(got.data[i] == want[i]);
        }
    }
}

TEST_CASE("every layer of the integer pipeline matches the oracle")
{
    Rng rng(77);
    for (Variant v : { Variant::W80C32, Variant::W160C16, Variant::W160C32 })
    {
        CAPTURE(ToString(v));
        const QuantizedGraph qg = MakeQGraph(v, 31);
        for (int n = 0; n < 2; ++n)
        {
            const QTensor img       = RandomImage(qg.graph, rng);
            const InferenceResult r = InferInt(qg, img, { 2, true });
            const auto want         = OracleForward(qg, img);
            REQUIRE(r.activations.size() == want.size());
            for (std::size_t i = 0; i < want.size(); ++i)
            {
                CAPTURE(qg.graph.layers[i].name);
                REQUIRE(r.activations[i].data.size() == want[i].size());
                bool same = true;
                for (std::size_t k = 0; k < want[i].size(); ++k)
                {
                    same = same && r.activations[i].data[k] == want[i][k];
                }
                CHECK(same);
            }
            for (int k = 0; k < 4; ++k)
            {
                CHECK(r.raw[k] == want.back()[k]);
            }
        }
    }
}

TEST_CASE("the integer path gives identical outputs for any thread count")
{
    Rng rng(5);
    const QuantizedGraph qg = MakeQGraph(Variant::W160C32, 3);
    const QTensor img       = RandomImage(qg.graph, rng);
    const auto ref          = InferInt(qg, img, { 1, false }).raw;
    for (int t : { 2, 3, 4, 7, 16 })
    {
        CHECK(InferInt(qg, img, { t, false }).raw == ref);
    }
}

TEST_CASE("a black frame is a valid input")
{
    const QuantizedGraph qg = MakeQGraph(Variant::W80C32, 4);
    QTensor img(qg.graph.inputShape, DType::U8, QuantParams::Activation(1.0 / 255.0));
    const InferenceResult r = InferInt(qg, img);
    // With a black frame every activation is the requant of a zero accumulator.
    const auto want = OracleForward(qg, img);
    for (int k = 0; k < 4; ++k)
    {
        CHECK(r.raw[k] == want.back()[k]);
    }
}

TEST_CASE("malformed images are rejected")
{
    const QuantizedGraph qg = MakeQGraph(Variant::W80C32, 4);
    QTensor wrong({ 1, 10, 10 }, DType::U8, QuantParams::Activation(1.0));
    CHECK_THROWS_AS(InferInt(qg, wrong), Error);
    QTensor bad(qg.graph.inputShape, DType::U8, QuantParams::Activation(1.0));
    bad.data[3] = 300;
    CHECK_THROWS_AS(InferInt(qg, bad), Error);
}

TEST_CASE("center crop keeps the middle rows and columns")
{
    GrayImage f(162, 162);
    for (int r = 0; r < 162; ++r)
        for (int c = 0; c < 162; ++c)
            f.At(r, c) = static_cast<std::uint8_t>((r * 7 + c * 13) & 0xff);
    const GrayImage g = CropCenter(f, 96, 160);
    REQUIRE(g.width == 160);
    REQUIRE(g.height == 96);
    for (int r = 0; r < 96; ++r)
        for (int c = 0; c < 160; ++c)
            CHECK(g.At(r, c) == f.At(r + 33, c + 1));
    CHECK_THROWS_AS(CropCenter(f, 200, 10), Error);
}

TEST_CASE("2x downscale averages each block with round half up")
{
    Rng rng(1);
    GrayImage f(8, 6);
    for (auto& p : f.pixels)
    {
        p = static_cast<std::uint8_t>(rng.UniformInt(0, 255));
    }
    const GrayImage g = Downscale2x(f);
    REQUIRE(g.width == 4);
    REQUIRE(g.height == 3);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c)
        {
            const int sum = f.At(2 * r, 2 * c) + f.At(2 * r, 2 * c + 1) + f.At(2 * r + 1, 2 * c) +
                            f.At(2 * r + 1, 2 * c + 1);
            CHECK(g.At(r, c) == (sum + 2) / 4);
        }
    CHECK(Downscale2x(GrayImage(4, 4, 200)) == GrayImage(2, 2, 200));
}

TEST_CASE("input preparation per variant")
{
    const GrayImage frame(324, 244, 9);
    const GrayImage a = PrepareInput(frame, BuildFrontnet(Variant::W160C32));
    CHECK(a.width == 160);
    CHECK(a.height == 96);
    const GrayImage b = PrepareInput(frame, BuildFrontnet(Variant::W80C32));
    CHECK(b.width == 80);
    CHECK(b.height == 48);
}

TEST_CASE("integer outputs track the clipped float reference")
{
    for (Variant v : { Variant::W160C32, Variant::W160C16, Variant::W80C32 })
    {
        CAPTURE(ToString(v));
        for (std::uint64_t seed = 1; seed <= 3; ++seed)
        {
            FloatNet net;
            const QuantizedGraph qg   = MakeQGraph(v, seed, &net);
            std::vector<double> alpha = Calibrate(net, RandomCalibration(net.graph, 3, seed + 1000));
            const auto bound          = QuantErrorBound(net, qg);
            Rng rng(seed * 17);
            for (int n = 0; n < 3; ++n)
            {
                const QTensor img        = RandomImage(qg.graph, rng);
                const InferenceResult ri = InferInt(qg, img);
                const auto rf            = InferFloat(net, Dequantize(img), &alpha);
                for (int k = 0; k < 4; ++k)
                {
                    const double pi  = k == 0 ? ri.pose.x : k == 1 ? ri.pose.y : k == 2 ? ri.pose.z : ri.pose.theta;
                    const double gap = std::abs(pi - rf[k]);
                    CHECK(gap <= bound[k]);
                    CHECK(gap < 0.05);
                }
            }
        }
    }
}
