//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/engine.hpp"
#include "frontnet/error.hpp"
#include "frontnet/quantizer.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <filesystem>
#include <limits>

using namespace frontnet;

namespace
{

ErrorKind KindOf(const std::function<void()>& fn)
{
    try
    {
        fn();
    }
    catch (const Error& e)
    {
        return e.Kind();
    }
    FAIL("no error raised");
    return ErrorKind::Internal;
}

}    // namespace

TEST_CASE("calibration alphas are the running maximum of every activation")
{
    const FloatNet net          = RandomFloatNet(BuildFrontnet(Variant::W160C16), 11);
    const CalibrationSet calib  = RandomCalibration(net.graph, 4, 12);
    const std::vector<double> a = Calibrate(net, calib);

    // Oracle: scan the traces ourselves, one image at a time.
    std::vector<double> want(net.graph.layers.size(), 0.0);
    for (const RTensor& img : calib.inputs)
    {
        std::vector<RTensor> trace;
        InferFloat(net, img, nullptr, &trace);
        for (std::size_t i = 0; i < trace.size(); ++i)
        {
            if (net.graph.layers[i].kind != LayerKind::RequantAct)
            {
                continue;
            }
            for (float v : trace[i].data)
            {
                want[i] = std::max(want[i], static_cast<double>(v));
            }
        }
    }
    REQUIRE(a.size() == want.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        CHECK(a[i] == want[i]);
        if (net.graph.layers[i].kind == LayerKind::RequantAct)
        {
            CHECK(a[i] > 0.0);
        }
    }
}

TEST_CASE("calibration pixels are exact byte codes")
{
    const CalibrationSet calib = RandomCalibration(BuildFrontnet(Variant::W80C32), 3, 5);
    for (const RTensor& t : calib.inputs)
    {
        for (float v : t.data)
        {
            const double code = static_cast<double>(v) * 255.0;
            CHECK(std::abs(code - std::round(code)) < 1e-4);
        }
    }
}

TEST_CASE("a dead activation layer is reported by name")
{
    FloatNet net = RandomFloatNet(BuildFrontnet(Variant::W160C16), 3);
    std::size_t dead = 0;
    for (std::size_t i = 0; i < net.graph.layers.size(); ++i)
    {
        if (net.graph.layers[i].name == "block2_conv1_act")
        {
            dead = i;
        }
    }
    REQUIRE(dead > 0);
    for (float& b : net.params[dead].beta)
    {
        b = -1e4f;
    }
    try
    {
        Calibrate(net, RandomCalibration(net.graph, 2, 1));
        FAIL("expected Degenerate");
    }
    catch (const Error& e)
    {
        CHECK(e.Kind() == ErrorKind::Degenerate);
        CHECK(std::string(e.what()).find("block2_conv1_act") != std::string::npos);
    }
}

TEST_CASE("requant fit: largest shift and bounded error")
{
    const double scales[] = { 1e-4, 3.7e-4, 0.0123, 0.5, 0.999, 1.0, 7.25, 1234.5 };
    for (double s : scales)
    {
        const RequantFit f = FitRequant(s, -0.37 * s, "t");
        CHECK(f.shift >= 0);
        CHECK(f.shift <= 31);
        CHECK(std::abs(static_cast<double>(f.multiplier)) < 2147483648.0);
        CHECK(std::abs(std::ldexp(f.multiplier, -f.shift) - s) / s <= std::ldexp(1.0, -15));
        if (f.shift < 31)
        {
            // One more bit of shift must overflow either word.
            const double p = std::ldexp(1.0, f.shift + 1);
            CHECK((std::abs(std::round(s * p)) >= 2147483648.0 || std::abs(std::round(-0.37 * s * p)) >= 2147483648.0));
        }
    }
    CHECK(KindOf([] { FitRequant(1e-12, 0.0, "tiny"); }) == ErrorKind::Overflow);
    CHECK(KindOf([] { FitRequant(1e10, 0.0, "huge"); }) == ErrorKind::Overflow);
    CHECK(KindOf([] { FitRequant(std::nan(""), 0.0, "nan"); }) == ErrorKind::Numeric);
}

TEST_CASE("conversion: every stored parameter fits and reconstructs")
{
    for (Variant v : { Variant::W160C32, Variant::W160C16, Variant::W80C32 })
    {
        CAPTURE(ToString(v));
        const FloatNet net       = RandomFloatNet(BuildFrontnet(v), 21);
        const auto alphas        = Calibrate(net, RandomCalibration(net.graph, 3, 22));
        const QuantizedGraph qg  = Convert(net, alphas);
        for (std::size_t i = 0; i < qg.layers.size(); ++i)
        {
            const LayerSpec& l = qg.graph.layers[i];
            const QLayer& q    = qg.layers[i];
            if (l.HasWeights())
            {
                const double eps = q.weights.qp.eps;
                for (std::size_t k = 0; k < q.weights.data.size(); ++k)
                {
                    const int full = q.weights.qp.zeroBase + q.weights.data[k];
                    CHECK(q.weights.data[k] >= -64);
                    CHECK(q.weights.data[k] <= 63);
                    CHECK(full >= -128);
                    CHECK(full <= 127);
                    CHECK(std::abs(eps * full - net.params[i].weight.data[k]) <= eps * (1 + 1e-9));
                }
            }
            if (l.kind == LayerKind::RequantAct)
            {
                CHECK(q.alpha == alphas[i]);
                CHECK(q.epsOut == doctest::Approx(alphas[i] / 255.0));
                for (std::size_t c = 0; c < q.scale.size(); ++c)
                {
                    const double m = std::ldexp(q.requant.multiplier[c], -q.requant.shift[c]);
                    CHECK(std::abs(m - q.scale[c]) <= std::abs(q.scale[c]) * std::ldexp(1.0, -15));
                    const double b = std::ldexp(q.requant.bias[c], -q.requant.shift[c]);
                    CHECK(std::abs(b - q.offset[c]) <= std::ldexp(0.5, -q.requant.shift[c]) + 1e-12);
                }
            }
        }
        for (int k = 0; k < 4; ++k)
        {
            CHECK(qg.outputEps[k] > 0.0);
        }
    }
}

TEST_CASE("conversion is deterministic and survives JSON")
{
    const FloatNet net = RandomFloatNet(BuildFrontnet(Variant::W80C32), 8);
    const auto alphas  = Calibrate(net, RandomCalibration(net.graph, 2, 9));
    const QuantizedGraph a = Convert(net, alphas);
    const QuantizedGraph b = Convert(net, alphas);
    CHECK(QGraphToJson(a) == QGraphToJson(b));
    const QuantizedGraph r = QGraphFromJson(QGraphToJson(a));
    CHECK(QGraphToJson(r) == QGraphToJson(a));
}

TEST_CASE("a tampered weight code is rejected on load")
{
    const FloatNet net = RandomFloatNet(BuildFrontnet(Variant::W160C16), 8);
    nlohmann::json j   = QGraphToJson(Convert(net, Calibrate(net, RandomCalibration(net.graph, 2, 9))));
    CHECK_NOTHROW(QGraphFromJson(j));
    nlohmann::json w = j;
    w["layers"][0]["weights"][0] = 100;
    CHECK(KindOf([&] { QGraphFromJson(w); }) == ErrorKind::Overflow);
    nlohmann::json r = j;
    r["layers"][1]["requant"] = "bogus";
    CHECK(KindOf([&] { QGraphFromJson(r); }) == ErrorKind::Schema);
}

TEST_CASE("float net save and load roundtrip")
{
    const FloatNet net = RandomFloatNet(BuildFrontnet(Variant::W160C16), 4);
    const auto dir     = std::filesystem::temp_directory_path() / "frontnet_test_floatnet";
    std::filesystem::remove_all(dir);
    SaveFloatNet(net, dir.string());
    const FloatNet back = LoadFloatNet(net.graph, dir.string());
    REQUIRE(back.params.size() == net.params.size());
    for (std::size_t i = 0; i < net.params.size(); ++i)
    {
        CHECK(back.params[i].weight.data == net.params[i].weight.data);
        CHECK(back.params[i].bias == net.params[i].bias);
        CHECK(back.params[i].gamma == net.params[i].gamma);
        CHECK(back.params[i].var == net.params[i].var);
    }
    std::filesystem::remove_all(dir);
    CHECK(KindOf([&] { LoadFloatNet(net.graph, dir.string()); }) == ErrorKind::NotFound);
}

TEST_CASE("random nets are seed-determined")
{
    const NetGraph g = BuildFrontnet(Variant::W80C32);
    CHECK(RandomFloatNet(g, 1).params[0].weight.data == RandomFloatNet(g, 1).params[0].weight.data);
    CHECK(RandomFloatNet(g, 1).params[0].weight.data != RandomFloatNet(g, 2).params[0].weight.data);
    CHECK(RandomFloatNet(g, 1).params.back().bias == std::vector<float>{ 2.0f, 0.0f, 0.0f, 0.0f });
}
