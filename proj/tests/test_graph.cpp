//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/error.hpp"
#include "frontnet/graph.hpp"

#include "table_oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>

using namespace frontnet;

TEST_CASE("network cost counts match the independent enumeration")
{
    for (Variant v : { Variant::W160C32, Variant::W160C16, Variant::W80C32 })
    {
        const testoracle::Counts want = testoracle::EnumerateFrontnet(InputWidth(v), InputHeight(v), BaseChannels(v));
        const GraphStats s            = Analyze(BuildFrontnet(v));
        CAPTURE(ToString(v));
        CHECK(s.macs == want.macs);
        CHECK(s.params == want.params);
        CHECK(s.memoryBytes == want.memory);
    }
}

TEST_CASE("network cost totals round to the reference figures")
{
    struct Row
    {
        Variant v;
        const char* mmac;
        const char* kb;
        const char* params;
    };
    const Row rows[] = { { Variant::W160C32, "14.1", "499", "3.03e+05" },
                         { Variant::W160C16, "4.3", "184", "7.80e+04" },
                         { Variant::W80C32, "4.0", "348", "2.99e+05" } };
    for (const Row& r : rows)
    {
        const GraphStats s = Analyze(BuildFrontnet(r.v));
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f", s.macs / 1e6);
        CHECK(std::string(buf) == r.mmac);
        std::snprintf(buf, sizeof buf, "%.0f", s.memoryBytes / 1e3);
        CHECK(std::string(buf) == r.kb);
        std::snprintf(buf, sizeof buf, "%.2e", static_cast<double>(s.params));
        CHECK(std::string(buf) == r.params);
    }
}

TEST_CASE("exact counts for the three variants")
{
    CHECK(Analyze(BuildFrontnet(Variant::W160C16)).macs == 4304640);
    CHECK(Analyze(BuildFrontnet(Variant::W80C32)).macs == 4033536);
    CHECK(Analyze(BuildFrontnet(Variant::W160C32)).params == 303392);
    CHECK(Analyze(BuildFrontnet(Variant::W160C16)).params == 77968);
    CHECK(Analyze(BuildFrontnet(Variant::W80C32)).params == 298784);
    CHECK(Analyze(BuildFrontnet(Variant::W160C32)).memoryBytes == 499248);
    CHECK(Analyze(BuildFrontnet(Variant::W160C16)).memoryBytes == 183584);
    CHECK(Analyze(BuildFrontnet(Variant::W80C32)).memoryBytes == 348336);
}

TEST_CASE("shape inference")
{
    const NetGraph g = BuildFrontnet(Variant::W160C32);
    CHECK(g.inputShape == Shape{ 1, 96, 160 });
    CHECK(g.layers.front().outShape == Shape{ 32, 48, 80 });
    CHECK(g.layers[2].outShape == Shape{ 32, 24, 40 });
    CHECK(g.layers.back().inCh == 128 * 6 * 10 / 4);
    CHECK(g.layers.back().outShape == Shape{ 4, 1, 1 });

    const NetGraph s = BuildFrontnet(Variant::W80C32);
    CHECK(s.layers[2].outShape == Shape{ 32, 12, 20 });
    CHECK(s.layers.back().inCh == 128 * 2 * 3);
}

TEST_CASE("output dimension helper")
{
    CHECK(OutDim(96, 5, 2, 2, false) == 48);
    CHECK(OutDim(6, 2, 2, 0, true) == 3);
    CHECK(OutDim(5, 2, 2, 0, true) == 3);
    CHECK(OutDim(5, 2, 2, 0, false) == 2);
    CHECK(OutDim(3, 3, 2, 1, false) == 2);
    CHECK(OutDim(2, 5, 1, 0, false) == 0);
}

TEST_CASE("variant parsing")
{
    CHECK(VariantFromString("160x16") == Variant::W160C16);
    CHECK(std::string(ToString(Variant::W80C32)) == "80x32");
    CHECK_THROWS_AS(VariantFromString("96x32"), Error);
    CHECK_THROWS_AS(BuildFrontnet(120, 32), Error);
}

TEST_CASE("graph JSON roundtrip")
{
    for (Variant v : { Variant::W160C32, Variant::W160C16, Variant::W80C32 })
    {
        const NetGraph g = BuildFrontnet(v);
        const NetGraph r = GraphFromJson(GraphToJson(g));
        CHECK(r.variant == g.variant);
        CHECK(r.inputShape == g.inputShape);
        REQUIRE(r.layers.size() == g.layers.size());
        for (std::size_t i = 0; i < g.layers.size(); ++i)
        {
            CHECK(r.layers[i].name == g.layers[i].name);
            CHECK(r.layers[i].outShape == g.layers[i].outShape);
            CHECK(r.layers[i].Macs() == g.layers[i].Macs());
        }
    }
}

TEST_CASE("malformed graph documents are schema errors")
{
    nlohmann::json j = GraphToJson(BuildFrontnet(Variant::W160C16));
    j["layers"][3]["out_shape"] = { 99, 1, 1 };
    try
    {
        GraphFromJson(j);
        FAIL("expected failure");
    }
    catch (const Error& e)
    {
        CHECK(e.Kind() == ErrorKind::Schema);
    }
    nlohmann::json k = { { "format", "frontnet-graph" } };
    CHECK_THROWS_AS(GraphFromJson(k), Error);
}

TEST_CASE("validation catches a broken chain")
{
    NetGraph g = BuildFrontnet(Variant::W160C32);
    g.layers[4].inShape = { 7, 7, 7 };
    CHECK_THROWS_AS(ValidateGraph(g), Error);
}

TEST_CASE("report carries the rounded totals")
{
    const NetGraph g    = BuildFrontnet(Variant::W160C32);
    const std::string r = TableReport(g, Analyze(g));
    CHECK(r.find("14.1 MMAC") != std::string::npos);
    CHECK(r.find("499 kB") != std::string::npos);
    CHECK(r.find("3.03e5") != std::string::npos);
}
