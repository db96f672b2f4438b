//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/error.hpp"
#include "frontnet/plan_audit.hpp"
#include "frontnet/planner.hpp"

#include <doctest.h>

#include <algorithm>
#include <functional>

using namespace frontnet;

namespace
{

const Variant kVariants[] = { Variant::W160C32, Variant::W160C16, Variant::W80C32 };

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

// Every output cell of a compute layer is covered by exactly one tile.
bool ExactCover(const PlanLayer& pl)
{
    const int c = pl.spec.outShape[0], h = pl.spec.outShape[1];
    std::vector<int> hits(static_cast<std::size_t>(c) * h, 0);
    for (const Tile& t : pl.tiles)
        for (int ch = t.chBegin; ch < t.chEnd; ++ch)
            for (int r = t.rowBegin; r < t.rowEnd; ++r)
            {
                if (ch < 0 || ch >= c || r < 0 || r >= h)
                {
                    return false;
                }
                ++hits[static_cast<std::size_t>(ch) * h + r];
            }
    return std::all_of(hits.begin(), hits.end(), [](int n) { return n == 1; });
}

std::int64_t LargestNodeActivations(const NetGraph& g)
{
    std::int64_t best = NumElements(g.inputShape);
    for (const LayerSpec& l : g.layers)
    {
        const std::int64_t in  = static_cast<std::int64_t>(NumElements(l.inShape));
        const std::int64_t out = static_cast<std::int64_t>(NumElements(l.outShape)) *
                                 (l.kind == LayerKind::FullyConnected ? 4 : 1);
        best = std::max(best, in + out);
    }
    return best;
}

}    // namespace

TEST_CASE("streamed plans pass the independent audit")
{
    for (Variant v : kVariants)
    {
        for (bool fuse : { false, true })
        {
            CAPTURE(ToString(v));
            CAPTURE(fuse);
            const DeploymentPlan p = Plan(BuildFrontnet(v), MemoryHierarchy{}, { WeightPolicy::StreamedL3, fuse });
            const AuditReport r    = AuditPlan(p);
            for (const auto& s : r.violations)
            {
                MESSAGE(s);
            }
            CHECK(r.Ok());
            CHECK(r.tilesChecked > 0);
            for (const PlanLayer& pl : p.layers)
            {
                CHECK(ExactCover(pl));
                for (const Tile& t : pl.tiles)
                {
                    CHECK(t.L1Bytes() <= p.mem.l1Bytes);
                }
            }
            for (const L2Occupancy& o : p.occupancy)
            {
                CHECK(o.total <= p.mem.l2Bytes);
            }
        }
    }
}

TEST_CASE("resident feasibility agrees with a byte-count oracle")
{
    const MemoryHierarchy mem;
    for (Variant v : kVariants)
    {
        const NetGraph g       = BuildFrontnet(v);
        const GraphStats s     = Analyze(g);
        const bool want        = s.params + mem.codeBudget + LargestNodeActivations(g) <= mem.l2Bytes;
        CAPTURE(ToString(v));
        CHECK(ResidentFeasible(g, mem) == want);
        if (want)
        {
            const DeploymentPlan p = Plan(g, mem, { WeightPolicy::ResidentL2, false });
            CHECK(AuditPlan(p).Ok());
        }
        else
        {
            CHECK(KindOf([&] { Plan(g, mem, { WeightPolicy::ResidentL2, false }); }) == ErrorKind::Constraint);
        }
    }
    CHECK_FALSE(ResidentFeasible(BuildFrontnet(Variant::W160C32), mem));
    CHECK(ResidentFeasible(BuildFrontnet(Variant::W160C16), mem));
}

TEST_CASE("streaming never needs more L2 than keeping every weight")
{
    const DeploymentPlan p = Plan(BuildFrontnet(Variant::W160C32), MemoryHierarchy{});
    for (const L2Occupancy& o : p.occupancy)
    {
        CHECK(o.total <= o.naiveTotal);
        CHECK(o.total == o.code + o.weightsCurrent + o.weightsNext + o.weightsResident + o.input + o.output);
    }
}

TEST_CASE("audit catches tampered plans")
{
    const DeploymentPlan base = Plan(BuildFrontnet(Variant::W160C32), MemoryHierarchy{});
    REQUIRE(AuditPlan(base).Ok());

    auto firstTiled = [](DeploymentPlan& p) -> PlanLayer& {
        for (PlanLayer& pl : p.layers)
            if (pl.tiles.size() > 1)
                return pl;
        FAIL("no tiled layer");
        return p.layers.front();
    };

    SUBCASE("a dropped tile leaves a hole")
    {
        DeploymentPlan p = base;
        firstTiled(p).tiles.pop_back();
        CHECK_FALSE(AuditPlan(p).Ok());
    }
    SUBCASE("overlapping tiles")
    {
        DeploymentPlan p = base;
        PlanLayer& pl    = firstTiled(p);
        pl.tiles[1].rowBegin -= 1;
        CHECK_FALSE(AuditPlan(p).Ok());
    }
    SUBCASE("understated input bytes")
    {
        DeploymentPlan p = base;
        firstTiled(p).tiles[0].inBytes -= 1;
        CHECK_FALSE(AuditPlan(p).Ok());
    }
    SUBCASE("truncated halo")
    {
        DeploymentPlan p = base;
        firstTiled(p).tiles[0].inRowEnd -= 1;
        CHECK_FALSE(AuditPlan(p).Ok());
    }
    SUBCASE("tile larger than L1")
    {
        DeploymentPlan p = base;
        p.mem.l1Bytes    = 1024;
        CHECK_FALSE(AuditPlan(p).Ok());
    }
    SUBCASE("occupancy sum")
    {
        DeploymentPlan p = base;
        p.occupancy[2].total -= 100;
        CHECK_FALSE(AuditPlan(p).Ok());
    }
    SUBCASE("weights arriving too late")
    {
        DeploymentPlan p = base;
        for (L2Occupancy& o : p.occupancy)
        {
            if (o.weightsLoadedDuring >= 0)
            {
                o.weightsLoadedDuring += 1;
                break;
            }
        }
        CHECK_FALSE(AuditPlan(p).Ok());
    }
}

TEST_CASE("tiling search")
{
    const NetGraph g = BuildFrontnet(Variant::W160C32);
    for (const LayerSpec& l : g.layers)
    {
        if (l.kind != LayerKind::Conv2d && l.kind != LayerKind::MaxPool && l.kind != LayerKind::FullyConnected)
        {
            continue;
        }
        const auto tiles = TileLayer(l, 65536);
        CHECK_FALSE(tiles.empty());
        PlanLayer pl;
        pl.spec  = l;
        pl.tiles = tiles;
        CHECK(ExactCover(pl));
        // A bigger budget never needs more tiles.
        CHECK(TileLayer(l, 4 * 65536).size() <= tiles.size());
    }
    CHECK(KindOf([&] { TileLayer(g.layers.front(), 64); }) == ErrorKind::Constraint);
}

TEST_CASE("a tiny L2 is a constraint violation naming the node")
{
    MemoryHierarchy mem;
    mem.l2Bytes    = 100000;
    mem.codeBudget = 90000;
    try
    {
        Plan(BuildFrontnet(Variant::W160C32), mem);
        FAIL("expected Constraint");
    }
    catch (const Error& e)
    {
        CHECK(e.Kind() == ErrorKind::Constraint);
        CHECK(std::string(e.what()).find("conv1") != std::string::npos);
    }
}

TEST_CASE("plan and memory JSON roundtrip")
{
    const DeploymentPlan p = Plan(BuildFrontnet(Variant::W160C16), MemoryHierarchy{}, { WeightPolicy::ResidentL2, true });
    const DeploymentPlan r = PlanFromJson(PlanToJson(p));
    CHECK(PlanToJson(r) == PlanToJson(p));
    CHECK(AuditPlan(r).Ok());
    CHECK(MemoryToJson(MemoryFromJson(MemoryToJson(p.mem))) == MemoryToJson(p.mem));

    nlohmann::json bad = MemoryToJson(MemoryHierarchy{});
    bad["l1_bytes"]    = "lots";
    CHECK_THROWS_AS(MemoryFromJson(bad), Error);
}

TEST_CASE("memory report columns follow the policy")
{
    const std::string s = MemoryReportCsv(Plan(BuildFrontnet(Variant::W160C32), MemoryHierarchy{}));
    CHECK(s.find("weights_current") != std::string::npos);
    CHECK(s.find("weights_next") != std::string::npos);
    const std::string r =
        MemoryReportCsv(Plan(BuildFrontnet(Variant::W160C16), MemoryHierarchy{}, { WeightPolicy::ResidentL2, false }));
    CHECK(r.find("weights_resident") != std::string::npos);
    CHECK(r.find("weights_next") == std::string::npos);
}
