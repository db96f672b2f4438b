//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "frontnet/graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace frontnet
{

struct MemoryHierarchy
{
    std::int64_t l1Bytes    = 65536;
    std::int64_t l2Bytes    = 524288;
    std::int64_t l3Bytes    = 8388608;
    std::int64_t codeBudget = 81920;    ///< L2 bytes reserved for code
    std::string dmaChannels = "l3-l2 io-dma, l2-l1 cluster-dma";

    /// Requires l1 < l2 < l3 and code < l2.
    void Validate() const;
};

nlohmann::json MemoryToJson(const MemoryHierarchy& m);
MemoryHierarchy MemoryFromJson(const nlohmann::json& j);

enum class WeightPolicy
{
    StreamedL3,
    ResidentL2,
};

const char* ToString(WeightPolicy p);
/// Accepts "streamed" and "resident".
WeightPolicy WeightPolicyFromString(const std::string& s);

/// One L1 tile: a block of output rows and channels with the input rows (halo included) and
/// the weight slice it reads.
struct Tile
{
    int rowBegin   = 0;
    int rowEnd     = 0;
    int chBegin    = 0;
    int chEnd      = 0;
    int inRowBegin = 0;
    int inRowEnd   = 0;
    std::int64_t inBytes     = 0;
    std::int64_t weightBytes = 0;
    std::int64_t outBytes    = 0;

    std::int64_t WorkingSet() const
    {
        return inBytes + weightBytes + outBytes;
    }
    /// Two copies of every buffer for double buffering.
    std::int64_t L1Bytes() const
    {
        return 2 * WorkingSet();
    }
};

/// Bytes per output element: u8 activations, 32-bit fc results.
int OutputElementBytes(const LayerSpec& l);

/// Tiles for one compute layer (conv, maxpool or fc). Rows are split first; channels only
/// when a single full-channel row strip does not fit. Among equal candidates the fewest tiles
/// win, then the widest channel slice, then the tallest row strip. Throws Constraint when one
/// row of one channel does not fit.
std::vector<Tile> TileLayer(const LayerSpec& l, std::int64_t l1Budget);

struct PlanLayer
{
    LayerSpec spec;
    std::int64_t macs        = 0;
    std::int64_t weightBytes = 0;
    std::vector<Tile> tiles;
};

/// L2 budget while one node executes. A node is one compute layer, or a conv with the
/// following pool when pool fusion is enabled.
struct L2Occupancy
{
    std::string node;
    std::vector<int> layers;    ///< indices into DeploymentPlan::layers
    std::int64_t code            = 0;
    std::int64_t weightsCurrent  = 0;
    std::int64_t weightsNext     = 0;
    std::int64_t weightsResident = 0;
    std::int64_t input           = 0;
    std::int64_t output          = 0;
    std::int64_t total           = 0;
    /// Code plus every weight plus this node's activations, i.e. no streaming at all.
    std::int64_t naiveTotal = 0;
    /// Node during which this node's weights arrive in L2; -1 for the prologue or resident.
    int weightsLoadedDuring = -1;
};

struct DeploymentPlan
{
    Variant variant = Variant::W160C32;
    WeightPolicy policy = WeightPolicy::StreamedL3;
    MemoryHierarchy mem;
    bool fusePool = false;
    std::vector<PlanLayer> layers;
    std::vector<L2Occupancy> occupancy;
    std::int64_t l3WeightBytes = 0;
    std::int64_t inputBytes    = 0;
};

struct PlanOptions
{
    WeightPolicy policy = WeightPolicy::StreamedL3;
    bool fusePool       = false;
};

/// Tiles every compute layer and records per-node L2 occupancy. Throws Constraint naming
/// the node and byte total on any L2 overflow, or when resident weights cannot fit.
DeploymentPlan Plan(const NetGraph& g, const MemoryHierarchy& mem, const PlanOptions& opt = {});

/// True when every weight, the code and the largest node input+output pair fit in L2.
bool ResidentFeasible(const NetGraph& g, const MemoryHierarchy& mem);

nlohmann::json PlanToJson(const DeploymentPlan& p);
DeploymentPlan PlanFromJson(const nlohmann::json& j);

/// CSV with a header row; streamed plans list weights_current and weights_next, resident plans
/// a single weights_resident column.
std::string MemoryReportCsv(const DeploymentPlan& p);
std::string MemoryReportText(const DeploymentPlan& p);

}    // namespace frontnet
