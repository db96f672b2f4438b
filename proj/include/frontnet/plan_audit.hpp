//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "frontnet/planner.hpp"

#include <string>
#include <vector>

namespace frontnet
{

struct AuditReport
{
    std::vector<std::string> violations;
    int tilesChecked = 0;
    int nodesChecked = 0;

    bool Ok() const
    {
        return violations.empty();
    }
};

/// Re-derives every tile's byte counts and receptive field from the layer geometry, checks
/// the double-buffered L1 bound, exact output coverage on a cell grid, the L2 occupancy sums
/// and the weight load order. Shares no code with the planner's tiling search.
AuditReport AuditPlan(const DeploymentPlan& p);

}    // namespace frontnet
