//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <vector>

namespace frontnet
{

/// Linear interpolation between closest ranks, q in [0, 100]. Throws on empty input.
double Percentile(std::vector<double> v, double q);
double Median(std::vector<double> v);
double Mean(const std::vector<double>& v);
double MeanSquaredError(const std::vector<double>& truth, const std::vector<double>& pred);

/// 1 - SS_res / SS_tot. A constant target gives 1 for an exact fit and -inf otherwise.
double RSquared(const std::vector<double>& truth, const std::vector<double>& pred);

struct Distribution
{
    double median = 0.0;
    double p5     = 0.0;
    double p95    = 0.0;
};

Distribution Summarize(const std::vector<double>& v);

}    // namespace frontnet
