//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/metrics.hpp"

#include "frontnet/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace frontnet
{

double Percentile(std::vector<double> v, double q)
{
    if (v.empty())
    {
        Fail(ErrorKind::InvalidArgument, "percentile of an empty sample");
    }
    if (!(q >= 0.0 && q <= 100.0))
    {
        Fail(ErrorKind::InvalidArgument, "percentile rank must lie in [0, 100]");
    }
    std::sort(v.begin(), v.end());
    const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo    = static_cast<std::size_t>(std::floor(pos));
    const auto hi    = std::min(lo + 1, v.size() - 1);
    const double f   = pos - static_cast<double>(lo);
    return v[lo] + f * (v[hi] - v[lo]);
}

double Median(std::vector<double> v)
{
    return Percentile(std::move(v), 50.0);
}

double Mean(const std::vector<double>& v)
{
    if (v.empty())
    {
        Fail(ErrorKind::InvalidArgument, "mean of an empty sample");
    }
    double s = 0.0;
    for (double x : v)
    {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

double MeanSquaredError(const std::vector<double>& truth, const std::vector<double>& pred)
{
    if (truth.size() != pred.size() || truth.empty())
    {
        Fail(ErrorKind::InvalidArgument, "prediction and target lengths differ or are empty");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i)
    {
        s += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    }
    return s / static_cast<double>(truth.size());
}

double RSquared(const std::vector<double>& truth, const std::vector<double>& pred)
{
    if (truth.size() != pred.size() || truth.empty())
    {
        Fail(ErrorKind::InvalidArgument, "prediction and target lengths differ or are empty");
    }
    const double mu = Mean(truth);
    double ssRes = 0.0, ssTot = 0.0, ssRaw = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i)
    {
        ssRes += (truth[i] - pred[i]) * (truth[i] - pred[i]);
        ssTot += (truth[i] - mu) * (truth[i] - mu);
        ssRaw += truth[i] * truth[i];
    }
    // Spread at rounding level means the target is constant.
    if (ssTot <= 1e-24 * ssRaw)
    {
        ssTot = 0.0;
    }
    if (ssRes == 0.0)
    {
        return 1.0;
    }
    if (ssTot == 0.0)
    {
        return -std::numeric_limits<double>::infinity();
    }
    return 1.0 - ssRes / ssTot;
}

Distribution Summarize(const std::vector<double>& v)
{
    return { Percentile(v, 50.0), Percentile(v, 5.0), Percentile(v, 95.0) };
}

}    // namespace frontnet
