//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <random>

namespace frontnet
{

/// Seeded generator with distributions computed here rather than by the standard library,
/// whose distribution algorithms are implementation-defined. Streams are identical on every
/// platform for a given seed.
class Rng
{
public:
    explicit Rng(std::uint64_t seed)
        : m_Engine(seed)
    {}

    std::uint64_t NextU64()
    {
        return m_Engine();
    }
    /// Uniform in [0, 1) with 53 random bits.
    double Uniform()
    {
        return static_cast<double>(m_Engine() >> 11) * 0x1.0p-53;
    }
    double Uniform(double lo, double hi)
    {
        return lo + (hi - lo) * Uniform();
    }
    /// Uniform integer in [lo, hi].
    std::int64_t UniformInt(std::int64_t lo, std::int64_t hi)
    {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(NextU64() % span);
    }
    bool Bernoulli(double p)
    {
        return Uniform() < p;
    }
    double Normal();
    double Normal(double mean, double stddev)
    {
        return mean + stddev * Normal();
    }
    /// Child generator for an independent sub-stream.
    Rng Split()
    {
        return Rng(NextU64() ^ 0x9e3779b97f4a7c15ULL);
    }

private:
    std::mt19937_64 m_Engine;
    bool m_HasSpare = false;
    double m_Spare  = 0.0;
};

}    // namespace frontnet
