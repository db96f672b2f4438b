//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/rng.hpp"

#include <cmath>
#include <numbers>

namespace frontnet
{

double Rng::Normal()
{
    if (m_HasSpare)
    {
        m_HasSpare = false;
        return m_Spare;
    }
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - Uniform();
    const double u2 = Uniform();
    const double r  = std::sqrt(-2.0 * std::log(u1));
    const double a  = 2.0 * std::numbers::pi * u2;
    m_Spare         = r * std::sin(a);
    m_HasSpare      = true;
    return r * std::cos(a);
}

}    // namespace frontnet
