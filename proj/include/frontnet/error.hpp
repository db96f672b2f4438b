//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <stdexcept>
#include <string>

namespace frontnet
{

/// Error categories. The C API maps each one onto a distinct status code.
enum class ErrorKind
{
    InvalidArgument,
    Degenerate,
    Overflow,
    ShapeMismatch,
    NotFound,
    Schema,
    Constraint,
    Numeric,
    Internal,
};

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what)
        , m_Kind(kind)
    {}

    ErrorKind Kind() const noexcept
    {
        return m_Kind;
    }

private:
    ErrorKind m_Kind;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

}    // namespace frontnet
