//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "frontnet/tensor.hpp"

#include <string>
#include <vector>

namespace frontnet
{

/// QTNS layout, all little-endian:
///     "QTNS" | dtype u8 | rank u8 | dims u32 x rank | payload | eps f64 | zero_base i32
/// Payload elements are u8, i8, i32 or f32 according to dtype, row-major.
std::vector<std::uint8_t> EncodeQtns(const QTensor& t);
std::vector<std::uint8_t> EncodeQtns(const RTensor& t);

struct QtnsFile
{
    DType dtype = DType::U8;
    QTensor q;    ///< valid when dtype is an integer tag
    RTensor r;    ///< valid when dtype is F32
};

/// Throws Schema on a bad magic, unknown dtype or truncated payload.
QtnsFile DecodeQtns(const std::vector<std::uint8_t>& bytes);

void WriteQtns(const std::string& path, const QTensor& t);
void WriteQtns(const std::string& path, const RTensor& t);
QtnsFile ReadQtns(const std::string& path);

/// Whole-file helpers that raise NotFound instead of returning an empty buffer.
std::vector<std::uint8_t> ReadBinaryFile(const std::string& path);
void WriteBinaryFile(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

}    // namespace frontnet
