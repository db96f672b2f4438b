//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "frontnet/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace frontnet
{

/// 8-bit grayscale image, row-major.
struct GrayImage
{
    int width  = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w)
        , height(h)
        , pixels(static_cast<std::size_t>(w) * h, fill)
    {}

    std::uint8_t& At(int row, int col)
    {
        return pixels[static_cast<std::size_t>(row) * width + col];
    }
    std::uint8_t At(int row, int col) const
    {
        return pixels[static_cast<std::size_t>(row) * width + col];
    }
    bool operator==(const GrayImage&) const = default;
};

/// Binary PGM (P5, maxval 255). Comment lines are skipped on read; `comment` is written as a
/// single '#' line after the magic.
GrayImage ReadPgm(const std::string& path);
void WritePgm(const std::string& path, const GrayImage& img, const std::string& comment = "");
GrayImage DecodePgm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> EncodePgm(const GrayImage& img, const std::string& comment = "");

/// (1, H, W) u8 activation tensor with eps 1/255.
QTensor ImageToTensor(const GrayImage& img);
/// (1, H, W) real tensor with values pixel / 255.
RTensor ImageToReal(const GrayImage& img);
GrayImage TensorToImage(const QTensor& t);

}    // namespace frontnet
