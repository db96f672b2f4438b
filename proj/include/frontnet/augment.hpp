//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "frontnet/image.hpp"
#include "frontnet/rng.hpp"

#include <optional>
#include <string>
#include <vector>

namespace frontnet
{

/// Subject pose relative to the camera: metres and radians.
struct PoseLabel
{
    double x     = 0.0;
    double y     = 0.0;
    double z     = 0.0;
    double theta = 0.0;

    bool operator==(const PoseLabel&) const = default;
};

struct LabeledImage
{
    GrayImage image;
    PoseLabel label;

    bool operator==(const LabeledImage&) const = default;
};

struct Range
{
    double lo = 0.0;
    double hi = 0.0;
};

struct AugmentConfig
{
    Range contrast{ 0.7, 2.0 };
    Range brightness{ -0.2, 0.2 };
    Range gamma{ 0.4, 2.0 };
    Range vignetteRadius{ 0.6, 1.4 };      ///< fraction of the half-diagonal
    Range vignetteStrength{ 0.2, 0.8 };
    double blurSigma       = 3.0;
    double probability     = 0.5;          ///< per photometric op
    double flipProbability = 0.5;
    int cropHeight         = 96;
    double maxPitchDeg     = 14.0;

    /// Throws InvalidArgument for empty ranges or probabilities outside [0, 1].
    void Validate() const;
};

struct PitchCropResult
{
    GrayImage image;
    double pitch = 0.0;    ///< radians, positive when the crop is taken from the top
};

/// Rows [offset, offset + 96) of a 160x160 frame. Offsets 0, 32 and 64 map to +14, 0 and
/// -14 degrees with linear interpolation between.
PitchCropResult PitchCrop(const GrayImage& img, int rowOffset, const AugmentConfig& cfg = {});

struct Vignette
{
    double radius   = 1.0;    ///< pixels
    double strength = 0.0;
};

/// Parameters of one photometric pass; an empty field means the op is skipped.
struct PhotometricDraw
{
    std::optional<double> contrast;
    std::optional<double> brightness;
    std::optional<double> gamma;
    std::optional<Vignette> vignette;
    bool blur = false;
};

PhotometricDraw DrawPhotometric(const AugmentConfig& cfg, Rng& rng, int width, int height);

/// Applies the drawn ops in the order contrast, brightness, gamma, vignette, blur on [0, 1]
/// intensities, clamping after each op and rounding back to 8 bits once.
GrayImage ApplyPhotometric(const GrayImage& img, const PhotometricDraw& draw, const AugmentConfig& cfg);
GrayImage Photometric(const GrayImage& img, const AugmentConfig& cfg, Rng& rng);

/// Separable Gaussian with radius ceil(3 sigma), border replicate.
std::vector<float> GaussianBlur(const std::vector<float>& plane, int width, int height, double sigma);

/// Mirror about the vertical axis; the label becomes (x, -y, z, -theta).
LabeledImage HFlip(const LabeledImage& li);

struct AugmentedSample
{
    LabeledImage sample;
    int rowOffset = -1;    ///< -1 when the source already had the crop height
    double pitch  = 0.0;
    bool flipped  = false;
    PhotometricDraw draw;
};

/// Full pipeline on one labelled frame: random pitch crop (160x160 sources only),
/// photometric ops, then a random horizontal flip.
AugmentedSample AugmentOne(const LabeledImage& src, const AugmentConfig& cfg, Rng& rng);

struct LabelRow
{
    std::string file;
    PoseLabel label;
};

/// CSV with header "file,x,y,z,theta". Lines starting with '#' are comments.
std::vector<LabelRow> ReadLabelsCsv(const std::string& path);
void WriteLabelsCsv(const std::string& path, const std::vector<LabelRow>& rows, const std::string& comment = "");

}    // namespace frontnet
