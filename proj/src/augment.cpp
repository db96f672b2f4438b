//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/augment.hpp"

#include "frontnet/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace frontnet
{

namespace
{

void CheckRange(const Range& r, const char* name)
{
    if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
    {
        Fail(ErrorKind::InvalidArgument, std::string("invalid ") + name + " range");
    }
}

void CheckProbability(double p, const char* name)
{
    if (!(p >= 0.0 && p <= 1.0))
    {
        Fail(ErrorKind::InvalidArgument, std::string(name) + " must lie in [0, 1]");
    }
}

}    // namespace

void AugmentConfig::Validate() const
{
    CheckRange(contrast, "contrast");
    CheckRange(brightness, "brightness");
    CheckRange(gamma, "gamma");
    CheckRange(vignetteRadius, "vignette radius");
    CheckRange(vignetteStrength, "vignette strength");
    CheckProbability(probability, "op probability");
    CheckProbability(flipProbability, "flip probability");
    if (gamma.lo <= 0.0)
    {
        Fail(ErrorKind::InvalidArgument, "gamma must be positive");
    }
    if (!(blurSigma > 0.0) || cropHeight <= 0)
    {
        Fail(ErrorKind::InvalidArgument, "blur sigma and crop height must be positive");
    }
}

PitchCropResult PitchCrop(const GrayImage& img, int rowOffset, const AugmentConfig& cfg)
{
    const int maxOffset = img.height - cfg.cropHeight;
    if (maxOffset <= 0 || maxOffset % 2)
    {
        Fail(ErrorKind::ShapeMismatch, "pitch crop needs a source taller than the crop by an even count");
    }
    if (rowOffset < 0 || rowOffset > maxOffset)
    {
        Fail(ErrorKind::InvalidArgument, "row offset " + std::to_string(rowOffset) + " outside [0, " +
                                             std::to_string(maxOffset) + "]");
    }
    PitchCropResult out;
    out.image = GrayImage(img.width, cfg.cropHeight);
    std::copy_n(img.pixels.begin() + static_cast<std::ptrdiff_t>(rowOffset) * img.width, out.image.pixels.size(),
                out.image.pixels.begin());
    const double half = maxOffset / 2.0;
    out.pitch         = cfg.maxPitchDeg * (half - rowOffset) / half * std::numbers::pi / 180.0;
    return out;
}

PhotometricDraw DrawPhotometric(const AugmentConfig& cfg, Rng& rng, int width, int height)
{
    cfg.Validate();
    PhotometricDraw d;
    // Every op consumes the same number of draws whether or not it fires, so streams stay
    // aligned across configurations.
    const bool c = rng.Bernoulli(cfg.probability);
    const double cv = rng.Uniform(cfg.contrast.lo, cfg.contrast.hi);
    const bool b = rng.Bernoulli(cfg.probability);
    const double bv = rng.Uniform(cfg.brightness.lo, cfg.brightness.hi);
    const bool g = rng.Bernoulli(cfg.probability);
    const double gv = rng.Uniform(cfg.gamma.lo, cfg.gamma.hi);
    const bool v = rng.Bernoulli(cfg.probability);
    const double rv = rng.Uniform(cfg.vignetteRadius.lo, cfg.vignetteRadius.hi);
    const double sv = rng.Uniform(cfg.vignetteStrength.lo, cfg.vignetteStrength.hi);
    d.blur = rng.Bernoulli(cfg.probability);
    if (c)
    {
        d.contrast = cv;
    }
    if (b)
    {
        d.brightness = bv;
    }
    if (g)
    {
        d.gamma = gv;
    }
    if (v)
    {
        const double halfDiag = 0.5 * std::hypot(width, height);
        d.vignette            = Vignette{ rv * halfDiag, sv };
    }
    return d;
}

std::vector<float> GaussianBlur(const std::vector<float>& plane, int width, int height, double sigma)
{
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i)
    {
        k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k)
    {
        v /= sum;
    }
    std::vector<float> tmp(plane.size());
    std::vector<float> out(plane.size());
    for (int r = 0; r < height; ++r)
    {
        for (int c = 0; c < width; ++c)
        {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
            {
                const int cc = std::clamp(c + i, 0, width - 1);
                acc += k[i + radius] * plane[static_cast<std::size_t>(r) * width + cc];
            }
            tmp[static_cast<std::size_t>(r) * width + c] = static_cast<float>(acc);
        }
    }
    for (int r = 0; r < height; ++r)
    {
        for (int c = 0; c < width; ++c)
        {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
            {
                const int rr = std::clamp(r + i, 0, height - 1);
                acc += k[i + radius] * tmp[static_cast<std::size_t>(rr) * width + c];
            }
            out[static_cast<std::size_t>(r) * width + c] = static_cast<float>(acc);
        }
    }
    return out;
}

GrayImage ApplyPhotometric(const GrayImage& img, const PhotometricDraw& draw, const AugmentConfig& cfg)
{
    std::vector<float> v(img.pixels.size());
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        v[i] = static_cast<float>(img.pixels[i] / 255.0);
    }
    auto clamp01 = [](double x) { return static_cast<float>(std::clamp(x, 0.0, 1.0)); };
    if (draw.contrast)
    {
        for (float& x : v)
        {
            x = clamp01(x * *draw.contrast);
        }
    }
    if (draw.brightness)
    {
        for (float& x : v)
        {
            x = clamp01(x + *draw.brightness);
        }
    }
    if (draw.gamma)
    {
        for (float& x : v)
        {
            x = clamp01(std::pow(static_cast<double>(x), *draw.gamma));
        }
    }
    if (draw.vignette && draw.vignette->radius > 0.0)
    {
        const double cy = (img.height - 1) / 2.0;
        const double cx = (img.width - 1) / 2.0;
        for (int r = 0; r < img.height; ++r)
        {
            for (int c = 0; c < img.width; ++c)
            {
                const double d = std::min(std::hypot(r - cy, c - cx) / draw.vignette->radius, 1.0);
                const double f = 1.0 - draw.vignette->strength * (1.0 - std::cos(d * std::numbers::pi / 2.0));
                float& x       = v[static_cast<std::size_t>(r) * img.width + c];
                x              = clamp01(x * f);
            }
        }
    }
    if (draw.blur)
    {
        v = GaussianBlur(v, img.width, img.height, cfg.blurSigma);
        for (float& x : v)
        {
            x = clamp01(x);
        }
    }
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        out.pixels[i] = static_cast<std::uint8_t>(std::lround(static_cast<double>(v[i]) * 255.0));
    }
    return out;
}

GrayImage Photometric(const GrayImage& img, const AugmentConfig& cfg, Rng& rng)
{
    return ApplyPhotometric(img, DrawPhotometric(cfg, rng, img.width, img.height), cfg);
}

LabeledImage HFlip(const LabeledImage& li)
{
    LabeledImage out = li;
    for (int r = 0; r < li.image.height; ++r)
    {
        for (int c = 0; c < li.image.width; ++c)
        {
            out.image.At(r, c) = li.image.At(r, li.image.width - 1 - c);
        }
    }
    out.label.y     = -li.label.y;
    out.label.theta = -li.label.theta;
    return out;
}

AugmentedSample AugmentOne(const LabeledImage& src, const AugmentConfig& cfg, Rng& rng)
{
    cfg.Validate();
    AugmentedSample s;
    s.sample.label = src.label;
    if (src.image.height == cfg.cropHeight)
    {
        s.sample.image = src.image;
    }
    else
    {
        const int maxOffset = src.image.height - cfg.cropHeight;
        s.rowOffset         = static_cast<int>(rng.UniformInt(0, maxOffset));
        PitchCropResult pc  = PitchCrop(src.image, s.rowOffset, cfg);
        s.sample.image      = std::move(pc.image);
        s.pitch             = pc.pitch;
    }
    s.draw         = DrawPhotometric(cfg, rng, s.sample.image.width, s.sample.image.height);
    s.sample.image = ApplyPhotometric(s.sample.image, s.draw, cfg);
    s.flipped      = rng.Bernoulli(cfg.flipProbability);
    if (s.flipped)
    {
        s.sample = HFlip(s.sample);
    }
    return s;
}

std::vector<LabelRow> ReadLabelsCsv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        Fail(ErrorKind::NotFound, "cannot open '" + path + "'");
    }
    std::vector<LabelRow> rows;
    std::string line;
    bool header = true;
    int lineNo  = 0;
    while (std::getline(in, line))
    {
        ++lineNo;
        if (line.empty() || line[0] == '#')
        {
            continue;
        }
        if (header)
        {
            header = false;
            if (line.rfind("file,", 0) == 0)
            {
                continue;
            }
        }
        std::stringstream ss(line);
        LabelRow row;
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ','))
        {
            fields.push_back(field);
        }
        if (fields.size() != 5)
        {
            Fail(ErrorKind::Schema, path + ":" + std::to_string(lineNo) + ": expected 5 fields");
        }
        try
        {
            row.file  = fields[0];
            row.label = { std::stod(fields[1]), std::stod(fields[2]), std::stod(fields[3]), std::stod(fields[4]) };
        }
        catch (const std::exception&)
        {
            Fail(ErrorKind::Schema, path + ":" + std::to_string(lineNo) + ": non-numeric label");
        }
        rows.push_back(row);
    }
    return rows;
}

void WriteLabelsCsv(const std::string& path, const std::vector<LabelRow>& rows, const std::string& comment)
{
    std::ofstream out(path);
    if (!out)
    {
        Fail(ErrorKind::NotFound, "cannot write '" + path + "'");
    }
    if (!comment.empty())
    {
        out << "# " << comment << "\n";
    }
    out << "file,x,y,z,theta\n";
    char buf[160];
    for (const LabelRow& r : rows)
    {
        std::snprintf(buf, sizeof buf, ",%.9g,%.9g,%.9g,%.9g\n", r.label.x, r.label.y, r.label.z, r.label.theta);
        out << r.file << buf;
    }
}

}    // namespace frontnet
