//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/augment.hpp"
#include "frontnet/error.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace frontnet;

namespace
{

constexpr double kDeg = 3.14159265358979323846 / 180.0;

GrayImage RandomImage(Rng& rng, int w, int h)
{
    GrayImage img(w, h);
    for (auto& p : img.pixels)
    {
        p = static_cast<std::uint8_t>(rng.UniformInt(0, 255));
    }
    return img;
}

std::uint64_t Fnv(const std::vector<std::uint8_t>& bytes, std::uint64_t h = 1469598103934665603ull)
{
    for (std::uint8_t b : bytes)
    {
        h = (h ^ b) * 1099511628211ull;
    }
    return h;
}

}    // namespace

TEST_CASE("horizontal flip is an involution")
{
    Rng rng(1);
    for (int i = 0; i < 1000; ++i)
    {
        LabeledImage li;
        li.image = RandomImage(rng, static_cast<int>(rng.UniformInt(1, 40)), static_cast<int>(rng.UniformInt(1, 30)));
        li.label = { rng.Uniform(0.5, 3), rng.Uniform(-1, 1), rng.Uniform(-0.5, 0.5), rng.Uniform(-3, 3) };
        const LabeledImage f = HFlip(li);
        CHECK(f.image.At(0, 0) == li.image.At(0, li.image.width - 1));
        CHECK(HFlip(f) == li);
    }
}

TEST_CASE("flip label sign rule")
{
    LabeledImage li;
    li.image = GrayImage(4, 4, 10);
    li.label = { 1.3, 0.4, 0.0, 0.2 };
    CHECK(HFlip(li).label == PoseLabel{ 1.3, -0.4, 0.0, -0.2 });
    li.label = { 2.0, 0.0, 0.1, 0.0 };
    CHECK(HFlip(li).label.y == 0.0);
    CHECK(HFlip(li).label.theta == 0.0);
}

TEST_CASE("pitch crop offsets map linearly to pitch")
{
    Rng rng(2);
    const GrayImage src = RandomImage(rng, 160, 160);
    const std::pair<int, double> cases[] = { { 0, 14.0 }, { 16, 7.0 }, { 32, 0.0 }, { 48, -7.0 }, { 64, -14.0 } };
    for (const auto& [off, deg] : cases)
    {
        const PitchCropResult r = PitchCrop(src, off);
        CHECK(r.pitch == doctest::Approx(deg * kDeg).epsilon(1e-12).scale(1.0));
        REQUIRE(r.image.height == 96);
        REQUIRE(r.image.width == 160);
        for (int row = 0; row < 96; ++row)
            for (int c = 0; c < 160; ++c)
                CHECK(r.image.At(row, c) == src.At(row + off, c));
    }
    CHECK_THROWS_AS(PitchCrop(src, 65), Error);
    CHECK_THROWS_AS(PitchCrop(src, -1), Error);
}

TEST_CASE("photometric examples")
{
    const AugmentConfig cfg;
    Rng rng(3);
    const GrayImage img = RandomImage(rng, 32, 24);

    CHECK(ApplyPhotometric(img, PhotometricDraw{}, cfg) == img);

    PhotometricDraw neutral;
    neutral.contrast   = 1.0;
    neutral.brightness = 0.0;
    neutral.gamma      = 1.0;
    CHECK(ApplyPhotometric(img, neutral, cfg) == img);

    PhotometricDraw c2;
    c2.contrast = 2.0;
    const GrayImage gray(8, 8, 128);    // 128/255 is just above one half
    CHECK(ApplyPhotometric(gray, c2, cfg) == GrayImage(8, 8, 255));

    PhotometricDraw dark;
    dark.brightness = -0.2;
    CHECK(ApplyPhotometric(GrayImage(2, 2, 255), dark, cfg) == GrayImage(2, 2, 204));
    CHECK(ApplyPhotometric(GrayImage(2, 2, 10), dark, cfg) == GrayImage(2, 2, 0));

    PhotometricDraw g2;
    g2.gamma = 2.0;
    CHECK(ApplyPhotometric(GrayImage(1, 1, 51), g2, cfg).pixels[0] == 10);    // 0.2^2 * 255 = 10.2
}

TEST_CASE("vignette darkens corners more than the centre")
{
    PhotometricDraw d;
    d.vignette = Vignette{ 30.0, 0.8 };
    const GrayImage out = ApplyPhotometric(GrayImage(41, 41, 200), d, AugmentConfig{});
    CHECK(out.At(20, 20) == 200);
    CHECK(out.At(0, 0) < out.At(10, 10));
    CHECK(out.At(10, 10) <= out.At(20, 20));
}

TEST_CASE("gaussian blur keeps constants and mass")
{
    std::vector<float> flat(30 * 20, 0.4f);
    for (float v : GaussianBlur(flat, 30, 20, 3.0))
    {
        CHECK(v == doctest::Approx(0.4f).epsilon(1e-5));
    }
    std::vector<float> spike(41 * 41, 0.0f);
    spike[20 * 41 + 20] = 1.0f;
    const auto b        = GaussianBlur(spike, 41, 41, 3.0);
    double sum          = 0.0;
    for (float v : b)
    {
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(b[20 * 41 + 20] == doctest::Approx(1.0 / (2 * 3.14159265358979 * 9)).epsilon(0.02));
}

TEST_CASE("pipeline determinism")
{
    Rng src(4);
    std::vector<LabeledImage> inputs;
    for (int i = 0; i < 20; ++i)
    {
        inputs.push_back({ RandomImage(src, 160, 160), { 1.5, 0.1 * i, 0.0, 0.05 * i } });
    }
    auto run = [&](std::uint64_t seed) {
        Rng rng(seed);
        std::uint64_t h = 1469598103934665603ull;
        for (const LabeledImage& li : inputs)
        {
            const AugmentedSample s = AugmentOne(li, AugmentConfig{}, rng);
            h                       = Fnv(s.sample.image.pixels, h);
            CHECK(s.sample.image.height == 96);
            CHECK(s.rowOffset >= 0);
            CHECK(s.rowOffset <= 64);
            CHECK(s.sample.label.y == (s.flipped ? -li.label.y : li.label.y));
        }
        return h;
    };
    CHECK(run(42) == run(42));
    CHECK(run(42) != run(43));
}

TEST_CASE("PGM and label files roundtrip")
{
    const auto dir = std::filesystem::temp_directory_path() / "frontnet_test_augment";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    Rng rng(5);
    const GrayImage img = RandomImage(rng, 17, 9);
    WritePgm((dir / "a.pgm").string(), img, "seed 5");
    CHECK(ReadPgm((dir / "a.pgm").string()) == img);
    CHECK(DecodePgm(EncodePgm(img)) == img);
    CHECK_THROWS_AS(DecodePgm({ 'P', '2', '\n' }), Error);

    const std::vector<LabelRow> rows{ { "a.pgm", { 1.25, -0.5, 0.125, 0.75 } }, { "b.pgm", { 2.0, 0.0, 0.0, -1.0 } } };
    WriteLabelsCsv((dir / "labels.csv").string(), rows, "test");
    const auto back = ReadLabelsCsv((dir / "labels.csv").string());
    REQUIRE(back.size() == 2);
    CHECK(back[0].file == "a.pgm");
    CHECK(back[0].label == rows[0].label);
    CHECK(back[1].label == rows[1].label);
    std::filesystem::remove_all(dir);
}

TEST_CASE("config validation")
{
    AugmentConfig c;
    c.probability = 1.5;
    CHECK_THROWS_AS(c.Validate(), Error);
    AugmentConfig r;
    r.gamma = { 2.0, 1.0 };
    CHECK_THROWS_AS(r.Validate(), Error);
}
