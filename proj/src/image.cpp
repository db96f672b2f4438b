//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/image.hpp"

#include "frontnet/error.hpp"
#include "frontnet/qtns.hpp"

#include <algorithm>
#include <cctype>

namespace frontnet
{

namespace
{

class PgmScanner
{
public:
    explicit PgmScanner(const std::vector<std::uint8_t>& b)
        : m_Bytes(b)
    {}

    void SkipSpaceAndComments()
    {
        while (m_Pos < m_Bytes.size())
        {
            if (m_Bytes[m_Pos] == '#')
            {
                while (m_Pos < m_Bytes.size() && m_Bytes[m_Pos] != '\n')
                {
                    ++m_Pos;
                }
            }
            else if (std::isspace(m_Bytes[m_Pos]))
            {
                ++m_Pos;
            }
            else
            {
                break;
            }
        }
    }

    int Int()
    {
        SkipSpaceAndComments();
        long v    = 0;
        int count = 0;
        while (m_Pos < m_Bytes.size() && std::isdigit(m_Bytes[m_Pos]))
        {
            v = v * 10 + (m_Bytes[m_Pos++] - '0');
            if (v > 1 << 20)
            {
                Fail(ErrorKind::Schema, "PGM header value too large");
            }
            ++count;
        }
        if (!count)
        {
            Fail(ErrorKind::Schema, "malformed PGM header");
        }
        return static_cast<int>(v);
    }

    std::size_t pos() const
    {
        return m_Pos;
    }
    void Advance()
    {
        ++m_Pos;
    }

private:
    const std::vector<std::uint8_t>& m_Bytes;
    std::size_t m_Pos = 0;
};

}    // namespace

GrayImage DecodePgm(const std::vector<std::uint8_t>& bytes)
{
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    {
        Fail(ErrorKind::Schema, "not a binary PGM (P5) image");
    }
    PgmScanner s(bytes);
    s.Advance();
    s.Advance();
    const int w      = s.Int();
    const int h      = s.Int();
    const int maxval = s.Int();
    if (maxval != 255)
    {
        Fail(ErrorKind::Schema, "PGM maxval must be 255, got " + std::to_string(maxval));
    }
    if (s.pos() >= bytes.size() || !std::isspace(bytes[s.pos()]))
    {
        Fail(ErrorKind::Schema, "malformed PGM header");
    }
    const std::size_t start = s.pos() + 1;
    GrayImage img(w, h);
    if (bytes.size() - start < img.pixels.size())
    {
        Fail(ErrorKind::Schema, "PGM payload truncated");
    }
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(start), img.pixels.size(), img.pixels.begin());
    return img;
}

std::vector<std::uint8_t> EncodePgm(const GrayImage& img, const std::string& comment)
{
    std::string header = "P5\n";
    if (!comment.empty())
    {
        header += "# " + comment + "\n";
    }
    header += std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

GrayImage ReadPgm(const std::string& path)
{
    return DecodePgm(ReadBinaryFile(path));
}

void WritePgm(const std::string& path, const GrayImage& img, const std::string& comment)
{
    WriteBinaryFile(path, EncodePgm(img, comment));
}

QTensor ImageToTensor(const GrayImage& img)
{
    QTensor t({ 1, img.height, img.width }, DType::U8, QuantParams::Activation(1.0 / 255.0));
    std::copy(img.pixels.begin(), img.pixels.end(), t.data.begin());
    return t;
}

RTensor ImageToReal(const GrayImage& img)
{
    RTensor t({ 1, img.height, img.width });
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
    {
        t.data[i] = static_cast<float>(img.pixels[i] / 255.0);
    }
    return t;
}

GrayImage TensorToImage(const QTensor& t)
{
    if (t.shape.size() != 3 || t.shape[0] != 1)
    {
        Fail(ErrorKind::ShapeMismatch, "expected a (1, H, W) image tensor, got " + ShapeToString(t.shape));
    }
    GrayImage img(t.shape[2], t.shape[1]);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
    {
        img.pixels[i] = static_cast<std::uint8_t>(std::clamp(t.data[i], 0, 255));
    }
    return img;
}

}    // namespace frontnet
