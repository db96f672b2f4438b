//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/qtns.hpp"

#include "frontnet/error.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace frontnet
{

namespace
{

constexpr char kMagic[4] = { 'Q', 'T', 'N', 'S' };

class Writer
{
public:
    template <typename T>
    void Put(T v)
    {
        std::uint8_t raw[sizeof(T)];
        std::memcpy(raw, &v, sizeof(T));
        if constexpr (std::endian::native == std::endian::big)
        {
            std::reverse(raw, raw + sizeof(T));
        }
        m_Bytes.insert(m_Bytes.end(), raw, raw + sizeof(T));
    }
    std::vector<std::uint8_t> Take()
    {
        return std::move(m_Bytes);
    }

private:
    std::vector<std::uint8_t> m_Bytes;
};

class Reader
{
public:
    explicit Reader(const std::vector<std::uint8_t>& b)
        : m_Bytes(b)
    {}
    template <typename T>
    T Get()
    {
        if (m_Pos + sizeof(T) > m_Bytes.size())
        {
            Fail(ErrorKind::Schema, "QTNS stream truncated at byte " + std::to_string(m_Pos));
        }
        std::uint8_t raw[sizeof(T)];
        std::memcpy(raw, m_Bytes.data() + m_Pos, sizeof(T));
        if constexpr (std::endian::native == std::endian::big)
        {
            std::reverse(raw, raw + sizeof(T));
        }
        m_Pos += sizeof(T);
        T v;
        std::memcpy(&v, raw, sizeof(T));
        return v;
    }
    bool AtEnd() const
    {
        return m_Pos == m_Bytes.size();
    }

private:
    const std::vector<std::uint8_t>& m_Bytes;
    std::size_t m_Pos = 0;
};

void PutHeader(Writer& w, DType dtype, const Shape& shape)
{
    for (char c : kMagic)
    {
        w.Put<std::uint8_t>(static_cast<std::uint8_t>(c));
    }
    w.Put<std::uint8_t>(static_cast<std::uint8_t>(dtype));
    if (shape.size() > 255)
    {
        Fail(ErrorKind::InvalidArgument, "tensor rank too large for QTNS");
    }
    w.Put<std::uint8_t>(static_cast<std::uint8_t>(shape.size()));
    for (int d : shape)
    {
        w.Put<std::uint32_t>(static_cast<std::uint32_t>(d));
    }
}

}    // namespace

std::vector<std::uint8_t> EncodeQtns(const QTensor& t)
{
    t.Validate();
    Writer w;
    PutHeader(w, t.dtype, t.shape);
    for (std::int32_t v : t.data)
    {
        switch (t.dtype)
        {
            case DType::U8:
                w.Put<std::uint8_t>(static_cast<std::uint8_t>(v));
                break;
            case DType::I8:
                w.Put<std::int8_t>(static_cast<std::int8_t>(v));
                break;
            case DType::I32:
                w.Put<std::int32_t>(v);
                break;
            case DType::F32:
                w.Put<float>(static_cast<float>(v));
                break;
        }
    }
    w.Put<double>(t.qp.eps);
    w.Put<std::int32_t>(t.qp.zeroBase);
    return w.Take();
}

std::vector<std::uint8_t> EncodeQtns(const RTensor& t)
{
    Writer w;
    PutHeader(w, DType::F32, t.shape);
    for (float v : t.data)
    {
        w.Put<float>(v);
    }
    w.Put<double>(1.0);
    w.Put<std::int32_t>(0);
    return w.Take();
}

QtnsFile DecodeQtns(const std::vector<std::uint8_t>& bytes)
{
    Reader r(bytes);
    for (char c : kMagic)
    {
        if (r.Get<std::uint8_t>() != static_cast<std::uint8_t>(c))
        {
            Fail(ErrorKind::Schema, "bad QTNS magic");
        }
    }
    const auto code = r.Get<std::uint8_t>();
    if (code > 3)
    {
        Fail(ErrorKind::Schema, "unknown QTNS dtype code " + std::to_string(code));
    }
    QtnsFile f;
    f.dtype         = static_cast<DType>(code);
    const auto rank = r.Get<std::uint8_t>();
    Shape shape;
    for (int i = 0; i < rank; ++i)
    {
        const auto d = r.Get<std::uint32_t>();
        if (d > (1u << 30))
        {
            Fail(ErrorKind::Schema, "implausible QTNS dimension " + std::to_string(d));
        }
        shape.push_back(static_cast<int>(d));
    }
    const std::size_t n = NumElements(shape);
    if (f.dtype == DType::F32)
    {
        f.r = RTensor(shape);
        for (std::size_t i = 0; i < n; ++i)
        {
            f.r.data[i] = r.Get<float>();
        }
    }
    else
    {
        f.q.shape = shape;
        f.q.dtype = f.dtype;
        f.q.data.resize(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            switch (f.dtype)
            {
                case DType::U8:
                    f.q.data[i] = r.Get<std::uint8_t>();
                    break;
                case DType::I8:
                    f.q.data[i] = r.Get<std::int8_t>();
                    break;
                default:
                    f.q.data[i] = r.Get<std::int32_t>();
                    break;
            }
        }
    }
    const double eps  = r.Get<double>();
    const auto zero   = r.Get<std::int32_t>();
    if (!r.AtEnd())
    {
        Fail(ErrorKind::Schema, "trailing bytes after QTNS trailer");
    }
    if (f.dtype == DType::U8)
    {
        f.q.qp = QuantParams::Activation(eps);
    }
    else if (f.dtype == DType::I8)
    {
        f.q.qp = QuantParams::Weight(eps, zero);
    }
    else if (f.dtype == DType::I32)
    {
        f.q.qp = QuantParams::Accumulator(eps);
    }
    return f;
}

std::vector<std::uint8_t> ReadBinaryFile(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        Fail(ErrorKind::NotFound, "cannot open '" + path + "'");
    }
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void WriteBinaryFile(const std::string& path, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        Fail(ErrorKind::NotFound, "cannot write '" + path + "'");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string ReadTextFile(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        Fail(ErrorKind::NotFound, "cannot open '" + path + "'");
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void WriteTextFile(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
    {
        Fail(ErrorKind::NotFound, "cannot write '" + path + "'");
    }
    out << text;
}

void WriteQtns(const std::string& path, const QTensor& t)
{
    WriteBinaryFile(path, EncodeQtns(t));
}

void WriteQtns(const std::string& path, const RTensor& t)
{
    WriteBinaryFile(path, EncodeQtns(t));
}

QtnsFile ReadQtns(const std::string& path)
{
    return DecodeQtns(ReadBinaryFile(path));
}

}    // namespace frontnet
