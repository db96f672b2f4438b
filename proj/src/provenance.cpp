//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/provenance.hpp"

#include "frontnet/qtns.hpp"

#include <cstdio>

namespace frontnet
{

const char* Version()
{
    return "0.3.0";
}

std::uint64_t Fnv1a64(const void* data, std::size_t n)
{
    const auto* p   = static_cast<const std::uint8_t*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i)
    {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string HexDigest(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string HashFile(const std::string& path)
{
    const auto bytes = ReadBinaryFile(path);
    return HexDigest(Fnv1a64(bytes.data(), bytes.size()));
}

Provenance::Provenance()
    : version(Version())
{}

void Provenance::AddFile(const std::string& label, const std::string& path)
{
    inputs.emplace_back(label, HashFile(path));
}

void Provenance::AddHash(const std::string& label, const std::string& hash)
{
    inputs.emplace_back(label, hash);
}

nlohmann::json Provenance::ToJson() const
{
    nlohmann::json in = nlohmann::json::object();
    for (const auto& [label, hash] : inputs)
    {
        in[label] = hash;
    }
    return { { "tool", tool }, { "version", version }, { "seed", seed }, { "inputs", in } };
}

std::string Provenance::ToLine() const
{
    std::string line = tool + " " + version + " seed=" + std::to_string(seed);
    for (const auto& [label, hash] : inputs)
    {
        line += " " + label + "=" + hash;
    }
    return line;
}

}    // namespace frontnet
