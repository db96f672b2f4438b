//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace frontnet
{

const char* Version();

std::uint64_t Fnv1a64(const void* data, std::size_t n);
std::string HexDigest(std::uint64_t h);
/// FNV-1a 64 of a file's bytes as 16 hex digits. Throws NotFound.
std::string HashFile(const std::string& path);

/// Tool version, hashed inputs and the seed that produced an artifact.
struct Provenance
{
    std::string tool = "frontnet";
    std::string version;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> inputs;    ///< (label, hash)

    Provenance();
    void AddFile(const std::string& label, const std::string& path);
    void AddHash(const std::string& label, const std::string& hash);

    nlohmann::json ToJson() const;
    /// Single line for CSV and PGM comments, without the leading '#'.
    std::string ToLine() const;
};

}    // namespace frontnet
