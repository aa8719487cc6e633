// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace clausecheck::text {

std::string_view trim(std::string_view s);

/// Unicode NFC normalization of a UTF-8 string. Invalid UTF-8 is passed
/// through unchanged.
std::string nfc(std::string_view s);

/// Key used to decide whether two checkpoints are "the same checkpoint":
/// NFC-normalized, surrounding whitespace removed. Internal whitespace and case
/// are significant.
std::string checkpoint_key(std::string_view s);

std::string to_lower_ascii(std::string_view s);

std::vector<std::string_view> split_whitespace(std::string_view s);

/// FNV-1a, 64-bit. Stable across platforms; used for feature hashing and for
/// prompt fingerprints.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace clausecheck::text
