// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "clausecheck/types.hpp"

namespace clausecheck {

inline constexpr std::string_view kPreambleLabel = "PREAMBLE";

struct ChunkerConfig {
  std::size_t max_chunk_chars = 4000;
  /// Treat short ALL-CAPS lines as headings when no numbered heading matches.
  bool all_caps_headings = true;
  std::size_t max_all_caps_heading_chars = 80;
};

enum class HeadingRule { kDottedNumeral, kAllCaps };

struct DetectedHeading {
  std::size_t line = 0;  // 1-based
  std::string text;
  HeadingRule rule = HeadingRule::kDottedNumeral;
};

/// Chunks plus everything an operator needs to audit the segmentation.
struct Segmentation {
  std::vector<ClauseChunk> chunks;
  std::vector<DetectedHeading> headings;
  /// Indices into `chunks` of single paragraphs longer than max_chunk_chars.
  std::vector<std::size_t> oversized;
  /// Headings that were followed by no body text.
  std::vector<std::string> empty_sections;
};

/// Returns the heading rule a line satisfies, if any. Exposed for testing.
std::optional<HeadingRule> classify_heading(std::string_view line, const ChunkerConfig& config);

/// Splits a contract into section-aligned chunks. Long sections are split at
/// blank-line paragraph boundaries and packed greedily up to max_chunk_chars.
/// Chunk ids are positions 0..n-1; the knowledge base assigns persistent ids.
/// Throws Error(kContractViolation) if max_chunk_chars < 200.
Segmentation segment_contract(std::string_view document, const ChunkerConfig& config = {},
                              std::string_view source_doc = {});

/// Text handed to the embedder for a clause: heading line, newline, body.
std::string clause_embedding_text(const ClauseChunk& chunk, bool include_heading = true);

}  // namespace clausecheck
