// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "clausecheck/chunker.hpp"

#include <cctype>

#include "clausecheck/error.hpp"
#include "clausecheck/text.hpp"

namespace clausecheck {

namespace {

constexpr std::size_t kMaxNumberedHeadingChars = 120;

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ascii_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_ascii_lower(char c) { return c >= 'a' && c <= 'z'; }

// "4", "4.1", "12.3.2" optionally followed by '.', then whitespace, then a
// title that starts with a letter and does not read like a sentence.
bool is_numbered_heading(std::string_view line) {
  if (line.size() > kMaxNumberedHeadingChars) return false;
  std::size_t i = 0;
  auto digits = [&] {
    const std::size_t start = i;
    while (i < line.size() && is_digit(line[i])) ++i;
    return i > start;
  };
  if (!digits()) return false;
  while (i + 1 < line.size() && line[i] == '.' && is_digit(line[i + 1])) {
    ++i;
    digits();
  }
  if (i < line.size() && line[i] == '.') ++i;
  if (i >= line.size() || !(line[i] == ' ' || line[i] == '\t')) return false;
  const std::string_view title = text::trim(line.substr(i));
  if (title.empty()) return false;
  const unsigned char first = static_cast<unsigned char>(title.front());
  if (!(std::isalpha(first) || first >= 0x80)) return false;
  const char last = title.back();
  return last != '.' && last != ';' && last != ',';
}

bool is_all_caps_heading(std::string_view line, std::size_t max_chars) {
  if (line.size() > max_chars || line.front() == '(') return false;
  std::size_t letters = 0;
  for (char c : line) {
    if (is_ascii_lower(c)) return false;
    if (is_ascii_upper(c)) ++letters;
  }
  const char last = line.back();
  return letters >= 2 && last != ';' && last != ',';
}

}  // namespace

std::optional<HeadingRule> classify_heading(std::string_view raw, const ChunkerConfig& config) {
  const std::string_view line = text::trim(raw);
  if (line.empty()) return std::nullopt;
  if (is_numbered_heading(line)) return HeadingRule::kDottedNumeral;
  if (config.all_caps_headings && is_all_caps_heading(line, config.max_all_caps_heading_chars)) {
    return HeadingRule::kAllCaps;
  }
  return std::nullopt;
}

Segmentation segment_contract(std::string_view document, const ChunkerConfig& config,
                              std::string_view source_doc) {
  if (config.max_chunk_chars < 200) {
    throw Error(ErrorCode::kContractViolation, "max_chunk_chars must be at least 200");
  }
  Segmentation out;
  std::string label(kPreambleLabel);
  std::vector<std::string> paragraphs;
  std::string paragraph;

  auto end_paragraph = [&] {
    const std::string_view t = text::trim(paragraph);
    if (!t.empty()) paragraphs.emplace_back(t);
    paragraph.clear();
  };

  auto emit = [&](std::string body, bool single_paragraph) {
    ClauseChunk chunk;
    chunk.id = static_cast<RecordId>(out.chunks.size());
    chunk.clause_type = label;
    chunk.text = std::move(body);
    chunk.source_doc = std::string(source_doc);
    if (single_paragraph && chunk.text.size() > config.max_chunk_chars) {
      out.oversized.push_back(out.chunks.size());
    }
    out.chunks.push_back(std::move(chunk));
  };

  auto end_section = [&](bool had_heading) {
    end_paragraph();
    if (paragraphs.empty()) {
      if (had_heading) out.empty_sections.push_back(label);
      return;
    }
    std::string current;
    std::size_t in_current = 0;
    for (auto& p : paragraphs) {
      if (in_current == 0) {
        current = std::move(p);
        in_current = 1;
      } else if (current.size() + 2 + p.size() <= config.max_chunk_chars) {
        current += "\n\n";
        current += p;
        ++in_current;
      } else {
        emit(std::move(current), in_current == 1);
        current = std::move(p);
        in_current = 1;
      }
    }
    emit(std::move(current), in_current == 1);
    paragraphs.clear();
  };

  bool had_heading = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= document.size()) {
    std::size_t nl = document.find('\n', pos);
    if (nl == std::string_view::npos) nl = document.size();
    std::string_view line = document.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    pos = nl + 1;

    if (auto rule = classify_heading(line, config)) {
      end_section(had_heading);
      label = std::string(text::trim(line));
      had_heading = true;
      out.headings.push_back({line_no, label, *rule});
    } else if (text::trim(line).empty()) {
      end_paragraph();
    } else {
      if (!paragraph.empty()) paragraph.push_back('\n');
      paragraph.append(line);
    }
    if (nl == document.size()) break;
  }
  end_section(had_heading);
  return out;
}

std::string clause_embedding_text(const ClauseChunk& chunk, bool include_heading) {
  if (!include_heading || chunk.clause_type.empty()) return chunk.text;
  return chunk.clause_type + "\n" + chunk.text;
}

}  // namespace clausecheck
