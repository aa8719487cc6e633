// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clausecheck::csv {

// Dialect: comma separated, double-quote quoting with "" escapes, quoted fields
// may span lines, header row required, UTF-8 (a leading BOM is dropped).

struct Row {
  std::size_t line = 0;  // 1-based line where the row starts
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Column position by name, ignoring case and surrounding whitespace.
  std::optional<std::size_t> column(std::string_view name) const;
};

/// Throws Error(kSchema) on an unterminated quote.
std::vector<Row> parse_rows(std::string_view data);
Table parse_table(std::string_view data);

std::string escape_field(std::string_view field);
std::string format_row(const std::vector<std::string>& fields);

}  // namespace clausecheck::csv
