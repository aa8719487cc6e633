// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "clausecheck/csv.hpp"

#include "clausecheck/error.hpp"
#include "clausecheck/text.hpp"

namespace clausecheck::csv {

std::optional<std::size_t> Table::column(std::string_view name) const {
  const std::string want = text::to_lower_ascii(text::trim(name));
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (text::to_lower_ascii(text::trim(header[i])) == want) return i;
  }
  return std::nullopt;
}

std::vector<Row> parse_rows(std::string_view data) {
  if (data.substr(0, 3) == "\xEF\xBB\xBF") data.remove_prefix(3);

  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool row_has_content = false;
  std::size_t line = 1;
  std::size_t quote_line = 0;
  row.line = 1;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    // A physically empty line is not a record.
    if (row_has_content || row.fields.size() > 1 || !row.fields.front().empty()) {
      rows.push_back(std::move(row));
    }
    row = Row{};
    row.line = line;
    row_has_content = false;
  };

  for (std::size_t i = 0; i < data.size(); ++i) {
    const char c = data[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_has_content = true;
        quote_line = line;
        break;
      case ',':
        end_field();
        row_has_content = true;
        break;
      case '\r':
        if (i + 1 < data.size() && data[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        ++line;
        end_row();
        break;
      default:
        field.push_back(c);
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::kSchema,
                "unterminated quoted field starting on line " + std::to_string(quote_line));
  }
  if (!field.empty() || row_has_content || !row.fields.empty()) end_row();
  return rows;
}

Table parse_table(std::string_view data) {
  auto rows = parse_rows(data);
  Table t;
  if (rows.empty()) return t;
  t.header = std::move(rows.front().fields);
  t.rows.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
  return t;
}

std::string escape_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape_field(fields[i]);
  }
  out.push_back('\n');
  return out;
}

}  // namespace clausecheck::csv
