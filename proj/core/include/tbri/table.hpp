// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace tbri {

using Cell = std::variant<double, std::string>;

/// Column-labelled numeric table with free-text header comments.
struct Table {
  std::vector<std::string> comments;  ///< written as "# ..." lines in CSV
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// 17 significant digits ("%.17g"); nan and inf spelled "nan", "inf", "-inf".
std::string format_double(double value);

std::string to_csv(const Table& table);
/// {"comments": [...], "columns": [...], "rows": [[...], ...]}; non-finite
/// numbers become strings.
std::string to_json(const Table& table);

struct ParsedCsv {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Throws LookupError for an unknown column.
  std::size_t column(const std::string& name) const;
};

ParsedCsv parse_csv(const std::string& text);
ParsedCsv read_csv(const std::filesystem::path& path);

/// Writes `content` verbatim; throws IoError with the path on failure.
void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace tbri
