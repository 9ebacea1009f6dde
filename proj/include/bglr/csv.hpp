#pragma once

// Minimal RFC 4180 style CSV reading plus whole-file I/O helpers.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bglr::csv {

using Row = std::vector<std::string>;

/// Splits text into rows of cells. Double-quoted cells may contain commas,
/// newlines and doubled quotes. Blank lines are skipped; CRLF is accepted.
/// Throws ParseError on an unterminated quote.
std::vector<Row> parse(std::string_view text);

/// Cell as a finite double; ParseError(row, column) otherwise.
double to_number(const std::string& cell, std::size_t row, std::size_t column);

/// Quotes the cell when it contains a comma, quote or newline.
std::string escape(std::string_view cell);

/// std::runtime_error when the file cannot be read or written.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace bglr::csv
