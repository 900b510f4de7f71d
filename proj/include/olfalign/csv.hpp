#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace olfalign::csv {

/// A parsed CSV document. Blank lines are skipped; `line_numbers[i]` is the
/// 1-based source line where `rows[i]` starts.
struct Document {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

/// RFC 4180 subset: comma separated, optional double quotes, CRLF or LF,
/// optional UTF-8 BOM. Throws SchemaError on unbalanced quotes or on a
/// missing header.
Document parse(std::string_view text, std::string source = "<memory>");
Document read_file(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// Strict decimal parse ('.' separator, surrounding blanks allowed).
/// Returns nullopt on anything that is not a complete number.
std::optional<double> parse_double(std::string_view text);

/// Shortest representation that round-trips exactly.
std::string format_double(double value);

/// Quotes a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string_view trim(std::string_view text);

}  // namespace olfalign::csv
