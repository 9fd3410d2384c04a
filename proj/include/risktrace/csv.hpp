#ifndef RISKTRACE_CSV_HPP
#define RISKTRACE_CSV_HPP

#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace risktrace {

/// Shortest decimal rendering with 9 significant digits ("%.9g"); the
/// fixed width used by every emitted CSV.
std::string format_double(double value);

/// One CSV line (no trailing newline). Fields containing commas, quotes,
/// or leading/trailing spaces are quoted; embedded newlines are rejected.
std::string csv_line(std::span<const std::string> fields);
std::string csv_line(std::initializer_list<std::string> fields);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Parse a CSV file written by csv_line (quoted fields supported, one
/// record per line). The first line is the header; every row must have
/// the header's width.
CsvTable read_csv(const std::filesystem::path& path);

/// Throws DomainError unless the table's header is exactly `expected`.
void require_columns(const CsvTable& table,
                     std::initializer_list<std::string_view> expected);

/// Write content to path atomically enough for our purposes: truncate and
/// write in one stream, throwing Error on any filesystem failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

} // namespace risktrace

#endif
