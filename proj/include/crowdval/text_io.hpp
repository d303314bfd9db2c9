#pragma once

// Small text helpers shared by the CSV/JSON writers and readers.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace crowdval::io {

// Shortest round-trip decimal form of a double.
std::string format_number(double x);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Minimal CSV: comma separated, no quoting, blank lines skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index by name; throws ConfigError if absent.
    std::size_t column(std::string_view name) const;
    bool has_column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text, std::string_view source_name);
CsvTable read_csv(const std::filesystem::path& path);

double parse_double(std::string_view field, std::string_view what);
long long parse_integer(std::string_view field, std::string_view what);

}  // namespace crowdval::io
