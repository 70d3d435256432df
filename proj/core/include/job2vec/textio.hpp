#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace job2vec {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

std::vector<std::string_view> split_fields(std::string_view line, char sep);
std::string_view trim(std::string_view text);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written artifact.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer);

}  // namespace job2vec
