#pragma once

// Text formats: shortest round-trip number formatting, key=value files,
// CSV series ingestion and atomic file replacement.

#include "lrdetect/time_series.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lrdetect {

/// Shortest decimal text that parses back to exactly `value`. Non-finite
/// values print as "nan", "inf", "-inf".
std::string format_double(double value);

/// Parses a double from the whole of `text`; throws FormatError naming
/// `context` otherwise. Accepts "nan", "inf", "-inf".
double parse_double(const std::string& text, const std::string& context);

std::uint64_t parse_u64(const std::string& text, const std::string& context);

/// Writes `content` to a temporary file next to `path` and renames it over
/// `path`. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// Ordered key=value document. Lines starting with '#' or ';' and blank lines
/// are ignored on read; "[section]" headers prefix following keys with
/// "section.".
class KeyValueFile {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value) { set(key, format_double(value)); }
    void set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }
    void set(const std::string& key, int value) { set(key, std::to_string(value)); }
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }

    bool contains(const std::string& key) const;
    std::optional<std::string> find(const std::string& key) const;
    /// Throws FormatError naming `source` when the key is absent.
    const std::string& at(const std::string& key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

    std::string render() const;
    static KeyValueFile parse(const std::string& text, const std::string& source);
    static KeyValueFile load(const std::filesystem::path& path);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t> index_;
    std::string source_;
};

struct CsvSeries {
    TimeSeries series;
    std::optional<std::vector<std::uint8_t>> labels;
};

/// Reads a CSV with header `t,value[,label]` (column order free, extra columns
/// ignored). Timestamps must be strictly increasing with a constant step; a
/// gap or duplicate is a FormatError naming the file and row number.
CsvSeries read_series_csv(const std::filesystem::path& path);

/// Writes columns from equally long arrays, header first.
std::string render_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns);

} // namespace lrdetect
