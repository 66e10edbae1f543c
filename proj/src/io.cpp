#include "lrdetect/io.hpp"

#include "lrdetect/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace lrdetect {

std::string format_double(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), result.ptr);
}

double parse_double(const std::string& text, const std::string& context) {
    std::string trimmed = text;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) {
        trimmed.pop_back();
    }
    std::size_t lead = 0;
    while (lead < trimmed.size() && std::isspace(static_cast<unsigned char>(trimmed[lead]))) {
        ++lead;
    }
    trimmed = trimmed.substr(lead);
    if (trimmed == "nan") {
        return std::nan("");
    }
    if (trimmed == "inf") {
        return HUGE_VAL;
    }
    if (trimmed == "-inf") {
        return -HUGE_VAL;
    }
    double value = 0.0;
    const char* first = trimmed.data();
    const char* last = first + trimmed.size();
    if (!trimmed.empty() && *first == '+') {
        ++first;
    }
    const auto result = std::from_chars(first, last, value);
    if (trimmed.empty() || result.ec != std::errc() || result.ptr != last) {
        throw FormatError(context + ": not a number: '" + text + "'");
    }
    return value;
}

std::uint64_t parse_u64(const std::string& text, const std::string& context) {
    std::uint64_t value = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto result = std::from_chars(first, last, value);
    if (text.empty() || result.ec != std::errc() || result.ptr != last) {
        throw FormatError(context + ": not a non-negative integer: '" + text + "'");
    }
    return value;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw IoError("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot replace " + path.string());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
    if (auto it = index_.find(key); it != index_.end()) {
        entries_[it->second].second = value;
        return;
    }
    index_.emplace(key, entries_.size());
    entries_.emplace_back(key, value);
}

bool KeyValueFile::contains(const std::string& key) const {
    return index_.count(key) > 0;
}

std::optional<std::string> KeyValueFile::find(const std::string& key) const {
    if (auto it = index_.find(key); it != index_.end()) {
        return entries_[it->second].second;
    }
    return std::nullopt;
}

const std::string& KeyValueFile::at(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) {
        throw FormatError((source_.empty() ? std::string("key=value file") : source_) + ": missing key '" + key +
                          "'");
    }
    return entries_[it->second].second;
}

std::string KeyValueFile::render() const {
    std::string out;
    for (const auto& [key, value] : entries_) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    }
    return out;
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& source) {
    KeyValueFile file;
    file.source_ = source;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') {
            continue;
        }
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError(source + ": line " + std::to_string(row) + " is not key=value");
        }
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw FormatError(source + ": line " + std::to_string(row) + " has an empty key");
        }
        if (!section.empty()) {
            key = section + "." + key;
        }
        file.set(key, trim(line.substr(eq + 1)));
    }
    return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
    return parse(read_file(path), path.string());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

} // namespace

CsvSeries read_series_csv(const std::filesystem::path& path) {
    const std::string name = path.string();
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError(name + ": empty file, expected header t,value[,label]");
    }
    const auto header = split_csv_line(trim(line));
    int t_col = -1;
    int v_col = -1;
    int l_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "t") {
            t_col = static_cast<int>(i);
        } else if (header[i] == "value") {
            v_col = static_cast<int>(i);
        } else if (header[i] == "label") {
            l_col = static_cast<int>(i);
        }
    }
    if (t_col < 0) {
        throw FormatError(name + ": missing column 't'");
    }
    if (v_col < 0) {
        throw FormatError(name + ": missing column 'value'");
    }

    CsvSeries out;
    std::vector<std::uint8_t> labels;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        const auto where = name + " row " + std::to_string(row);
        const auto needed = static_cast<std::size_t>(std::max({t_col, v_col, l_col})) + 1;
        if (fields.size() < needed) {
            throw FormatError(where + ": expected " + std::to_string(needed) + " columns, got " +
                              std::to_string(fields.size()));
        }
        const double t = parse_double(fields[static_cast<std::size_t>(t_col)], where + " column 't'");
        const double v = parse_double(fields[static_cast<std::size_t>(v_col)], where + " column 'value'");
        if (!std::isfinite(t) || !std::isfinite(v)) {
            throw FormatError(where + ": non-finite entry");
        }
        auto& times = out.series.times;
        if (!times.empty()) {
            const double step = t - times.back();
            if (!(step > 0.0)) {
                throw FormatError(where + ": duplicate or decreasing timestamp " + fields[static_cast<std::size_t>(t_col)]);
            }
            if (times.size() >= 2) {
                const double period = times[1] - times[0];
                if (std::abs(step - period) > 1e-9 * std::max(1.0, std::abs(period))) {
                    throw FormatError(where + ": timestamp gap (step " + format_double(step) + ", expected " +
                                      format_double(period) + ")");
                }
            }
        }
        times.push_back(t);
        out.series.values.push_back(v);
        if (l_col >= 0) {
            const std::string& lab = fields[static_cast<std::size_t>(l_col)];
            if (lab != "0" && lab != "1") {
                throw FormatError(where + " column 'label': expected 0 or 1, got '" + lab + "'");
            }
            labels.push_back(lab == "1" ? 1 : 0);
        }
    }
    if (out.series.times.empty()) {
        throw FormatError(name + ": no data rows");
    }
    out.series.sample_period = out.series.times.size() >= 2 ? out.series.times[1] - out.series.times[0] : 1.0;
    if (l_col >= 0) {
        out.labels = std::move(labels);
    }
    return out;
}

std::string render_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size()) {
        throw LengthMismatchError("CSV header has " + std::to_string(header.size()) + " names for " +
                                  std::to_string(columns.size()) + " columns");
    }
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        out += (i ? "," : "") + header[i];
    }
    out += '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns) {
        if (c.size() != rows) {
            throw LengthMismatchError("CSV columns differ in length");
        }
    }
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) {
                out += ',';
            }
            out += format_double(columns[i][r]);
        }
        out += '\n';
    }
    return out;
}

} // namespace lrdetect
