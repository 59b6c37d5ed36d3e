#pragma once

// Minimal RFC 4180 CSV writer and reader. Numbers are written with 17
// significant digits in the C locale, lines end with LF.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "idyn/error.hpp"

namespace idyn::cli {

using CsvCell = std::variant<std::string, double, long long>;
using CsvRow = std::vector<CsvCell>;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string quote_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

inline std::string format_cell(const CsvCell& cell) {
    if (const auto* s = std::get_if<std::string>(&cell)) return quote_field(*s);
    if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
    return std::to_string(std::get<long long>(cell));
}

inline std::string to_csv(const std::vector<std::string>& header, const std::vector<CsvRow>& rows) {
    std::string out;
    auto line = [&out](const auto& cells, auto fmt) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += fmt(cells[i]);
        }
        out += '\n';
    };
    line(header, [](const std::string& s) { return quote_field(s); });
    for (const auto& r : rows) {
        if (r.size() != header.size())
            throw InputError("csv row has " + std::to_string(r.size()) + " cells, header has " +
                             std::to_string(header.size()));
        line(r, [](const CsvCell& c) { return format_cell(c); });
    }
    return out;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << text;
    f.flush();
    if (!f) throw IoError("write to '" + path + "' failed");
}

inline void emit_csv(const std::vector<std::string>& header, const std::vector<CsvRow>& rows, const std::string& path) {
    write_text(path, to_csv(header, rows));
}

/// Parse CSV text into string fields (header included as the first record).
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
            continue;
        }
        any = true;
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            record.push_back(std::move(field));
            field.clear();
            records.push_back(std::move(record));
            record.clear();
            any = false;
        } else {
            field += c;
        }
    }
    if (quoted) throw InputError("csv: unterminated quoted field");
    if (any) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

inline std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace idyn::cli
