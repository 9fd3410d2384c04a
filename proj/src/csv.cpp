#include "risktrace/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "risktrace/errors.hpp"

namespace risktrace {

std::string format_double(double value) {
    value += 0.0; // collapse -0 to 0
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

namespace {

bool needs_quoting(const std::string& field) {
    if (field.empty()) return false;
    if (field.front() == ' ' || field.back() == ' ') return true;
    return field.find_first_of(",\"") != std::string::npos;
}

void append_field(std::string& out, const std::string& field) {
    if (field.find_first_of("\r\n") != std::string::npos) {
        throw DomainError("csv_line: newlines in fields are not supported");
    }
    if (!needs_quoting(field)) {
        out += field;
        return;
    }
    out += '"';
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
}

} // namespace

std::string csv_line(std::span<const std::string> fields) {
    std::string out;
    for (std::size_t n = 0; n < fields.size(); ++n) {
        if (n > 0) out += ',';
        append_field(out, fields[n]);
    }
    return out;
}

std::string csv_line(std::initializer_list<std::string> fields) {
    return csv_line(std::span<const std::string>(fields.begin(), fields.size()));
}

namespace {

std::vector<std::string> parse_record(const std::string& line,
                                      const std::filesystem::path& path) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    std::size_t n = 0;
    while (n < line.size()) {
        const char c = line[n];
        if (quoted) {
            if (c == '"') {
                if (n + 1 < line.size() && line[n + 1] == '"') {
                    cur += '"';
                    ++n;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            if (!cur.empty()) {
                throw Error("read_csv: stray quote in " + path.string());
            }
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
        ++n;
    }
    if (quoted) {
        throw Error("read_csv: unterminated quote in " + path.string());
    }
    fields.push_back(std::move(cur));
    return fields;
}

} // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("read_csv: cannot open " + path.string());
    }
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
        std::vector<std::string> fields = parse_record(line, path);
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != table.header.size()) {
                throw Error("read_csv: ragged row in " + path.string());
            }
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) {
        throw Error("read_csv: missing header in " + path.string());
    }
    return table;
}

void require_columns(const CsvTable& table,
                     std::initializer_list<std::string_view> expected) {
    bool match = table.header.size() == expected.size();
    if (match) {
        std::size_t n = 0;
        for (std::string_view name : expected) {
            match = match && table.header[n] == name;
            ++n;
        }
    }
    if (!match) {
        std::string want;
        for (std::string_view name : expected) {
            if (!want.empty()) want += ',';
            want += name;
        }
        std::string got;
        for (const std::string& name : table.header) {
            if (!got.empty()) got += ',';
            got += name;
        }
        throw DomainError("csv: expected columns [" + want + "], found [" + got + "]");
    }
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("write_text_file: cannot open " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
        throw Error("write_text_file: write failed for " + path.string());
    }
}

} // namespace risktrace
