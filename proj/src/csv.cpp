#include "flowrank/csv.hpp"

#include <fstream>
#include <sstream>

#include "flowrank/common.hpp"

namespace flowrank::csv {

int Table::find_column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

std::vector<std::string> split_line(const std::string& line, const std::string& origin, std::size_t lineno) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw DataError(origin + ":" + std::to_string(lineno) + ": unterminated quote");
    fields.push_back(cur);
    return fields;
}

}  // namespace

Table read_stream(std::istream& in, const std::string& origin) {
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && t.header.empty()) continue;
        auto fields = split_line(line, origin, lineno);
        if (t.header.empty()) {
            t.header = std::move(fields);
        } else {
            if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
            if (fields.size() != t.header.size())
                throw DataError(origin + ":" + std::to_string(lineno) + ": expected " +
                                std::to_string(t.header.size()) + " fields, got " +
                                std::to_string(fields.size()));
            t.rows.push_back(std::move(fields));
        }
    }
    if (t.header.empty()) throw DataError(origin + ": empty file");
    return t;
}

Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    return read_stream(in, path);
}

std::string escape_field(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

void write_stream(std::ostream& out, const Table& table) {
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << escape_field(row[i]);
        }
        out << '\n';
    };
    emit_row(table.header);
    for (const auto& row : table.rows) emit_row(row);
}

void write_file(const std::string& path, const Table& table) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + path);
    write_stream(out, table);
    if (!out) throw DataError("write failure: " + path);
}

}  // namespace flowrank::csv
