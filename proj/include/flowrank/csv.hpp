#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flowrank::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index by header name, -1 if absent.
    int find_column(const std::string& name) const;
};

// Reads a UTF-8 comma-separated file with one header row. Handles CRLF and
// double-quoted fields with "" escapes.
Table read_file(const std::string& path);
Table read_stream(std::istream& in, const std::string& origin);

void write_file(const std::string& path, const Table& table);
void write_stream(std::ostream& out, const Table& table);

// Quotes the field only when it contains a comma, quote or newline.
std::string escape_field(const std::string& field);

}  // namespace flowrank::csv
