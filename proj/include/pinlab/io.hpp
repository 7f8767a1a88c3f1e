#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace pinlab::io {

using Json = nlohmann::json;

using Cell = std::variant<double, std::int64_t, std::string, bool>;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
};

// %.17g for reals; nan, inf and -inf spelled out.
std::string format_double(double v);
// RFC-4180: fields holding a comma, quote, CR or LF are quoted, with inner
// quotes doubled. Records end with CRLF.
std::string quote_csv(const std::string& field);
std::string to_csv(const Table& t);
// Parses the output of to_csv back into strings (header first).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

// Table as an array of objects keyed by column name.
Json to_json(const Table& t);
// Two-space indented, keys sorted, trailing newline.
std::string dump_json(const Json& j);

// Writes to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);

} // namespace pinlab::io
