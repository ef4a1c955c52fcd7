#pragma once

// Minimal strict CSV reader/writer. No quoting or embedded separators: every
// format this library reads or writes is plain comma-delimited numbers and
// identifiers, so anything fancier would only hide input errors.

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "stockload/core.hpp"

namespace stockload::csv {

struct Table {
    std::filesystem::path path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // all rows have header.size() cells

    // 1-based line number of data row i (header is line 1).
    std::size_t line_of_row(std::size_t i) const { return i + 2; }

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw DataError(path.string() + ": missing required column '" + std::string(name) + "'");
    }

    double number(std::size_t row, std::size_t col) const {
        return parse_double(rows[row][col],
                            path.string() + ":" + std::to_string(line_of_row(row)));
    }
};

inline std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view cell = (comma == std::string_view::npos)
                                    ? line.substr(start)
                                    : line.substr(start, comma - start);
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.remove_suffix(1);
        while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
        out.emplace_back(cell);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());
    Table t;
    t.path = path;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells = split_line(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected "
                            + std::to_string(t.header.size()) + " fields, got "
                            + std::to_string(cells.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty()) throw DataError(path.string() + ": empty file");
    return t;
}

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : path_(path), out_(path) {
        if (!out_) throw DataError("cannot open file for writing: " + path.string());
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    void close() {
        out_.close();
        if (!out_) throw DataError("failed writing file: " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

}  // namespace stockload::csv
