#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "darnn/core/error.hpp"

namespace darnn {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::map<std::string, std::size_t> columns;

    std::size_t column(const std::string& name, const std::string& file) const {
        auto it = columns.find(name);
        if (it == columns.end())
            throw SchemaError("CSV " + file + " is missing column '" + name + "'");
        return it->second;
    }
};

/// Minimal CSV reader: comma-separated, no quoting, first row is the header.
inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open CSV file: " + path);
    CsvTable t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (true) {
            const auto pos = s.find(',', start);
            std::string cell = pos == std::string::npos ? s.substr(start)
                                                        : s.substr(start, pos - start);
            if (!cell.empty() && cell.back() == '\r') cell.pop_back();
            out.push_back(std::move(cell));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        return out;
    };
    if (!std::getline(in, line)) throw SchemaError("empty CSV file: " + path);
    t.header = split(line);
    for (std::size_t i = 0; i < t.header.size(); ++i) t.columns[t.header[i]] = i;
    std::size_t rowno = 1;
    while (std::getline(in, line)) {
        ++rowno;
        if (line.empty() || line == "\r") continue;
        auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw SchemaError("CSV " + path + " row " + std::to_string(rowno) + " has " +
                              std::to_string(cells.size()) + " cells, header has " +
                              std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

/// Parses a cell as double; empty and "nan" cells are reported as missing.
inline bool parse_cell(const std::string& cell, double* out) {
    if (cell.empty() || cell == "nan" || cell == "NaN") return false;
    std::size_t used = 0;
    try {
        *out = std::stod(cell, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == cell.size();
}

}  // namespace darnn
