#include "bvwave/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bvwave::csv {

std::string format(scalar_t x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write(const std::string& path, const std::vector<std::string>& header, const matrix_t& data) {
    if (data.size() > 0 && static_cast<index_t>(header.size()) != data.cols())
        throw std::invalid_argument("csv: header/column mismatch for " + path);

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("csv: cannot open " + tmp);
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j) out << ',';
            out << header[j];
        }
        out << '\n';
        for (index_t i = 0; i < data.rows(); ++i) {
            for (index_t j = 0; j < data.cols(); ++j) {
                if (j) out << ',';
                out << format(data(i, j));
            }
            out << '\n';
        }
        if (!out) throw std::runtime_error("csv: write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("csv: rename failed for " + path);
}

Table read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("csv: cannot open " + path);

    Table table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: empty file " + path);
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) table.header.push_back(cell);
    }
    std::vector<std::vector<scalar_t>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<scalar_t> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        if (row.size() != table.header.size())
            throw std::runtime_error("csv: ragged row in " + path);
        rows.push_back(std::move(row));
    }
    table.data.resize(static_cast<index_t>(rows.size()), static_cast<index_t>(table.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            table.data(static_cast<index_t>(i), static_cast<index_t>(j)) = rows[i][j];
    return table;
}

}  // namespace bvwave::csv
