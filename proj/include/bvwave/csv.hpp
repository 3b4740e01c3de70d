#pragma once

#include <string>
#include <vector>

#include "bvwave/types.hpp"

namespace bvwave::csv {

/// Write a table as CSV: header row, comma separator, LF line endings,
/// values formatted with 17 significant digits so doubles round-trip
/// bit-exactly. The file is written to a temporary and renamed into place.
void write(const std::string& path, const std::vector<std::string>& header, const matrix_t& data);

struct Table {
    std::vector<std::string> header;
    matrix_t data;
};

Table read(const std::string& path);

/// Canonical scalar formatting used by write().
std::string format(scalar_t x);

}  // namespace bvwave::csv
