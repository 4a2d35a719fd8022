#pragma once

#include <string>
#include <vector>

namespace rrproc {

// Fixed 17-significant-digit decimal formatting so emitted tables diff cleanly
// and round-trip to the same double.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Writes header + rows; the byte stream depends only on the cell contents.
void write_csv(const std::string& path, const CsvTable& table);

}  // namespace rrproc
