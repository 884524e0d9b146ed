// io.hpp — deterministic CSV emission
//
// Result tables are CSV with a '#' comment header block documenting the
// columns and echoing the resolved configuration. Floating-point cells use 17
// significant digits so identical configurations produce bit-identical files;
// complex values are written as separate real/imag columns.

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace qvr::io {

// shortest round-trip-safe decimal form (17 significant digits)
std::string format_double(double value);

std::string csv_join(const std::vector<std::string>& cells);

class CsvFile {
  public:
    explicit CsvFile(const std::filesystem::path& path);

    void comment(const std::string& text);
    void header(const std::vector<std::string>& names);
    // each row is flushed so partial sweeps survive interruption
    void row(const std::vector<std::string>& cells);

  private:
    std::ofstream out_;
};

} // namespace qvr::io
