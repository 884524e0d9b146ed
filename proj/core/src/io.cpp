#include "qvr/io.hpp"

#include <cstdio>
#include <stdexcept>

namespace qvr::io {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string csv_join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    return line;
}

CsvFile::CsvFile(const std::filesystem::path& path) : out_(path) {
    if (!out_) {
        throw std::runtime_error("CsvFile: cannot open " + path.string() + " for writing");
    }
}

void CsvFile::comment(const std::string& text) {
    out_ << "# " << text << '\n';
}

void CsvFile::header(const std::vector<std::string>& names) {
    out_ << csv_join(names) << '\n';
    out_.flush();
}

void CsvFile::row(const std::vector<std::string>& cells) {
    out_ << csv_join(cells) << '\n';
    out_.flush();
}

} // namespace qvr::io
