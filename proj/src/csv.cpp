#include "quasicrit/csv.hpp"

#include "quasicrit/errors.hpp"

namespace qc {

CsvWriter::CsvWriter(const std::string& path) : path_(path), os_(path, std::ios::binary) {
    if (!os_) throw ParameterError("cannot open output file: " + path);
}

void CsvWriter::comment(const std::string& text) { os_ << "# " << text << '\n'; }

void CsvWriter::header(const std::vector<std::string>& cols) { row(cols); }

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os_ << ',';
        os_ << cells[i];
    }
    os_ << '\n';
}

}  // namespace qc
