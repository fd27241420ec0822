#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace qc {

inline std::string fmt_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

// Comma-separated, header row, LF endings. Lines starting with '#' carry provenance.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    void comment(const std::string& text);
    void header(const std::vector<std::string>& cols);
    void row(const std::vector<std::string>& cells);
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream os_;
};

}  // namespace qc
