#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Minimal CSV plumbing: '.' decimal separator (locale-independent via
// to_chars), '\n' line endings, mandatory header, no quoting (cells must not
// contain commas or newlines).

namespace sglab {

inline std::string csv_num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string csv_num(long v) { return std::to_string(v); }
inline std::string csv_num(std::size_t v) { return std::to_string(v); }
inline std::string csv_num(int v) { return std::to_string(v); }
inline std::string csv_flag(bool v) { return v ? "1" : "0"; }

class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) : width_(header.size()) {
        append_row(header);
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != width_)
            throw std::invalid_argument("csv row has " + std::to_string(cells.size()) +
                                        " cells, header has " + std::to_string(width_));
        append_row(cells);
    }

    const std::string& str() const { return out_; }

    void write_file(const std::string& path) const {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
        f << out_;
        if (!f) throw std::runtime_error("failed writing output file '" + path + "'");
    }

  private:
    std::size_t width_;
    std::string out_;

    void append_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto& c = cells[i];
            if (c.find(',') != std::string::npos || c.find('\n') != std::string::npos)
                throw std::invalid_argument("csv cell contains a separator: '" + c + "'");
            if (i) out_.push_back(',');
            out_ += c;
        }
        out_.push_back('\n');
    }
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return int(i);
        return -1;
    }
};

class CsvError : public std::runtime_error {
  public:
    CsvError(int line, const std::string& msg)
        : std::runtime_error("csv line " + std::to_string(line) + ": " + msg), line_(line) {}
    int line() const { return line_; }

  private:
    int line_;
};

inline CsvTable parse_csv_text(const std::string& text) {
    CsvTable t;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && pos >= text.size()) break;

        std::vector<std::string> cells;
        std::string cell;
        for (char c : line) {
            if (c == ',') {
                cells.push_back(std::move(cell));
                cell.clear();
            } else {
                cell.push_back(c);
            }
        }
        cells.push_back(std::move(cell));
        if (t.header.empty()) {
            t.header = std::move(cells);
            if (t.header.empty() || (t.header.size() == 1 && t.header[0].empty()))
                throw CsvError(lineno, "missing header row");
        } else {
            if (cells.size() != t.header.size())
                throw CsvError(lineno, "row has " + std::to_string(cells.size()) +
                                           " cells, header has " +
                                           std::to_string(t.header.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    if (t.header.empty()) throw CsvError(1, "empty csv");
    return t;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError(0, "cannot open csv file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv_text(ss.str());
}

}  // namespace sglab
