#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Flat key=value configuration with [section] headers.
//
// Grammar (1-based line/column reporting):
//   - blank lines and lines whose first non-space character is '#' are skipped;
//     a '#' preceded by whitespace starts a trailing comment
//   - [name] opens a section; subsequent keys are stored as "name.key"
//   - key = value; keys match [A-Za-z0-9_.-]+, values are trimmed verbatim
//   - duplicate keys within one section are rejected

namespace sglab {

class ConfigError : public std::runtime_error {
  public:
    ConfigError(int line, int column, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + msg),
          line_(line),
          column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

  private:
    int line_;
    int column_;
};

class MissingKeyError : public std::invalid_argument {
  public:
    explicit MissingKeyError(const std::string& key)
        : std::invalid_argument("missing required config key '" + key + "'") {}
};

class Config {
  public:
    static Config parse_text(const std::string& text) {
        Config cfg;
        std::string section;
        int lineno = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t eol = text.find('\n', pos);
            std::string line = text.substr(pos, eol == std::string::npos ? eol : eol - pos);
            pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            parse_line(cfg, section, line, lineno);
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError(0, 0, "cannot open config file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_text(ss.str());
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    const std::string& get(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) throw MissingKeyError(key);
        return it->second;
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double number(const std::string& key) const { return to_number(key, get(key)); }
    double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }

    long integer(const std::string& key) const { return to_integer(key, get(key)); }
    long integer_or(const std::string& key, long fallback) const {
        return has(key) ? integer(key) : fallback;
    }

    bool flag_or(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string& v = get(key);
        if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
        if (v == "0" || v == "false" || v == "no" || v == "off") return false;
        throw std::invalid_argument("config key '" + key + "' is not a boolean: '" + v + "'");
    }

    // Comma- or space-separated lists.
    std::vector<std::string> list(const std::string& key) const {
        std::vector<std::string> out;
        std::string item;
        for (char c : get(key)) {
            if (c == ',' || c == ' ' || c == '\t') {
                if (!item.empty()) out.push_back(std::move(item)), item.clear();
            } else {
                item.push_back(c);
            }
        }
        if (!item.empty()) out.push_back(std::move(item));
        return out;
    }

    std::vector<double> number_list(const std::string& key) const {
        std::vector<double> out;
        for (const auto& s : list(key)) out.push_back(to_number(key, s));
        return out;
    }

    std::vector<long> integer_list(const std::string& key) const {
        std::vector<long> out;
        for (const auto& s : list(key)) out.push_back(to_integer(key, s));
        return out;
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

  private:
    std::map<std::string, std::string> values_;

    static bool key_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
    }

    static double to_number(const std::string& key, const std::string& v) {
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0')
            throw std::invalid_argument("config key '" + key + "' is not a number: '" + v + "'");
        return x;
    }

    static long to_integer(const std::string& key, const std::string& v) {
        char* end = nullptr;
        const long x = std::strtol(v.c_str(), &end, 10);
        if (end == v.c_str() || *end != '\0')
            throw std::invalid_argument("config key '" + key + "' is not an integer: '" + v +
                                        "'");
        return x;
    }

    static void parse_line(Config& cfg, std::string& section, const std::string& line,
                           int lineno) {
        std::size_t i = 0;
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        if (i == line.size() || line[i] == '#') return;

        // strip a trailing comment: '#' preceded by whitespace
        std::size_t limit = line.size();
        for (std::size_t j = i + 1; j < line.size(); ++j)
            if (line[j] == '#' && (line[j - 1] == ' ' || line[j - 1] == '\t')) {
                limit = j;
                break;
            }

        if (line[i] == '[') {
            std::size_t j = i + 1;
            std::string name;
            while (j < limit && key_char(line[j])) name.push_back(line[j++]);
            if (name.empty()) throw ConfigError(lineno, int(j) + 1, "empty section name");
            if (j >= limit || line[j] != ']')
                throw ConfigError(lineno, int(j) + 1, "expected ']' to close section header");
            ++j;
            while (j < limit && (line[j] == ' ' || line[j] == '\t')) ++j;
            if (j < limit)
                throw ConfigError(lineno, int(j) + 1, "unexpected text after section header");
            section = name;
            return;
        }

        std::size_t j = i;
        std::string key;
        while (j < limit && key_char(line[j])) key.push_back(line[j++]);
        if (key.empty())
            throw ConfigError(lineno, int(i) + 1, "expected a key or section header");
        while (j < limit && (line[j] == ' ' || line[j] == '\t')) ++j;
        if (j >= limit || line[j] != '=')
            throw ConfigError(lineno, int(j) + 1, "expected '=' after key '" + key + "'");
        ++j;
        while (j < limit && (line[j] == ' ' || line[j] == '\t')) ++j;
        std::size_t end = limit;
        while (end > j && (line[end - 1] == ' ' || line[end - 1] == '\t')) --end;
        const std::string value = line.substr(j, end - j);

        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.values_.count(full))
            throw ConfigError(lineno, int(i) + 1, "duplicate key '" + full + "'");
        cfg.values_[full] = value;
    }
};

}  // namespace sglab
