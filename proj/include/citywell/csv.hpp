#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "citywell/error.hpp"

namespace citywell::csv {

// Deterministic float formatting shared by every CSV writer: shortest %.12g.
// Stage outputs are hash-compared for reproducibility, so formatting is pinned.
inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline bool needs_quotes(const std::string& f) {
    return f.find_first_of(",\"\n") != std::string::npos;
}

inline std::string quote(const std::string& f) {
    if (!needs_quotes(f)) return f;
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw InputError("cannot open for writing: " + path);
        path_ = path;
    }

    void row(const std::vector<std::string>& fields) {
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << quote(fields[i]);
        }
        out_ << '\n';
    }

    const std::string& path() const { return path_; }

private:
    std::ofstream out_;
    std::string path_;
};

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool in_quotes = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// Whole-file reader for the small tabular inputs (demographics, covid, bric...).
// First row is the header.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }

    int require_column(const std::string& name, const std::string& path = "table") const {
        int c = column(name);
        if (c < 0) throw InputError("missing column '" + name + "' in " + path);
        return c;
    }
};

inline Table read_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open CSV: " + path);
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (first) {
            t.header = std::move(fields);
            first = false;
        } else {
            t.rows.push_back(std::move(fields));
        }
    }
    if (first) throw InputError("empty CSV: " + path);
    return t;
}

inline double to_double(const std::string& s, const std::string& context = "field") {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError("bad numeric value '" + s + "' in " + context);
    }
}

}  // namespace citywell::csv
