#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dephasim/errors.hpp"

namespace dephasim {

/// All numeric output carries 17 significant digits (lossless double round trip).
inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// CSV with '#'-prefixed metadata comment lines, then a header row, then data.
class CsvWriter {
  public:
    void meta(const std::string& key, const std::string& value) {
        out_ << "# " << key << "=" << value << "\n";
    }
    void meta(const std::string& key, double value) { meta(key, format_number(value)); }
    void meta(const std::string& key, std::size_t value) { meta(key, std::to_string(value)); }

    void header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
        out_ << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

    void row_numbers(const std::vector<double>& xs) {
        for (std::size_t i = 0; i < xs.size(); ++i) out_ << (i ? "," : "") << format_number(xs[i]);
        out_ << "\n";
    }

    std::string str() const { return out_.str(); }

    void write_file(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open for writing: " + path);
        f << out_.str();
    }

  private:
    std::ostringstream out_;
};

/// Parsed CSV: metadata, column names, and string cells (parsed to numbers on
/// demand).
struct CsvFile {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw SchemaMismatch("missing column: " + name);
    }

    std::vector<double> numeric_column(const std::string& name) const {
        const std::size_t c = column_index(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) {
            double x = 0.0;
            const std::string& cell = r.at(c);
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
            if (ec != std::errc{} || p != cell.data() + cell.size())
                throw SchemaMismatch("non-numeric cell in column " + name + ": '" + cell + "'");
            out.push_back(x);
        }
        return out;
    }

    static CsvFile parse(std::istream& in) {
        CsvFile f;
        std::string line;
        bool have_header = false;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (line[0] == '#') {
                std::string_view v(line);
                v.remove_prefix(1);
                while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
                const auto eq = v.find('=');
                if (eq != std::string_view::npos)
                    f.metadata.emplace_back(std::string(v.substr(0, eq)), std::string(v.substr(eq + 1)));
                continue;
            }
            std::vector<std::string> cells;
            std::size_t start = 0;
            for (std::size_t i = 0; i <= line.size(); ++i) {
                if (i == line.size() || line[i] == ',') {
                    cells.push_back(line.substr(start, i - start));
                    start = i + 1;
                }
            }
            if (!have_header) {
                f.columns = std::move(cells);
                have_header = true;
            } else {
                f.rows.push_back(std::move(cells));
            }
        }
        return f;
    }

    static CsvFile read_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open: " + path);
        return parse(in);
    }

    std::string meta_value(const std::string& key) const {
        for (const auto& [k, v] : metadata)
            if (k == key) return v;
        throw SchemaMismatch("missing metadata key: " + key);
    }
};

} // namespace dephasim
