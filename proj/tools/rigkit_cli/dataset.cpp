#include "rigkit_cli/dataset.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rigkit::cli {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = strip(s);
    if (t.empty()) {
        return false;
    }
    errno = 0;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && errno == 0 && std::isfinite(out);
}

std::size_t resolve_column(const std::vector<std::string>& names, const std::string& spec,
                           const std::string& path) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == spec) {
            return i;
        }
    }
    // Fall back to a 0-based index.
    char* end = nullptr;
    const long idx = std::strtol(spec.c_str(), &end, 10);
    if (end == spec.c_str() + spec.size() && idx >= 0 &&
        static_cast<std::size_t>(idx) < names.size()) {
        return static_cast<std::size_t>(idx);
    }
    std::string available;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0) {
            available += ", ";
        }
        available += names[i];
    }
    throw std::runtime_error("column '" + spec + "' not found in " + path +
                             "; available columns: " + available);
}

}  // namespace

Dataset ingest(const std::string& path, const std::string& value_column,
               const std::optional<std::string>& weight_column) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open input file: " + path);
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("empty input file: " + path);
    }

    Dataset ds;
    ds.source_path = path;
    for (const std::string& name : split_csv_line(line)) {
        ds.column_names.push_back(strip(name));
    }

    const std::size_t vcol = resolve_column(ds.column_names, value_column, path);
    std::optional<std::size_t> wcol;
    if (weight_column) {
        wcol = resolve_column(ds.column_names, *weight_column, path);
        ds.weights.emplace();
    }

    while (std::getline(in, line)) {
        if (strip(line).empty()) {
            continue;
        }
        const std::vector<std::string> fields = split_csv_line(line);
        double value = 0.0;
        if (vcol >= fields.size() || !parse_double(fields[vcol], value) || !(value > 0.0)) {
            ++ds.rejected_rows;  // support is (0, inf); nonpositive rows are dropped
            continue;
        }
        double weight = 1.0;
        if (wcol) {
            if (*wcol >= fields.size() || !parse_double(fields[*wcol], weight) ||
                !(weight >= 0.0)) {
                ++ds.rejected_rows;
                continue;
            }
        }
        ds.values.push_back(value);
        if (ds.weights) {
            ds.weights->push_back(weight);
        }
    }

    if (ds.values.empty()) {
        throw std::runtime_error("no valid rows in " + path + " (rejected " +
                                 std::to_string(ds.rejected_rows) + ")");
    }
    return ds;
}

}  // namespace rigkit::cli
