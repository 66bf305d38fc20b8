#pragma once

#include <optional>
#include <string>
#include <vector>

namespace rigkit::cli {

// Parsed input data: strictly positive values, optional nonnegative weights.
struct Dataset {
    std::vector<double> values;
    std::optional<std::vector<double>> weights;  // verbatim, never normalized
    std::string source_path;
    std::vector<std::string> column_names;
    std::size_t rejected_rows = 0;  // nonpositive, unparseable, or negative-weight rows
};

// Reads a comma-delimited UTF-8 text file with a header row and "." decimal
// marks.  Columns are matched by name; a column spec that is not a header
// name but parses as a nonnegative integer is treated as a 0-based index.
// Throws std::runtime_error for missing files/columns or zero valid rows.
Dataset ingest(const std::string& path, const std::string& value_column,
               const std::optional<std::string>& weight_column);

}  // namespace rigkit::cli
