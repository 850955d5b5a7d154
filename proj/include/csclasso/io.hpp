#pragma once

#include "csclasso/datagen.hpp"
#include "csclasso/types.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace csclasso {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownTargetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyGroupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CsvLoadReport {
    std::vector<std::string> predictor_columns;  // kept, in design-matrix order
    std::vector<std::string> dropped_columns;    // had missing cells
    std::string target;
    Eigen::Index rows = 0;
};

/// Reads a UTF-8 comma-separated file with a header row. Empty cells mark
/// missing values; any predictor column containing one is dropped (and
/// reported). The intercept column is prepended. When group_spec_path is
/// nonempty, it names a JSON document
///   {"groups": [{"name": ..., "rows": [0-based indexes...]}, ...]}
/// whose (possibly overlapping) row sets become the dataset's groups.
GroupedDataset load_csv_dataset(const std::string& csv_path, const std::string& target_column,
                                const std::string& group_spec_path = "",
                                CsvLoadReport* report = nullptr);

/// Writers for the interchange formats.
std::string stats_to_json(const StandardizationStats& stats);
StandardizationStats stats_from_json(const std::string& text);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

/// FNV-1a digest of a file's bytes, hex-encoded (used by run manifests).
std::string file_digest(const std::string& path);

}  // namespace csclasso
