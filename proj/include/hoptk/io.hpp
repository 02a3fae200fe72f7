#pragma once

#include <string>
#include <vector>

#include "hoptk/matrix.hpp"
#include "hoptk/train.hpp"

namespace hoptk {

// CSV feature table: header row, float64 feature columns, optional
// trailing integer `label` column.
struct FeatureFile {
    Matrix X;
    std::vector<std::size_t> labels;  // empty when no label column
    std::vector<std::string> feature_names;

    bool labelled() const { return !labels.empty(); }
};

// Writes with 17 significant digits so a round-trip reproduces the
// matrix exactly.
void write_feature_csv(const std::string& path, const Matrix& X,
                       const std::vector<std::size_t>& labels = {});
FeatureFile read_feature_csv(const std::string& path);

// IDX (big-endian) image/label pair. Pixels map to p / 127.5 - 1.0 and
// images are flattened row-major. Throws std::runtime_error with the
// offending byte offset on bad magic or truncation.
FeatureFile read_idx(const std::string& images_path, const std::string& labels_path);
double idx_pixel_to_feature(unsigned char p);

// Per-column z-score; statistics come from `fit` (the training split)
// and are applied to every matrix passed through `apply`. Columns with
// zero variance pass through unscaled (centered only).
struct ZScore {
    std::vector<double> mean;
    std::vector<double> stddev;

    static ZScore fit(const Matrix& X);
    Matrix apply(const Matrix& X) const;
};

// Line-delimited run records with stable field names; duration fields
// are the only timing-dependent content.
std::string run_record_to_json(const RunRecord& rec, const std::string& condition);
RunRecord run_record_from_json(const std::string& line, std::string* condition = nullptr);

void append_line(const std::string& path, const std::string& line);
std::vector<std::string> read_lines(const std::string& path);

}  // namespace hoptk
