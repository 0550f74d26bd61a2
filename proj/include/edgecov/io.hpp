#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "edgecov/covariance.hpp"
#include "edgecov/simgen.hpp"

// File formats: CSV for matrices and feature tables (header row, LF line
// endings, %.17g so values round-trip exactly), JSON for configs and results,
// binary PPM for heatmaps and trace plots. All writes go through a temp file
// and a rename so readers never see partial output.

namespace edgecov::io {

using covariance::Matrix;
using covariance::Partition;
using covariance::RhoParams;
using nlohmann::json;

const std::string& version();

void write_text_atomic(const std::string& path, const std::string& content);

// Matrix CSV with generated header names prefix0..prefixN-1.
void write_matrix_csv(const std::string& path, const Matrix& m,
                      const std::string& col_prefix = "c");

// Reads a matrix CSV; the first line is taken as a header. Malformed cells
// are errors here (use read_feature_table for tolerant parsing).
Matrix read_matrix_csv(const std::string& path);

struct FeatureTable {
    Matrix x;
    std::vector<std::string> columns;
    int rejected_rows = 0; // dropped for empty or non-numeric cells
};

// Header-first CSV of subject rows; rows with missing or unparseable cells
// are dropped and counted rather than failing the load.
FeatureTable read_feature_table(const std::string& path);

void save_json(const std::string& path, const json& j);
json load_json(const std::string& path);

json partition_json(const Partition& p);
Partition partition_from_json(const json& j);
json rho_json(const RhoParams& rho);
RhoParams rho_from_json(const json& j);
json ground_truth_json(const simgen::GroundTruth& gt);
simgen::GroundTruth ground_truth_from_json(const json& j);

// Sequential heatmap of a matrix, scaled to its own [min, max]; cell size is
// chosen so the image is at least ~480 pixels on each side.
void write_heatmap_ppm(const std::string& path, const Matrix& m);

// Diverging heatmap symmetric about zero (for difference matrices).
void write_diff_heatmap_ppm(const std::string& path, const Matrix& m);

// Line plot of a series on a white canvas.
void write_trace_ppm(const std::string& path, const std::vector<double>& series,
                     int width = 900, int height = 300);

} // namespace edgecov::io
