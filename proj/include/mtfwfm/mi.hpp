#pragma once

#include "mtfwfm/model.hpp"
#include "mtfwfm/schema.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mtfwfm {

// Exact joint counts per (conversion type, field pair, feature combination,
// label). Sparse maps keyed by the packed feature pair; with an optional
// per-pair cap on distinct cells, pairs that blow past it are dropped from
// the analysis and flagged instead of eating memory.
struct PairCounts {
    std::unordered_map<uint64_t, std::array<int64_t, 2>> cells; // (i<<32|j) -> counts by label
    bool overflowed = false;
};

struct ContingencyCounts {
    uint32_t num_fields = 0;
    uint32_t num_types = 0;
    std::vector<int64_t> type_totals;                    // per type
    std::vector<std::array<int64_t, 2>> label_totals;    // per type, by label
    std::vector<std::vector<PairCounts>> pairs;          // [type][packed pair]
    size_t cell_cap = 0;                                 // 0 = unlimited

    static uint64_t cell_key(uint32_t i, uint32_t j) { return (uint64_t(i) << 32) | j; }
};

// Per-type symmetric matrix of mutual information between each field pair
// and the label. Diagonal is zero; overflowed pairs are NaN.
struct MiTable {
    uint32_t num_fields = 0;
    std::vector<bool> present;             // per type: had any samples
    std::vector<std::vector<double>> mi;   // [type][p * num_fields + q]

    double at(uint32_t type, uint32_t p, uint32_t q) const { return mi[type][size_t(p) * num_fields + q]; }
};

struct FieldPair {
    uint32_t p = 0;
    uint32_t q = 0;
    double value = 0.0;
};

// Single pass over the dataset. `num_types` must cover every conv_type seen.
ContingencyCounts count(std::span<const SparseInstance> dataset, const FieldSchema& schema,
                        uint32_t num_types, size_t cell_cap = 0);

// Plug-in estimate with natural log; empty cells contribute zero.
MiTable mutual_information(const ContingencyCounts& counts);

// Top pairs of one type by descending MI, ties broken by (p, q) order.
// Overflowed (NaN) pairs are skipped; k larger than the pair count returns
// every pair. Throws DataError for an absent type.
std::vector<FieldPair> top_k_pairs(const MiTable& mi, uint32_t type, size_t k);

// Pearson correlation between the strict upper triangles of a type's MI
// matrix and the magnitudes |r^t| of a multi-task model's pair weights.
double mi_pair_weight_correlation(const MiTable& mi, const ModelParams& params, uint32_t type);

struct HeatmapExport {
    std::vector<std::string> csv_files;
    std::vector<std::string> svg_files;
    std::vector<double> correlation_per_type; // NaN where undefined
};

// Writes, per present type, CSV matrices and SVG heatmaps of MI and |r^t|,
// plus a correlations.json. `params` must be the mt-fwfm kind over the same
// fields. Throws DataError if the directory is not writable.
HeatmapExport export_heatmaps(const MiTable& mi, const ModelParams& params,
                              const std::vector<std::string>& field_names,
                              const std::vector<std::string>& type_names, const std::string& dir);

// One CSV matrix (header row of field names, row labels first column, cells
// with six significant digits) and one self-contained SVG heatmap.
void write_matrix_csv(const std::vector<double>& matrix, const std::vector<std::string>& field_names,
                      const std::string& path);
void write_matrix_svg(const std::vector<double>& matrix, const std::vector<std::string>& field_names,
                      const std::string& title, const std::string& path);

} // namespace mtfwfm
