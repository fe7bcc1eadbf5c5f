#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmwstn/features.hpp"

namespace gmwstn {

/// Normalized |componentsᵀ·θ| on one scattering layer, reordered to
/// (j_m, ..., j_1, time) row-major. Max entry is 1 unless degenerate.
struct SignificanceMap {
    std::string genre;
    int layer = 3;
    std::vector<std::size_t> shape;  // (j_m, ..., j_1, time)
    std::vector<double> scores;
    bool degenerate = false;

    double at(std::span<const std::size_t> index) const;
};

SignificanceMap significance_scores(const Eigen::VectorXd& theta_row, const PcaModel& pca, const FeatureLayout& layout,
                                    int layer = 3, std::string genre = {});

/// Heatmap grid: one block per outermost index (j_m), stacked vertically.
/// Within a block, rows are j_{m−1}, columns are j_1-major groups of time
/// samples ((j_1, t) → j_1·T + t). Layers 1 and 2 collapse to a single block.
struct HeatmapGrid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t block_rows = 0;
    std::size_t blocks = 0;
    std::vector<double> values;  // row-major [rows × cols]

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

HeatmapGrid export_heatmap(const SignificanceMap& map, double clamp_lo = 0.4);

/// CSV with a header naming the grid axes; first two columns are the block
/// and row indices.
void write_heatmap_csv(const SignificanceMap& map, const HeatmapGrid& grid, std::ostream& out);

}  // namespace gmwstn
