#include "gmwstn/significance.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "gmwstn/error.hpp"

namespace gmwstn {

double SignificanceMap::at(std::span<const std::size_t> index) const
{
    if (index.size() != shape.size()) throw ConfigError("SignificanceMap::at: wrong rank");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (index[i] >= shape[i]) throw ConfigError("SignificanceMap::at: index out of range");
        flat = flat * shape[i] + index[i];
    }
    return scores[flat];
}

SignificanceMap significance_scores(const Eigen::VectorXd& theta_row, const PcaModel& pca, const FeatureLayout& layout,
                                    int layer, std::string genre)
{
    if (static_cast<std::size_t>(theta_row.size()) != pca.rank())
        throw ConfigError("significance: coefficient vector has " + std::to_string(theta_row.size()) +
                          " entries, PCA has " + std::to_string(pca.rank()) + " components");
    if (pca.dim() != layout.size())
        throw ConfigError("significance: PCA dimension " + std::to_string(pca.dim()) + " does not match layout size " +
                          std::to_string(layout.size()));
    const auto* block = layout.find(layer);
    if (block == nullptr || layer < 1) throw ConfigError("significance: layout has no layer " + std::to_string(layer));

    SignificanceMap map;
    map.genre = std::move(genre);
    map.layer = layer;
    const auto& src_shape = block->shape;  // (t, j_m, ..., j_1)
    const std::size_t t_len = src_shape.front();
    const std::size_t paths = block->size / t_len;
    map.shape.assign(src_shape.begin() + 1, src_shape.end());
    map.shape.push_back(t_len);
    map.scores.assign(block->size, 0.0);

    const Eigen::VectorXd coeffs =
        pca.components().middleCols(static_cast<Eigen::Index>(block->offset), static_cast<Eigen::Index>(block->size))
            .transpose() *
        theta_row;
    double peak = 0.0;
    for (std::size_t t = 0; t < t_len; ++t)
        for (std::size_t p = 0; p < paths; ++p) {
            const double v = std::abs(coeffs[static_cast<Eigen::Index>(t * paths + p)]);
            map.scores[p * t_len + t] = v;
            peak = std::max(peak, v);
        }
    if (!(peak > 0.0) || !std::isfinite(peak)) {
        map.degenerate = true;
        std::fill(map.scores.begin(), map.scores.end(), 0.0);
        return map;
    }
    for (double& v : map.scores) v /= peak;
    return map;
}

HeatmapGrid export_heatmap(const SignificanceMap& map, double clamp_lo)
{
    if (map.shape.size() < 2) throw ConfigError("export_heatmap: map must have at least one scale axis");
    const std::size_t t_len = map.shape.back();
    const std::size_t j1 = map.shape[map.shape.size() - 2];
    const std::size_t cols = j1 * t_len;
    const std::size_t row_count = map.scores.size() / cols;

    HeatmapGrid grid;
    grid.cols = cols;
    grid.rows = row_count;
    grid.blocks = map.shape.size() >= 4 ? map.shape.front() : 1;
    grid.block_rows = row_count / grid.blocks;
    grid.values.resize(map.scores.size());
    // (j_m, ..., j_2) flatten to the row and (j_1, t) to the column, which is
    // exactly the map's own row-major order.
    for (std::size_t i = 0; i < map.scores.size(); ++i) grid.values[i] = std::max(map.scores[i], clamp_lo);
    return grid;
}

void write_heatmap_csv(const SignificanceMap& map, const HeatmapGrid& grid, std::ostream& out)
{
    const std::size_t t_len = map.shape.back();
    out << "block,row";
    for (std::size_t c = 0; c < grid.cols; ++c) out << ",j1_" << c / t_len << "_t" << c % t_len;
    out << '\n' << std::setprecision(8);
    for (std::size_t r = 0; r < grid.rows; ++r) {
        out << r / grid.block_rows << ',' << r % grid.block_rows;
        for (std::size_t c = 0; c < grid.cols; ++c) out << ',' << grid.at(r, c);
        out << '\n';
    }
}

}  // namespace gmwstn
