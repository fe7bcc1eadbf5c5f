#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gmwstn/scattering.hpp"

namespace gmwstn {

/// Where a feature came from: scattering layer, path (j_m, ..., j_1), time.
struct FeatureEntry {
    int layer = 0;
    std::vector<int> path;
    std::size_t time = 0;
};

/// Ordered list of the scattering blocks concatenated into a feature vector.
/// Block values keep the tensor's row-major (time, j_m, ..., j_1) order.
class FeatureLayout {
public:
    struct Block {
        int layer = 0;
        std::vector<std::size_t> shape;  // {time} for S_0, else (time, j_m, ..., j_1)
        std::size_t offset = 0;
        std::size_t size = 0;

        bool operator==(const Block&) const = default;
    };

    FeatureLayout() = default;
    /// Layout for the given layers of a network's outputs.
    FeatureLayout(const std::vector<std::vector<std::size_t>>& shapes, std::span<const int> layers);

    std::size_t size() const noexcept { return size_; }
    const std::vector<Block>& blocks() const noexcept { return blocks_; }
    const Block* find(int layer) const noexcept;
    FeatureEntry at(std::size_t position) const;

    bool operator==(const FeatureLayout&) const = default;

private:
    std::vector<Block> blocks_;
    std::size_t size_ = 0;
};

struct FeatureVector {
    std::vector<double> values;
    FeatureLayout layout;
};

/// Layers {0..depth} (cumulative) or {depth} alone.
std::vector<int> layers_for_depth(int depth, bool cumulative = true);

/// Concatenates the requested layers of a scattering output in ascending order.
FeatureVector flatten(const ScatteringOutput& out, std::span<const int> layers);

/// Shapes of a scattering output, in the form FeatureLayout expects.
std::vector<std::vector<std::size_t>> output_shapes(const ScatteringOutput& out);

enum class PcaSolver { Auto, Exact, Randomized };

struct PcaOptions {
    PcaSolver solver = PcaSolver::Auto;
    std::uint64_t seed = 0;
    std::size_t oversample = 10;
    std::size_t power_iterations = 2;
    /// Auto switches to the randomized solver once min(n, d) exceeds this.
    std::size_t exact_limit = 4000;
};

/// Mean, top-k principal directions (orthonormal rows), and singular values of
/// the centered data matrix in non-increasing order.
class PcaModel {
public:
    PcaModel() = default;
    PcaModel(Eigen::VectorXd mean, Eigen::MatrixXd components, Eigen::VectorXd singular_values);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
    std::size_t rank() const noexcept { return static_cast<std::size_t>(components_.rows()); }
    const Eigen::VectorXd& mean() const noexcept { return mean_; }
    const Eigen::MatrixXd& components() const noexcept { return components_; }
    const Eigen::VectorXd& singular_values() const noexcept { return singular_values_; }

    Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    Eigen::VectorXd invert(const Eigen::Ref<const Eigen::VectorXd>& z) const;
    /// Row-wise projection of a sample matrix [n × d] → [n × k].
    template <typename Scalar>
    Eigen::MatrixXd project_rows(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x) const;

    void save(const std::filesystem::path& path) const;
    static PcaModel load(const std::filesystem::path& path);

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd components_;  // [k × d]
    Eigen::VectorXd singular_values_;
};

/// Mean-centered truncated SVD of X [n × d]. Requires n ≥ 2 and k ≤ min(n, d).
/// Directions with numerically zero singular value are completed to an
/// orthonormal set orthogonal to the data.
template <typename Scalar>
PcaModel fit_pca(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x, std::size_t k,
                 const PcaOptions& options = {});

}  // namespace gmwstn
