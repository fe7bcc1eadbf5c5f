#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gmwstn/filters.hpp"

namespace gmwstn {

enum class Contraction : unsigned char { Modulus = 0 };

struct LayerConfig {
    double quality = 1.0;
    int j_max = 0;
    std::size_t subsample = 8;           // r_m
    std::size_t average_subsample = 32;  // r'_m
};

struct ScatteringConfig {
    WaveletFamily family = WaveletFamily::Gmw;
    GmwParams gmw{};
    std::vector<LayerConfig> layers;  // M = layers.size(), 1..3
    std::size_t average_subsample0 = 32;  // r'_0
    double peak_fraction = 0.875;
    Contraction contraction = Contraction::Modulus;
    /// Zero out paths whose child filter peaks at or above its parent's frequency.
    bool prune_increasing = false;

    /// Three layers, (Q) = (8, 4, 4), (J) = (32, 13, 9), r = 8, r' = 32, GMW(4, 2).
    static ScatteringConfig defaults(WaveletFamily family = WaveletFamily::Gmw);

    void validate() const;
    std::size_t num_layers() const noexcept { return layers.size(); }
    /// ∏_{i ≤ m} (J_i + 1).
    std::size_t num_paths(std::size_t m) const;
};

/// Dense row-major tensor.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    std::size_t size() const noexcept { return data.size(); }
};

/// S_0 plus S_1..S_M. Layer m is shaped (time, j_m, j_{m-1}, ..., j_1).
struct ScatteringOutput {
    std::vector<double> layer0;
    std::vector<Tensor> layers;
    ScatteringConfig config;
    std::size_t input_len = 0;
};

/// ceil(n / r)
constexpr std::size_t subsampled_length(std::size_t n, std::size_t r) { return (n + r - 1) / r; }

/// Circular convolution realised as IDFT(DFT(x) ⊙ filter).
CVector analytic_conv(std::span<const double> signal, std::span<const double> filter_row);
CVector analytic_conv(std::span<const cplx> signal, std::span<const double> filter_row);

/// Pointwise modulus.
std::vector<double> contraction(std::span<const cplx> x);

/// Keeps x[0], x[r], x[2r], ...; r = 1 is the identity.
template <typename T>
std::vector<T> subsample(std::span<const T> x, std::size_t r);

/// U_m: for every scale j, subsample(|x ∗ ψ_j|, r).
std::vector<std::vector<double>> layer_u(std::span<const double> input, const FilterBank& bank,
                                         std::size_t r);

/// S_m: lowpass smoothing then subsampling by r'.
std::vector<double> layer_s(std::span<const double> u, std::span<const double> lowpass,
                            std::size_t r_prime);

/// A scattering network for one input length. Filter banks for every layer
/// are built once; scatter() is const and safe to call from several threads.
class ScatteringNetwork {
public:
    ScatteringNetwork(ScatteringConfig config, std::size_t input_len);

    const ScatteringConfig& config() const noexcept { return config_; }
    std::size_t input_len() const noexcept { return input_len_; }
    const FilterBank& bank(std::size_t m) const { return banks_.at(m); }
    std::size_t num_layers() const noexcept { return banks_.size(); }

    /// Output shapes: index 0 is {len(S_0)}, index m is layer m's tensor shape.
    std::vector<std::vector<std::size_t>> output_shapes() const;

    ScatteringOutput scatter(std::span<const double> signal) const;

private:
    ScatteringConfig config_;
    std::size_t input_len_;
    std::vector<FilterBank> banks_;           // layer m uses banks_[m-1]
    std::vector<std::vector<double>> lowpass_;  // [0] for S_0, [m] for S_m
    std::vector<std::size_t> u_lengths_;      // u_lengths_[m] = length of U_m outputs (m ≥ 1)
};

ScatteringOutput scatter(std::span<const double> signal, const ScatteringConfig& config);

}  // namespace gmwstn
