#include "gmwstn/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gmwstn/error.hpp"

namespace gmwstn {

ScatteringConfig ScatteringConfig::defaults(WaveletFamily family)
{
    ScatteringConfig cfg;
    cfg.family = family;
    cfg.layers = {{8.0, 32, 8, 32}, {4.0, 13, 8, 32}, {4.0, 9, 8, 32}};
    return cfg;
}

void ScatteringConfig::validate() const
{
    if (layers.empty() || layers.size() > 3)
        throw ConfigError("number of scattering layers must be in 1..3, got " + std::to_string(layers.size()));
    if (average_subsample0 < 1) throw ConfigError("averaging subsampling rate r'_0 must be >= 1");
    if (!(peak_fraction > 0.0 && peak_fraction <= 1.0)) throw ConfigError("peak fraction must lie in (0, 1]");
    for (std::size_t m = 0; m < layers.size(); ++m) {
        const auto& l = layers[m];
        const std::string where = "layer " + std::to_string(m + 1) + ": ";
        if (!(l.quality > 0.0) || !std::isfinite(l.quality)) throw ConfigError(where + "Q must be > 0");
        if (l.j_max < 0) throw ConfigError(where + "J must be >= 0");
        if (l.subsample < 1) throw ConfigError(where + "subsampling rate must be >= 1");
        if (l.average_subsample < 1) throw ConfigError(where + "averaging subsampling rate must be >= 1");
    }
}

std::size_t ScatteringConfig::num_paths(std::size_t m) const
{
    std::size_t count = 1;
    for (std::size_t i = 0; i < m && i < layers.size(); ++i)
        count *= static_cast<std::size_t>(layers[i].j_max) + 1;
    return count;
}

CVector analytic_conv(std::span<const double> signal, std::span<const double> filter_row)
{
    if (signal.size() != filter_row.size())
        throw ConfigError("analytic_conv: signal length " + std::to_string(signal.size()) +
                          " does not match filter length " + std::to_string(filter_row.size()));
    CVector spectrum = fft::forward_real(signal);
    for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= filter_row[k];
    return fft::inverse(spectrum);
}

CVector analytic_conv(std::span<const cplx> signal, std::span<const double> filter_row)
{
    if (signal.size() != filter_row.size())
        throw ConfigError("analytic_conv: signal length " + std::to_string(signal.size()) +
                          " does not match filter length " + std::to_string(filter_row.size()));
    CVector spectrum = fft::forward(signal);
    for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= filter_row[k];
    return fft::inverse(spectrum);
}

std::vector<double> contraction(std::span<const cplx> x)
{
    std::vector<double> out(x.size());
    std::transform(x.begin(), x.end(), out.begin(), [](const cplx& v) { return std::abs(v); });
    return out;
}

template <typename T>
std::vector<T> subsample(std::span<const T> x, std::size_t r)
{
    if (r < 1) throw ConfigError("subsampling rate must be >= 1");
    std::vector<T> out;
    out.reserve(subsampled_length(x.size(), r));
    for (std::size_t i = 0; i < x.size(); i += r) out.push_back(x[i]);
    return out;
}

template std::vector<double> subsample(std::span<const double>, std::size_t);
template std::vector<cplx> subsample(std::span<const cplx>, std::size_t);

namespace {

// |x ∗ ψ_j| at every r-th sample, from a precomputed spectrum of x.
std::vector<double> modulus_subsampled(const CVector& spectrum, std::span<const double> filter,
                                       std::size_t r, CVector& scratch)
{
    const std::size_t n = spectrum.size();
    scratch.resize(n);
    for (std::size_t k = 0; k < n; ++k) scratch[k] = spectrum[k] * filter[k];
    const CVector conv = fft::inverse(scratch);
    std::vector<double> out;
    out.reserve(subsampled_length(n, r));
    for (std::size_t i = 0; i < n; i += r) out.push_back(std::abs(conv[i]));
    return out;
}

// Lowpass then subsample, from the spectrum of a real signal.
std::vector<double> smooth_subsampled(CVector spectrum, std::span<const double> lowpass, std::size_t r_prime)
{
    for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= lowpass[k];
    const std::vector<double> smooth = fft::inverse_real(spectrum);
    return subsample(std::span<const double>(smooth), r_prime);
}

}  // namespace

std::vector<std::vector<double>> layer_u(std::span<const double> input, const FilterBank& bank,
                                         std::size_t r)
{
    if (input.size() != bank.signal_len())
        throw ConfigError("layer_u: input length " + std::to_string(input.size()) +
                          " does not match filter bank length " + std::to_string(bank.signal_len()));
    if (r < 1) throw ConfigError("subsampling rate must be >= 1");
    const CVector spectrum = fft::forward_real(input);
    CVector scratch;
    std::vector<std::vector<double>> out;
    out.reserve(bank.num_scales());
    for (std::size_t j = 0; j < bank.num_scales(); ++j)
        out.push_back(modulus_subsampled(spectrum, bank.filter(j), r, scratch));
    return out;
}

std::vector<double> layer_s(std::span<const double> u, std::span<const double> lowpass,
                            std::size_t r_prime)
{
    if (u.size() != lowpass.size())
        throw ConfigError("layer_s: input length " + std::to_string(u.size()) +
                          " does not match lowpass length " + std::to_string(lowpass.size()));
    if (r_prime < 1) throw ConfigError("averaging subsampling rate must be >= 1");
    return smooth_subsampled(fft::forward_real(u), lowpass, r_prime);
}

ScatteringNetwork::ScatteringNetwork(ScatteringConfig config, std::size_t input_len)
    : config_(std::move(config)), input_len_(input_len)
{
    config_.validate();
    if (input_len_ < 2) throw ConfigError("scattering input length must be >= 2");

    u_lengths_.push_back(input_len_);
    std::size_t len = input_len_;
    for (const auto& layer : config_.layers) {
        FilterBankSpec spec;
        spec.family = config_.family;
        spec.gmw = config_.gmw;
        spec.signal_len = len;
        spec.quality = layer.quality;
        spec.j_max = layer.j_max;
        spec.peak_fraction = config_.peak_fraction;
        banks_.emplace_back(spec);
        len = subsampled_length(len, layer.subsample);
        if (len < 2)
            throw ConfigError("input length " + std::to_string(input_len_) + " is too short for " +
                              std::to_string(config_.layers.size()) + " layers");
        u_lengths_.push_back(len);
    }

    // S_0 is smoothed at the first layer's coarsest scale on the input grid;
    // S_m re-samples layer m's averaging filter on the U_m grid.
    const auto first = banks_.front().lowpass();
    lowpass_.emplace_back(first.begin(), first.end());
    for (std::size_t m = 1; m <= banks_.size(); ++m)
        lowpass_.push_back(lowpass_on_grid(u_lengths_[m], banks_[m - 1].coarsest_scale(), config_.peak_fraction));
}

std::vector<std::vector<std::size_t>> ScatteringNetwork::output_shapes() const
{
    std::vector<std::vector<std::size_t>> shapes;
    shapes.push_back({subsampled_length(input_len_, config_.average_subsample0)});
    std::vector<std::size_t> path_dims;
    for (std::size_t m = 1; m <= banks_.size(); ++m) {
        path_dims.insert(path_dims.begin(), banks_[m - 1].num_scales());
        std::vector<std::size_t> shape{subsampled_length(u_lengths_[m], config_.layers[m - 1].average_subsample)};
        shape.insert(shape.end(), path_dims.begin(), path_dims.end());
        shapes.push_back(std::move(shape));
    }
    return shapes;
}

ScatteringOutput ScatteringNetwork::scatter(std::span<const double> signal) const
{
    if (signal.empty()) throw DataError("scatter: empty signal");
    if (signal.size() != input_len_)
        throw ConfigError("scatter: signal length " + std::to_string(signal.size()) +
                          " does not match network input length " + std::to_string(input_len_));
    for (double v : signal)
        if (!std::isfinite(v)) throw NumericError("scatter: non-finite input sample");

    ScatteringOutput out;
    out.config = config_;
    out.input_len = input_len_;
    out.layer0 = layer_s(signal, lowpass_[0], config_.average_subsample0);

    const auto shapes = output_shapes();

    // Spectra of the parents of the current layer, indexed by flattened path
    // (j_{m-1}, ..., j_1); empty for all-zero parents.
    std::vector<CVector> parents{fft::forward_real(signal)};
    std::vector<double> parent_freq{std::numeric_limits<double>::infinity()};
    double rate_factor = 1.0;  // product of r_1..r_{m-1}
    CVector scratch;

    for (std::size_t m = 1; m <= banks_.size(); ++m) {
        const FilterBank& bank = banks_[m - 1];
        const LayerConfig& layer = config_.layers[m - 1];
        const std::size_t scales = bank.num_scales();
        const std::size_t num_parents = parents.size();
        const std::size_t paths = scales * num_parents;
        const bool last = m == banks_.size();

        Tensor tensor;
        tensor.shape = shapes[m];
        const std::size_t t_len = tensor.shape.front();
        tensor.data.assign(t_len * paths, 0.0);

        std::vector<CVector> children;
        std::vector<double> child_freq;
        if (!last) {
            children.resize(paths);
            child_freq.resize(paths);
        }

        for (std::size_t p = 0; p < num_parents; ++p) {
            const CVector& spectrum = parents[p];
            const bool parent_zero =
                std::all_of(spectrum.begin(), spectrum.end(), [](const cplx& v) { return v == cplx{}; });

            for (std::size_t j = 0; j < scales; ++j) {
                const std::size_t path = j * num_parents + p;
                const double freq = bank.peak_frequency(j) / rate_factor;
                const bool pruned = config_.prune_increasing && freq >= parent_freq[p];

                if (!parent_zero && !pruned) {
                    const auto u = modulus_subsampled(spectrum, bank.filter(j), layer.subsample, scratch);
                    CVector u_spectrum = fft::forward_real(u);
                    const auto s = smooth_subsampled(u_spectrum, lowpass_[m], layer.average_subsample);
                    for (std::size_t t = 0; t < t_len; ++t)
                        tensor.data[t * paths + path] = std::max(s[t], 0.0);
                    if (!last) children[path] = std::move(u_spectrum);
                }
                if (!last) child_freq[path] = pruned ? -1.0 : freq;
            }
        }
        out.layers.push_back(std::move(tensor));
        parents = std::move(children);
        parent_freq = std::move(child_freq);
        rate_factor *= static_cast<double>(layer.subsample);
    }
    return out;
}

ScatteringOutput scatter(std::span<const double> signal, const ScatteringConfig& config)
{
    if (signal.empty()) throw DataError("scatter: empty signal");
    return ScatteringNetwork(config, signal.size()).scatter(signal);
}

}  // namespace gmwstn
