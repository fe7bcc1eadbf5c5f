#include "gmwstn/filters.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "gmwstn/error.hpp"

namespace gmwstn {

std::string_view to_string(WaveletFamily family)
{
    return family == WaveletFamily::Gmw ? "gmw" : "morlet";
}

WaveletFamily parse_family(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "gmw") return WaveletFamily::Gmw;
    if (lower == "morlet") return WaveletFamily::Morlet;
    throw ConfigError("unknown wavelet family '" + std::string(name) + "' (expected gmw or morlet)");
}

GmwParams::GmwParams(double beta, double gamma) : beta_(beta), gamma_(gamma)
{
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw ConfigError("GMW beta must be a finite value > 0, got " + std::to_string(beta));
    if (!(gamma > 1.0) || !std::isfinite(gamma))
        throw ConfigError("GMW gamma must be a finite value > 1, got " + std::to_string(gamma));
}

double peak_frequency(const GmwParams& params)
{
    return std::pow(params.beta() / params.gamma(), 1.0 / params.gamma());
}

double normalization_constant(const GmwParams& params)
{
    const double b = params.beta();
    const double g = params.gamma();
    return 2.0 * std::pow(std::numbers::e * g / b, b / g);
}

double gmw_spectrum(const GmwParams& params, double omega)
{
    if (!(omega > 0.0)) return 0.0;
    const double b = params.beta();
    const double g = params.gamma();
    // log form keeps large β or ω from overflowing before the exponential decays
    const double log_alpha = std::log(2.0) + (b / g) * (1.0 + std::log(g) - std::log(b));
    return std::exp(log_alpha + b * std::log(omega) - std::pow(omega, g));
}

double morlet_spectrum(double center, double omega)
{
    const double kappa = std::exp(-0.5 * center * center);
    const double d = omega - center;
    return std::exp(-0.5 * d * d) - kappa * std::exp(-0.5 * omega * omega);
}

double morlet_center_for_quality(double quality)
{
    if (!(quality > 0.0)) throw ConfigError("quality factor must be > 0");
    // Filters exp(-(u - w0)^2/2) and exp(-(u/a - w0)^2/2) with a = 2^(1/Q)
    // meet at u - w0 = w0 (a - 1)/(a + 1); half power there means sqrt(ln 2).
    const double a = std::exp2(1.0 / quality);
    return std::sqrt(std::numbers::ln2) * (a + 1.0) / (a - 1.0);
}

double averaging_spectrum(double coarsest_scale, double omega, double mother_peak)
{
    const double sigma = coarsest_scale / mother_peak;
    const double x = omega * sigma;
    return std::exp(-0.5 * x * x);
}

double dft_frequency(std::size_t k, std::size_t n)
{
    const double two_pi = 2.0 * std::numbers::pi;
    const auto kk = static_cast<double>(k);
    const auto nn = static_cast<double>(n);
    return k <= n / 2 ? two_pi * kk / nn : two_pi * (kk - nn) / nn;
}

std::vector<double> lowpass_on_grid(std::size_t n, double coarsest_scale, double peak_fraction)
{
    std::vector<double> row(n);
    const double sigma = coarsest_scale / (peak_fraction * std::numbers::pi);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = dft_frequency(k, n) * sigma;
        row[k] = std::exp(-0.5 * x * x);
    }
    return row;
}

FilterBank::FilterBank(const FilterBankSpec& spec) : spec_(spec)
{
    const std::size_t n = spec.signal_len;
    if (n < 2) throw ConfigError("filter bank signal length must be >= 2");
    if (!(spec.quality > 0.0) || !std::isfinite(spec.quality))
        throw ConfigError("filter bank quality factor must be > 0");
    if (spec.j_max < 0) throw ConfigError("filter bank J must be >= 0");
    if (!(spec.peak_fraction > 0.0 && spec.peak_fraction <= 1.0))
        throw ConfigError("peak fraction must lie in (0, 1]");

    const auto rows = static_cast<std::size_t>(spec.j_max) + 1;
    mother_peak_ = spec.family == WaveletFamily::Gmw ? gmwstn::peak_frequency(spec.gmw)
                                                     : morlet_center_for_quality(spec.quality);
    // grid frequency -> mother frequency, so the λ = 0 filter peaks at peak_fraction·π
    const double grid_to_mother = mother_peak_ / (spec.peak_fraction * std::numbers::pi);

    lambdas_.resize(rows);
    filters_.assign(rows * n, 0.0);
    for (std::size_t j = 0; j < rows; ++j) {
        const double lambda = (static_cast<double>(j) - spec.j_max) / spec.quality;
        lambdas_[j] = lambda;
        const double dilation = std::exp2(-lambda) * grid_to_mother;
        double* row = filters_.data() + j * n;
        if (spec.family == WaveletFamily::Gmw) {
            // bins above N/2 alias negative frequencies and stay exactly zero
            for (std::size_t k = 1; k <= n / 2; ++k)
                row[k] = gmw_spectrum(spec.gmw, dft_frequency(k, n) * dilation);
        } else {
            for (std::size_t k = 0; k < n; ++k)
                row[k] = 2.0 * std::abs(morlet_spectrum(mother_peak_, dft_frequency(k, n) * dilation));
        }
    }
    lowpass_ = lowpass_on_grid(n, coarsest_scale(), spec.peak_fraction);
}

std::span<const double> FilterBank::filter(std::size_t j) const
{
    if (j >= num_scales()) throw ConfigError("filter index out of range");
    return {filters_.data() + j * spec_.signal_len, spec_.signal_len};
}

double FilterBank::peak_frequency(std::size_t j) const
{
    return std::exp2(lambdas_.at(j)) * spec_.peak_fraction * std::numbers::pi;
}

double FilterBank::coarsest_scale() const
{
    return std::exp2(spec_.j_max / spec_.quality);
}

FilterBank build_filter_bank(WaveletFamily family, std::size_t signal_len, double quality, int j_max,
                             const GmwParams& params, double peak_fraction)
{
    FilterBankSpec spec;
    spec.family = family;
    spec.gmw = params;
    spec.signal_len = signal_len;
    spec.quality = quality;
    spec.j_max = j_max;
    spec.peak_fraction = peak_fraction;
    return FilterBank(spec);
}

std::vector<CVector> awt(std::span<const double> signal, std::span<const double> scales,
                         const GmwParams& params)
{
    if (signal.empty()) throw DataError("awt: empty signal");
    for (double a : scales)
        if (!(a > 0.0)) throw ConfigError("awt: scales must be positive");

    const std::size_t n = signal.size();
    const CVector spectrum = fft::forward_real(signal);
    std::vector<CVector> rows;
    rows.reserve(scales.size());
    CVector product(n);
    for (double a : scales) {
        const double norm = std::sqrt(a);
        // Ψ is real, so the conjugate filter is Ψ itself
        for (std::size_t k = 0; k < n; ++k)
            product[k] = spectrum[k] * (norm * gmw_spectrum(params, a * dft_frequency(k, n)));
        rows.push_back(fft::inverse(product));
    }
    return rows;
}

}  // namespace gmwstn
