#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "gmwstn/fft.hpp"

namespace gmwstn {

enum class WaveletFamily : unsigned char { Gmw = 0, Morlet = 1 };

std::string_view to_string(WaveletFamily family);
/// Parses "gmw" or "morlet" (case-insensitive); throws ConfigError otherwise.
WaveletFamily parse_family(std::string_view name);

/// Generalized Morse wavelet parameters. β controls time-domain decay, γ
/// frequency-domain decay. Requires β > 0 and γ > 1.
class GmwParams {
public:
    GmwParams(double beta = 4.0, double gamma = 2.0);

    double beta() const noexcept { return beta_; }
    double gamma() const noexcept { return gamma_; }

private:
    double beta_;
    double gamma_;
};

/// H(ω)·α·ω^β·exp(−ω^γ). Exactly zero for ω ≤ 0.
double gmw_spectrum(const GmwParams& params, double omega);

/// (β/γ)^(1/γ), where the spectrum is maximal.
double peak_frequency(const GmwParams& params);

/// α = 2·(eγ/β)^(β/γ): the spectrum takes the value 2 at its peak.
double normalization_constant(const GmwParams& params);

/// Zero-mean Morlet spectrum exp(−(ω−ω0)²/2) − κ·exp(−ω²/2), κ = exp(−ω0²/2).
/// Negative (and nonzero) for ω < 0: the wavelet is only approximately analytic.
double morlet_spectrum(double center, double omega);

/// Morlet center frequency ω0 at which neighbouring filters spaced by 2^(1/Q)
/// cross at half power.
double morlet_center_for_quality(double quality);

/// Gaussian lowpass exp(−ω²σ²/2) with σ = coarsest_scale / mother_peak.
/// With mother_peak = √2 this is the father wavelet matched to GMW(4,2).
double averaging_spectrum(double coarsest_scale, double omega, double mother_peak = 1.4142135623730951);

/// Angular frequency of DFT bin k on a length-n grid, wrapped to (−π, π].
double dft_frequency(std::size_t k, std::size_t n);

struct FilterBankSpec {
    WaveletFamily family = WaveletFamily::Gmw;
    GmwParams gmw{};
    std::size_t signal_len = 0;
    double quality = 1.0;
    int j_max = 0;
    /// Peak of the finest (λ = 0) filter as a fraction of π rad/sample.
    double peak_fraction = 0.875;
};

/// Frequency-domain filters for one scattering layer, sampled on the length-N
/// DFT grid, plus the layer's averaging lowpass. Row j holds
/// |Ψ(2^(−λ_j)·c·ω_k)| with λ_j = (j − J)/Q, where c maps the finest peak to
/// peak_fraction·π. Immutable once built.
class FilterBank {
public:
    explicit FilterBank(const FilterBankSpec& spec);

    const FilterBankSpec& spec() const noexcept { return spec_; }
    WaveletFamily family() const noexcept { return spec_.family; }
    std::size_t signal_len() const noexcept { return spec_.signal_len; }
    double quality() const noexcept { return spec_.quality; }
    int j_max() const noexcept { return spec_.j_max; }
    std::size_t num_scales() const noexcept { return lambdas_.size(); }

    const std::vector<double>& lambdas() const noexcept { return lambdas_; }
    std::span<const double> filter(std::size_t j) const;
    std::span<const double> lowpass() const noexcept { return lowpass_; }

    /// Peak of the mother wavelet in its own frequency units (ω_{β,γ} or ω0).
    double mother_peak() const noexcept { return mother_peak_; }
    /// Analytic peak of row j in rad/sample.
    double peak_frequency(std::size_t j) const;
    /// 2^(J/Q), the coarsest dilation of the layer.
    double coarsest_scale() const;

private:
    FilterBankSpec spec_;
    double mother_peak_ = 0.0;
    std::vector<double> lambdas_;
    std::vector<double> filters_;  // row-major [num_scales × N]
    std::vector<double> lowpass_;
};

FilterBank build_filter_bank(WaveletFamily family, std::size_t signal_len, double quality, int j_max,
                             const GmwParams& params = {}, double peak_fraction = 0.875);

/// Averaging filter of a bank re-sampled on a grid of length n:
/// exp(−(ω_k·coarsest_scale / (peak_fraction·π))²/2).
std::vector<double> lowpass_on_grid(std::size_t n, double coarsest_scale, double peak_fraction);

/// Reference analytic wavelet transform with the GMW mother wavelet:
/// row s is W(a_s, b) = IDFT(G(ω)·√a_s·Ψ(a_s·ω)) over b = 0..len−1, with
/// time in samples and ω in rad/sample.
std::vector<CVector> awt(std::span<const double> signal, std::span<const double> scales,
                         const GmwParams& params = {});

}  // namespace gmwstn
