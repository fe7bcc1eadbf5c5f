#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "gmwstn/filters.hpp"
#include "gmwstn/scattering.hpp"

namespace gmwstn {

// "GMWB" v1: u8 family; N, Q, J, β, γ as f64; then a row-major f64 matrix
// with J+2 rows of N values (filters j = 0..J, then the lowpass).
inline constexpr std::uint16_t kFilterBankVersion = 1;

struct StoredFilterBank {
    WaveletFamily family = WaveletFamily::Gmw;
    std::size_t signal_len = 0;
    double quality = 0.0;
    int j_max = 0;
    double beta = 0.0;
    double gamma = 0.0;
    std::vector<std::vector<double>> filters;
    std::vector<double> lowpass;
};

void save_filter_bank(const FilterBank& bank, const std::filesystem::path& path);
StoredFilterBank load_filter_bank(const std::filesystem::path& path);
/// One line per row: kind,j,lambda,peak_rad_per_sample,v_0..v_{N-1}.
void write_filter_bank_csv(const FilterBank& bank, std::ostream& out);

// "STNC" v1: config snapshot, input length, S_0, then each layer tensor as
// u8 rank, u64 dims, f64 data.
inline constexpr std::uint16_t kScatteringVersion = 1;

void save_scattering(const ScatteringOutput& out, const std::filesystem::path& path);
ScatteringOutput load_scattering(const std::filesystem::path& path);
/// Long format: layer,path,t,value where path is "j_m-...-j_1" (empty for S_0).
void write_scattering_csv(const ScatteringOutput& out, std::ostream& os);

}  // namespace gmwstn
