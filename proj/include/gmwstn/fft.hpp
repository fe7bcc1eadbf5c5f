#pragma once

#include <complex>
#include <span>
#include <vector>

namespace gmwstn {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

// Thin wrappers over FFTW. Plans are created once per (length, kind) with
// FFTW_ESTIMATE so results are reproducible across processes, and are shared
// between threads. The inverse transforms include the 1/N factor.
namespace fft {

/// Full complex spectrum of a real signal.
CVector forward_real(std::span<const double> x);

CVector forward(std::span<const cplx> x);

CVector inverse(std::span<const cplx> spectrum);

/// Inverse of a Hermitian spectrum (only bins 0..N/2 are read).
std::vector<double> inverse_real(std::span<const cplx> spectrum);

}  // namespace fft
}  // namespace gmwstn
