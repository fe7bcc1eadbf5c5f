#include "gmwstn/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace gmwstn::fft {
namespace {

enum class Kind { Forward, Backward, RealForward, RealBackward };

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using AlignedBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
AlignedBuffer<T> allocate(std::size_t count)
{
    auto* raw = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(count, 1)));
    if (raw == nullptr) throw std::bad_alloc();
    return AlignedBuffer<T>(raw);
}

// fftw_plan_* is not thread safe; fftw_execute_* on distinct buffers is.
class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, Kind kind)
    {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(n, kind);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        const int len = static_cast<int>(n);
        fftw_plan plan = nullptr;
        auto cin = allocate<fftw_complex>(n);
        auto cout = allocate<fftw_complex>(n);
        auto rbuf = allocate<double>(n);
        switch (kind) {
        case Kind::Forward:
            plan = fftw_plan_dft_1d(len, cin.get(), cout.get(), FFTW_FORWARD, FFTW_ESTIMATE);
            break;
        case Kind::Backward:
            plan = fftw_plan_dft_1d(len, cin.get(), cout.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
            break;
        case Kind::RealForward:
            plan = fftw_plan_dft_r2c_1d(len, rbuf.get(), cout.get(), FFTW_ESTIMATE);
            break;
        case Kind::RealBackward:
            plan = fftw_plan_dft_c2r_1d(len, cin.get(), rbuf.get(), FFTW_ESTIMATE);
            break;
        }
        if (plan == nullptr) throw std::runtime_error("FFTW failed to create a plan");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<std::size_t, Kind>, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache instance;
    return instance;
}

CVector complex_transform(std::span<const cplx> x, Kind kind)
{
    const std::size_t n = x.size();
    if (n == 0) return {};
    auto in = allocate<fftw_complex>(n);
    auto out = allocate<fftw_complex>(n);
    std::memcpy(in.get(), x.data(), n * sizeof(fftw_complex));
    fftw_execute_dft(cache().get(n, kind), in.get(), out.get());
    CVector result(n);
    std::memcpy(static_cast<void*>(result.data()), out.get(), n * sizeof(fftw_complex));
    return result;
}

}  // namespace

CVector forward_real(std::span<const double> x)
{
    const std::size_t n = x.size();
    if (n == 0) return {};
    auto in = allocate<double>(n);
    auto out = allocate<fftw_complex>(n / 2 + 1);
    std::copy(x.begin(), x.end(), in.get());
    fftw_execute_dft_r2c(cache().get(n, Kind::RealForward), in.get(), out.get());

    CVector result(n);
    for (std::size_t k = 0; k <= n / 2; ++k) result[k] = {out[k][0], out[k][1]};
    for (std::size_t k = n / 2 + 1; k < n; ++k) result[k] = std::conj(result[n - k]);
    return result;
}

CVector forward(std::span<const cplx> x) { return complex_transform(x, Kind::Forward); }

CVector inverse(std::span<const cplx> spectrum)
{
    CVector result = complex_transform(spectrum, Kind::Backward);
    const double scale = 1.0 / static_cast<double>(spectrum.size());
    for (auto& v : result) v *= scale;
    return result;
}

std::vector<double> inverse_real(std::span<const cplx> spectrum)
{
    const std::size_t n = spectrum.size();
    if (n == 0) return {};
    auto in = allocate<fftw_complex>(n / 2 + 1);
    auto out = allocate<double>(n);
    std::memcpy(in.get(), spectrum.data(), (n / 2 + 1) * sizeof(fftw_complex));
    // c2r destroys its input; the buffer is ours.
    fftw_execute_dft_c2r(cache().get(n, Kind::RealBackward), in.get(), out.get());

    const double scale = 1.0 / static_cast<double>(n);
    std::vector<double> result(n);
    for (std::size_t i = 0; i < n; ++i) result[i] = out[i] * scale;
    return result;
}

}  // namespace gmwstn::fft
