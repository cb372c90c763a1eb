#pragma once

#include <complex>
#include <cstddef>
#include <mutex>
#include <unordered_map>
#include <vector>

#include <fftw3.h>

namespace gkpsim {

// Thin wrapper around FFTW with a process-wide plan cache.
//
// Plans are created with FFTW_ESTIMATE so planning never depends on runtime
// measurements, which keeps transform output reproducible run to run.
// FFTW_UNALIGNED lets one cached plan execute on any buffer. Plan creation is
// serialized behind a mutex (fftw_execute_dft itself is thread safe).
namespace detail {

inline fftw_plan fft_plan(std::size_t n, int sign) {
    static std::mutex mu;
    static std::unordered_map<long long, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(mu);
    const long long key = static_cast<long long>(n) * 2 + (sign == FFTW_FORWARD ? 0 : 1);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<std::complex<double>> buf(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n),
                                      reinterpret_cast<fftw_complex*>(buf.data()),
                                      reinterpret_cast<fftw_complex*>(buf.data()),
                                      sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, plan);
    return plan;
}

inline void fft_inplace(std::vector<std::complex<double>>& v, int sign) {
    fftw_plan plan = fft_plan(v.size(), sign);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(v.data()),
                     reinterpret_cast<fftw_complex*>(v.data()));
}

}  // namespace detail

// Unnormalized forward DFT, matching the usual sum_j x_j e^{-2 pi i jk/N}.
inline std::vector<std::complex<double>> fft(std::vector<std::complex<double>> v) {
    detail::fft_inplace(v, FFTW_FORWARD);
    return v;
}

// Inverse DFT including the 1/N factor.
inline std::vector<std::complex<double>> ifft(std::vector<std::complex<double>> v) {
    detail::fft_inplace(v, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(v.size());
    for (auto& x : v) x *= scale;
    return v;
}

inline std::vector<std::complex<double>> fft_real(const std::vector<double>& v) {
    std::vector<std::complex<double>> c(v.begin(), v.end());
    return fft(std::move(c));
}

}  // namespace gkpsim
