#pragma once

#include <algorithm>
#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace vmdaug::detail {

using cvec = std::vector<std::complex<double>>;

inline Eigen::FFT<double>& fft_engine() {
    thread_local Eigen::FFT<double> engine;
    return engine;
}

inline cvec fft(const cvec& in) {
    cvec out;
    fft_engine().fwd(out, in);
    return out;
}

/// Inverse transform with 1/N scaling.
inline cvec ifft(const cvec& in) {
    cvec out;
    fft_engine().inv(out, in);
    return out;
}

/// Swaps halves so the zero-frequency bin moves to index n/2 (n even).
inline void fftshift(cvec& v) {
    std::rotate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
}

inline void ifftshift(cvec& v) {
    std::rotate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>((v.size() + 1) / 2), v.end());
}

} // namespace vmdaug::detail
