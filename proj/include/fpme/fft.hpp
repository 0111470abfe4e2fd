#pragma once

/// \file fft.hpp
/// \brief Iterative radix-2 complex FFT on power-of-two sizes, 1-d and 2-d.
///
/// Grid sizes in this library are powers of two by contract, so a compact
/// radix-2 kernel with a cached twiddle table covers every transform the
/// spectral operators need without an external FFT dependency.

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fpme {

using cd = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

namespace detail {

/// Twiddle table for size n: tw[k] = exp(-2*pi*i*k/n), k < n/2.
/// Each entry is computed directly from std::polar so per-element accuracy is
/// at rounding level (no recurrence drift).
inline const std::vector<cd>& twiddles(std::size_t n) {
  static thread_local std::unordered_map<std::size_t, std::vector<cd>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<cd> t(n / 2);
  const double w = -2.0 * kPi / double(n);
  for (std::size_t k = 0; k < n / 2; ++k) t[k] = std::polar(1.0, w * double(k));
  return cache.emplace(n, std::move(t)).first->second;
}

}  // namespace detail

/// In-place radix-2 FFT. Forward transform is unnormalized; the inverse
/// divides by n so that fft followed by ifft is the identity.
inline void fft_inplace(std::vector<cd>& a, bool inverse = false) {
  const std::size_t n = a.size();
  if (!is_power_of_two(n)) throw std::invalid_argument("fft: size must be a power of two");
  if (n == 1) return;

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const auto& tw = detail::twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        cd w = tw[k * stride];
        if (inverse) w = std::conj(w);
        const cd u = a[i + k];
        const cd v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }

  if (inverse) {
    const double inv = 1.0 / double(n);
    for (auto& z : a) z *= inv;
  }
}

/// In-place 2-d FFT of an n-by-n row-major array (rows, then columns).
inline void fft_2d_inplace(std::vector<cd>& a, std::size_t n, bool inverse = false) {
  if (a.size() != n * n) throw std::invalid_argument("fft_2d: buffer size must be n*n");
  std::vector<cd> tmp(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::copy(a.begin() + r * n, a.begin() + (r + 1) * n, tmp.begin());
    fft_inplace(tmp, inverse);
    std::copy(tmp.begin(), tmp.end(), a.begin() + r * n);
  }
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) tmp[r] = a[r * n + c];
    fft_inplace(tmp, inverse);
    for (std::size_t r = 0; r < n; ++r) a[r * n + c] = tmp[r];
  }
}

}  // namespace fpme
