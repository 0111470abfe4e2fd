#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <random>
#include <vector>

#include "fpme/fft.hpp"

using fpme::cd;

namespace {

/// Naive O(n^2) DFT used as an independent oracle for the radix-2 transform.
std::vector<cd> naive_dft(const std::vector<cd>& a, bool inverse) {
  const std::size_t n = a.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cd> out(n, cd(0.0, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double ang = sign * 2.0 * fpme::kPi * double(i) * double(j) / double(n);
      out[j] += a[i] * std::polar(1.0, ang);
    }
    if (inverse) out[j] /= double(n);
  }
  return out;
}

std::vector<cd> random_signal(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<cd> a(n);
  for (auto& z : a) z = cd(g(rng), g(rng));
  return a;
}

double max_abs_diff(const std::vector<cd>& a, const std::vector<cd>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("fft matches the naive DFT oracle", "[fft]") {
  for (std::size_t n : {8u, 64u, 256u}) {
    auto a = random_signal(n, 17u + unsigned(n));
    auto ref = naive_dft(a, false);
    auto got = a;
    fpme::fft_inplace(got, false);
    REQUIRE(max_abs_diff(got, ref) < 1e-10 * double(n));

    auto ref_inv = naive_dft(a, true);
    auto got_inv = a;
    fpme::fft_inplace(got_inv, true);
    REQUIRE(max_abs_diff(got_inv, ref_inv) < 1e-10);
  }
}

TEST_CASE("fft round-trip is the identity", "[fft]") {
  auto a = random_signal(1024, 3u);
  auto b = a;
  fpme::fft_inplace(b, false);
  fpme::fft_inplace(b, true);
  REQUIRE(max_abs_diff(a, b) < 1e-12);
}

TEST_CASE("fft satisfies Parseval's identity", "[fft]") {
  auto a = random_signal(512, 5u);
  double time_energy = 0.0;
  for (const auto& z : a) time_energy += std::norm(z);
  auto A = a;
  fpme::fft_inplace(A, false);
  double freq_energy = 0.0;
  for (const auto& z : A) freq_energy += std::norm(z);
  freq_energy /= double(a.size());
  REQUIRE(time_energy == Catch::Approx(freq_energy).epsilon(1e-12));
}

TEST_CASE("fft is linear", "[fft]") {
  auto a = random_signal(128, 7u);
  auto b = random_signal(128, 9u);
  const cd alpha(0.7, -0.3), beta(-1.1, 0.2);
  std::vector<cd> combo(128);
  for (std::size_t i = 0; i < 128; ++i) combo[i] = alpha * a[i] + beta * b[i];
  fpme::fft_inplace(combo, false);
  fpme::fft_inplace(a, false);
  fpme::fft_inplace(b, false);
  for (std::size_t i = 0; i < 128; ++i) {
    REQUIRE(std::abs(combo[i] - (alpha * a[i] + beta * b[i])) < 1e-10);
  }
}

TEST_CASE("fft of a real signal has Hermitian spectrum", "[fft]") {
  std::mt19937 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<cd> a(256);
  for (auto& z : a) z = cd(g(rng), 0.0);
  fpme::fft_inplace(a, false);
  for (std::size_t j = 1; j < a.size(); ++j) {
    REQUIRE(std::abs(a[j] - std::conj(a[a.size() - j])) < 1e-10);
  }
}

TEST_CASE("fft rejects non-power-of-two sizes", "[fft]") {
  std::vector<cd> a(12, cd(1.0, 0.0));
  REQUIRE_THROWS_AS(fpme::fft_inplace(a, false), std::invalid_argument);
}

TEST_CASE("2-d fft matches separable naive transform", "[fft]") {
  const std::size_t n = 16;
  auto a = random_signal(n * n, 23u);

  // Oracle: naive DFT along rows, then along columns.
  std::vector<cd> ref = a;
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<cd> row(ref.begin() + r * n, ref.begin() + (r + 1) * n);
    row = naive_dft(row, false);
    std::copy(row.begin(), row.end(), ref.begin() + r * n);
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<cd> col(n);
    for (std::size_t r = 0; r < n; ++r) col[r] = ref[r * n + c];
    col = naive_dft(col, false);
    for (std::size_t r = 0; r < n; ++r) ref[r * n + c] = col[r];
  }

  auto got = a;
  fpme::fft_2d_inplace(got, n, false);
  REQUIRE(max_abs_diff(got, ref) < 1e-9);

  fpme::fft_2d_inplace(got, n, true);
  REQUIRE(max_abs_diff(got, a) < 1e-12);
}
