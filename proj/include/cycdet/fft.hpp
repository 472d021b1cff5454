#pragma once

#include <complex>
#include <span>
#include <vector>

namespace cycdet::fft {

// Full-length DFT X(k) = sum_n x(n) exp(-2 pi i k n / N) of a real sequence,
// Hermitian half mirrored in. Any N >= 1.
[[nodiscard]] std::vector<std::complex<double>> forward_real(std::span<const double> x);

// Inverse of forward_real for a Hermitian spectrum, including the 1/N factor.
// Only bins [0, N/2] are read.
[[nodiscard]] std::vector<double> inverse_real(std::span<const std::complex<double>> spectrum);

}  // namespace cycdet::fft
