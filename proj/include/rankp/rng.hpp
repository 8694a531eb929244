#pragma once

#include "rankp/core.hpp"

#include <cmath>
#include <cstdint>

namespace rankp::rng {

// Counter-based generator (SplitMix64 stream): the value drawn for counter k
// under a given seed is a pure function of (seed, k). Matrix entries map to
// counters by row-major position, so generated matrices are identical no
// matter in which order (or on how many threads) entries are filled.

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t at(std::uint64_t seed, std::uint64_t counter) {
  return mix64(seed + (counter + 1) * kGolden);
}

// Derive an independent stream seed (per trial, per artifact, ...).
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed ^ 0x5851F42D4C957F2Dull) + (stream + 1) * kGolden);
}

inline double uniform01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
  return uniform01(at(seed, counter));
}

inline double rademacher(std::uint64_t seed, std::uint64_t counter) {
  return (at(seed, counter) >> 63) ? 1.0 : -1.0;
}

// Symmetric uniform on [-half_width, half_width].
inline double uniform_sym(std::uint64_t seed, std::uint64_t counter, double half_width) {
  return (2.0 * uniform01(seed, counter) - 1.0) * half_width;
}

// Box-Muller; consumes counters 2k and 2k+1.
inline double gaussian(std::uint64_t seed, std::uint64_t k) {
  double u1 = uniform01(seed, 2 * k);
  double u2 = uniform01(seed, 2 * k + 1);
  if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

inline Matrix gaussian_matrix(std::uint64_t seed, Index m, Index n) {
  Matrix g(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      g(i, j) = gaussian(seed, static_cast<std::uint64_t>(i) * n + j);
  return g;
}

// Haar-distributed orthogonal columns (m x k) via QR of a Gaussian block,
// with the R diagonal sign fixed so the result is deterministic.
inline Matrix haar_orthogonal(std::uint64_t seed, Index m, Index k) {
  if (k > m) throw IndexError("haar_orthogonal: k > m");
  Matrix g = gaussian_matrix(seed, m, k);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(m, k);
  Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Index j = 0; j < k; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace rankp::rng
