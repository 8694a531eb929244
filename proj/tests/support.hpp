#pragma once

// Shared test helpers. The brute-force routines here are deliberately written
// with raw index loops so they stay independent of the library code paths
// they are used to check.

#include "rankp/rankp.hpp"

#include <random>

namespace testsupport {

using rankp::Index;
using rankp::Matrix;
using rankp::Vector;

inline Matrix random_matrix(std::uint64_t seed, Index m, Index n, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, scale);
  Matrix a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = dist(gen);
  return a;
}

inline Matrix random_symmetric(std::uint64_t seed, Index n, double scale = 1.0) {
  Matrix a = random_matrix(seed, n, n, scale);
  return Matrix((a + a.transpose()) / 2.0);
}

/// Symmetric matrix with a prescribed descending eigenvalue list in a seeded
/// orthogonal basis.
inline Matrix with_spectrum(std::uint64_t seed, const Vector& eigs, Index n) {
  const Matrix u = rankp::rng::haar_orthogonal(seed, n, eigs.size());
  return u * eigs.asDiagonal() * u.transpose();
}

/// Rectangular matrix with prescribed singular values.
inline Matrix with_singular_values(std::uint64_t seed, const Vector& sigmas, Index m,
                                   Index n) {
  const Matrix u = rankp::rng::haar_orthogonal(seed, m, sigmas.size());
  const Matrix v = rankp::rng::haar_orthogonal(seed + 1, n, sigmas.size());
  return u * sigmas.asDiagonal() * v.transpose();
}

/// Brute-force skewness x: raw loops over index pairs and dot products.
inline double brute_x(const Matrix& u, const Matrix& v, const Matrix& e, Index r) {
  double best = 0;
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < r; ++j) {
      double dot = 0;
      for (Index a = 0; a < e.rows(); ++a)
        for (Index b = 0; b < e.cols(); ++b) dot += u(a, i) * e(a, b) * v(b, j);
      best = std::max(best, std::abs(dot));
    }
  }
  return best;
}

/// Brute-force skewness y over both inner-product families.
inline double brute_y(const Matrix& u, const Matrix& v, const Matrix& e, Index r) {
  double best = 0;
  for (Index i = 0; i < r; ++i) {
    for (Index j = i + 1; j < r; ++j) {
      double dot_v = 0;
      for (Index a = 0; a < e.rows(); ++a) {
        double evi = 0, evj = 0;
        for (Index b = 0; b < e.cols(); ++b) {
          evi += e(a, b) * v(b, i);
          evj += e(a, b) * v(b, j);
        }
        dot_v += evi * evj;
      }
      double dot_u = 0;
      for (Index b = 0; b < e.cols(); ++b) {
        double eui = 0, euj = 0;
        for (Index a = 0; a < e.rows(); ++a) {
          eui += e(a, b) * u(a, i);
          euj += e(a, b) * u(a, j);
        }
        dot_u += eui * euj;
      }
      best = std::max({best, std::abs(dot_v), std::abs(dot_u)});
    }
  }
  return best;
}

}  // namespace testsupport
