#pragma once

#include "rankp/spectral.hpp"

namespace rankp {

/// Per-entry variance grid sigma_ij^2 together with the almost-sure bound K
/// on the noise entries.
struct VarianceProfile {
  Matrix sigma2;
  double bound_K = 1.0;

  VarianceProfile(Matrix grid, double k) : sigma2(std::move(grid)), bound_K(k) {
    require_finite(sigma2, "VarianceProfile");
    if (bound_K <= 0) throw InvalidSpecError("VarianceProfile: K must be positive");
    if ((sigma2.array() < 0).any())
      throw InvalidSpecError("VarianceProfile: negative variance");
    if (sigma2.maxCoeff() > bound_K * bound_K * (1 + 1e-12))
      throw InvalidSpecError("VarianceProfile: sigma_ij^2 exceeds K^2");
  }

  double sigma_max2() const { return sigma2.size() ? sigma2.maxCoeff() : 0.0; }
};

/// Interaction parameters of the noise with the leading singular vectors.
struct SkewnessParams {
  double x = 0;
  double y = 0;
  std::optional<double> mu;
  Index r_used = 0;
};

/// x = max over 1 <= i, j <= r of |u_i^T E v_j| (diagonal pairs included).
inline double compute_x(const SpectralDecomposition& dec, const Matrix& e, Index r) {
  if (r == 0) throw EmptyRankError("compute_x: r = 0");
  if (r > dec.count()) throw IndexError("compute_x: r exceeds available vectors");
  if (e.rows() != dec.left_vectors.rows() || e.cols() != dec.right_vectors.rows())
    throw ShapeError("compute_x: E shape mismatch");
  Matrix interactions =
      dec.left_vectors.leftCols(r).transpose() * e * dec.right_vectors.leftCols(r);
  return interactions.cwiseAbs().maxCoeff();
}

/// y = max over pairs i < j <= r of |Ev_i . Ev_j| and |E^T u_i . E^T u_j|.
/// Empty maximum (r <= 1) is 0.
inline double compute_y(const SpectralDecomposition& dec, const Matrix& e, Index r) {
  if (r > dec.count()) throw IndexError("compute_y: r exceeds available vectors");
  if (e.rows() != dec.left_vectors.rows() || e.cols() != dec.right_vectors.rows())
    throw ShapeError("compute_y: E shape mismatch");
  if (r <= 1) return 0.0;
  Matrix ev = e * dec.right_vectors.leftCols(r);            // m x r
  Matrix etu = e.transpose() * dec.left_vectors.leftCols(r); // n x r
  Matrix gram_v = ev.transpose() * ev;
  Matrix gram_u = etu.transpose() * etu;
  double best = 0;
  for (Index i = 0; i < r; ++i)
    for (Index j = i + 1; j < r; ++j)
      best = std::max({best, std::abs(gram_v(i, j)), std::abs(gram_u(i, j))});
  return best;
}

/// Mean correction mu = max over k < l <= r of
///   |sum_{i',i} sigma_{i'i}^2 v_{li} v_{ki}| + |sum_{j',j} sigma_{jj'}^2 u_{lj} u_{kj}|,
/// i.e. the expectations of Ev_k . Ev_l and E^T u_k . E^T u_l under the
/// variance profile. Computed from the model, not estimated from a sample.
inline double compute_mu(const SpectralDecomposition& dec, const VarianceProfile& profile,
                         Index r) {
  if (profile.sigma2.rows() != dec.left_vectors.rows() ||
      profile.sigma2.cols() != dec.right_vectors.rows())
    throw ShapeError("compute_mu: profile shape mismatch");
  if (r > dec.count()) throw IndexError("compute_mu: r exceeds available vectors");
  if (r <= 1) return 0.0;
  Vector col_sums = profile.sigma2.colwise().sum(); // length n
  Vector row_sums = profile.sigma2.rowwise().sum(); // length m
  double best = 0;
  for (Index k = 0; k < r; ++k) {
    for (Index l = k + 1; l < r; ++l) {
      const double v_term = (col_sums.array() * dec.right_vectors.col(l).array() *
                             dec.right_vectors.col(k).array())
                                .sum();
      const double u_term = (row_sums.array() * dec.left_vectors.col(l).array() *
                             dec.left_vectors.col(k).array())
                                .sum();
      best = std::max(best, std::abs(v_term) + std::abs(u_term));
    }
  }
  return best;
}

/// m4 = max over columns of mean(sigma_ik^4 over rows) and over rows of
/// mean(sigma_lj^4 over columns).
inline double compute_m4(const VarianceProfile& profile) {
  if (profile.sigma2.size() == 0) return 0.0;
  const auto fourth = profile.sigma2.array().square();
  const double col_best = fourth.colwise().mean().maxCoeff();
  const double row_best = fourth.rowwise().mean().maxCoeff();
  return std::max(col_best, row_best);
}

inline SkewnessParams skewness_params(const SpectralDecomposition& dec, const Matrix& e,
                                      Index r, const VarianceProfile* profile = nullptr) {
  SkewnessParams params;
  params.r_used = r;
  params.x = compute_x(dec, e, r);
  params.y = compute_y(dec, e, r);
  if (profile) params.mu = compute_mu(dec, *profile, r);
  return params;
}

}  // namespace rankp
