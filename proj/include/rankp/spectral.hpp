#pragma once

#include "rankp/core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace rankp {

/// Full singular value decomposition with a fixed sign convention:
/// the largest-magnitude entry of each left vector is positive (first such
/// entry on ties), and the right vector follows. Repeated runs on the same
/// input produce identical bits.
struct SpectralDecomposition {
  Vector singular_values;  // nonincreasing, >= 0
  Matrix left_vectors;     // m x q, orthonormal columns
  Matrix right_vectors;    // n x q, orthonormal columns
  Index numerical_rank = 0;
  double rank_tol = 1e-10;

  Index count() const { return singular_values.size(); }
};

inline double default_rank_tol() { return 1e-10; }

inline SpectralDecomposition svd(const Matrix& a, double rank_tol = default_rank_tol()) {
  require_finite(a, "svd");
  Eigen::BDCSVD<Matrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SpectralDecomposition dec;
  dec.singular_values = solver.singularValues();
  dec.left_vectors = solver.matrixU();
  dec.right_vectors = solver.matrixV();
  dec.rank_tol = rank_tol;
  for (Index i = 0; i < dec.count(); ++i) {
    Index pivot = 0;
    dec.left_vectors.col(i).cwiseAbs().maxCoeff(&pivot);
    if (dec.left_vectors(pivot, i) < 0) {
      dec.left_vectors.col(i) = -dec.left_vectors.col(i);
      dec.right_vectors.col(i) = -dec.right_vectors.col(i);
    }
  }
  const double s1 = dec.count() ? dec.singular_values(0) : 0.0;
  dec.numerical_rank = 0;
  for (Index i = 0; i < dec.count(); ++i)
    if (dec.singular_values(i) > rank_tol * s1) ++dec.numerical_rank;
  if (s1 == 0.0) dec.numerical_rank = 0;
  return dec;
}

inline Matrix rank_p_approx(const SpectralDecomposition& dec, Index p) {
  if (p < 1 || p > dec.count())
    throw IndexError("rank_p_approx: p out of range");
  return dec.left_vectors.leftCols(p) * dec.singular_values.head(p).asDiagonal() *
         dec.right_vectors.leftCols(p).transpose();
}

inline double spectral_norm(const Matrix& m) {
  require_finite(m, "spectral_norm");
  if (m.rows() == m.cols() && m == m.transpose()) {
    // Exactly symmetric input: the symmetric eigensolver is considerably
    // faster than a full SVD at large n and sigma_1 = max |lambda|.
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return std::max(std::abs(es.eigenvalues()(0)),
                    std::abs(es.eigenvalues()(m.rows() - 1)));
  }
  Eigen::BDCSVD<Matrix> solver(m);
  return solver.singularValues().size() ? solver.singularValues()(0) : 0.0;
}

/// Eigenvalues of a symmetric matrix, sorted nonincreasing.
inline Vector symmetric_eigenvalues(const Matrix& a) {
  require_finite(a, "symmetric_eigenvalues");
  if (a.rows() != a.cols()) throw ShapeError("symmetric_eigenvalues: not square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

struct GapReport {
  Index p = 0;
  double sigma_p = 0;
  double sigma_p_plus_1 = 0;
  double delta_p = 0;
  std::optional<double> delta_S;       // symmetric inputs only
  std::optional<Index> positive_count; // k: positives among the p leading magnitudes
};

/// Singular value gap delta_p = sigma_p - sigma_{p+1}. When the signed
/// eigenvalues of a symmetric matrix are supplied (sorted nonincreasing),
/// also reports the eigenvalue gap delta_S at the two boundaries of the
/// leading-magnitude index set; the min argument at a boundary that does not
/// exist (k = 0 or k = p) is dropped.
inline GapReport gaps(const SpectralDecomposition& dec, Index p,
                      const std::optional<Vector>& symmetric_eigs = {}) {
  if (p < 1) throw IndexError("gaps: p < 1");
  if (p >= dec.count()) throw NoGapError("gaps: delta_p undefined at p = min(m,n)");
  GapReport rep;
  rep.p = p;
  rep.sigma_p = dec.singular_values(p - 1);
  rep.sigma_p_plus_1 = dec.singular_values(p);
  rep.delta_p = rep.sigma_p - rep.sigma_p_plus_1;
  if (symmetric_eigs) {
    const Vector& lam = *symmetric_eigs;
    const Index n = lam.size();
    if (p >= n) throw NoGapError("gaps: p = n for symmetric eigenvalues");
    for (Index i = 0; i + 1 < n; ++i)
      if (lam(i) < lam(i + 1)) throw InvalidSpecError("gaps: eigenvalues not sorted");
    // Pick the p leading magnitudes from the two ends; ties go to the
    // positive end so the selection is deterministic.
    Index front = 0, back = n - 1, k = 0;
    for (Index taken = 0; taken < p; ++taken) {
      if (std::abs(lam(front)) >= std::abs(lam(back))) {
        ++front;
        ++k;
      } else {
        --back;
      }
    }
    rep.positive_count = k;
    double ds = std::numeric_limits<double>::infinity();
    if (k > 0) ds = std::min(ds, lam(k - 1) - lam(k));
    if (k < p) {
      const Index b = n - (p - k);  // 1-based boundary index of the negative block
      ds = std::min(ds, lam(b - 1) - lam(b));
    }
    rep.delta_S = ds;
  }
  return rep;
}

inline double energy_fraction(const SpectralDecomposition& dec, Index p) {
  if (p < 1 || p > dec.count()) throw IndexError("energy_fraction: p out of range");
  const double total = dec.singular_values.squaredNorm();
  if (total == 0.0) throw ZeroMatrixError("energy_fraction: all-zero matrix");
  return dec.singular_values.head(p).squaredNorm() / total;
}

/// Dilation [[0, A], [A^T, 0]]; its nonzero eigenvalues are +-sigma_i(A).
inline Matrix symmetrize(const Matrix& a) {
  const Index m = a.rows(), n = a.cols();
  Matrix d = Matrix::Zero(m + n, m + n);
  d.topRightCorner(m, n) = a;
  d.bottomLeftCorner(n, m) = a.transpose();
  return d;
}

struct WeylCheck {
  bool ok = false;
  double violation = 0;  // max over i of |sigma_i(At) - sigma_i(A)| - ||E||, clamped at 0
};

inline WeylCheck weyl_check(const SpectralDecomposition& dec_a,
                            const SpectralDecomposition& dec_at, double norm_e) {
  if (dec_a.count() != dec_at.count()) throw ShapeError("weyl_check: shape mismatch");
  double worst = 0;
  for (Index i = 0; i < dec_a.count(); ++i)
    worst = std::max(worst, std::abs(dec_at.singular_values(i) - dec_a.singular_values(i)));
  WeylCheck res;
  res.violation = std::max(0.0, worst - norm_e);
  res.ok = res.violation <= 1e-8;
  return res;
}

}  // namespace rankp
