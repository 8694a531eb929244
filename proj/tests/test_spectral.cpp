#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace rankp;
using testsupport::random_matrix;
using testsupport::random_symmetric;

TEST_CASE("svd of identity") {
  const auto dec = svd(Matrix::Identity(3, 3));
  REQUIRE(dec.numerical_rank == 3);
  for (Index i = 0; i < 3; ++i) REQUIRE(dec.singular_values(i) == Catch::Approx(1.0));
}

TEST_CASE("svd of a diagonal matrix") {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = 5;
  a(1, 1) = 3;
  const auto dec = svd(a);
  REQUIRE(dec.singular_values(0) == Catch::Approx(5.0));
  REQUIRE(dec.singular_values(1) == Catch::Approx(3.0));
  REQUIRE(dec.singular_values(2) == Catch::Approx(0.0).margin(1e-14));
  REQUIRE(dec.numerical_rank == 2);
}

TEST_CASE("svd reconstruction, orthonormality, determinism") {
  const Matrix a = random_matrix(42, 8, 6);
  const auto dec = svd(a);
  const Matrix rebuilt = dec.left_vectors * dec.singular_values.asDiagonal() *
                         dec.right_vectors.transpose();
  REQUIRE((rebuilt - a).norm() <= 1e-8 * a.norm());
  const Matrix gram_u = dec.left_vectors.transpose() * dec.left_vectors;
  const Matrix gram_v = dec.right_vectors.transpose() * dec.right_vectors;
  REQUIRE((gram_u - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-10);
  REQUIRE((gram_v - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-10);
  for (Index i = 0; i + 1 < dec.count(); ++i)
    REQUIRE(dec.singular_values(i) >= dec.singular_values(i + 1));

  // sign convention: largest-magnitude entry of each left vector is positive
  for (Index i = 0; i < dec.count(); ++i) {
    Index pivot = 0;
    dec.left_vectors.col(i).cwiseAbs().maxCoeff(&pivot);
    REQUIRE(dec.left_vectors(pivot, i) > 0);
  }

  const auto again = svd(a);
  REQUIRE(again.singular_values == dec.singular_values);
  REQUIRE(again.left_vectors == dec.left_vectors);
  REQUIRE(again.right_vectors == dec.right_vectors);
}

TEST_CASE("svd rejects non-finite input") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(svd(a), InvalidMatrixError);
}

TEST_CASE("rank_p_approx basics") {
  const Matrix a = random_matrix(7, 9, 7);
  const auto dec = svd(a);
  REQUIRE((rank_p_approx(dec, 7) - a).norm() <= 1e-8 * a.norm());

  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 5;
  d(1, 1) = 3;
  d(2, 2) = 1;
  Matrix truncated = rank_p_approx(svd(d), 2);
  Matrix expect = d;
  expect(2, 2) = 0;
  REQUIRE((truncated - expect).cwiseAbs().maxCoeff() <= 1e-12);

  REQUIRE_THROWS_AS(rank_p_approx(dec, 0), IndexError);
  REQUIRE_THROWS_AS(rank_p_approx(dec, 8), IndexError);
}

TEST_CASE("residual of the best rank-p approximation is the next singular value") {
  const Matrix a = random_matrix(101, 10, 10);
  const auto dec = svd(a);
  const double sigma4 = dec.singular_values(3);
  REQUIRE(spectral_norm(a - rank_p_approx(dec, 3)) == Catch::Approx(sigma4).margin(1e-8));
}

TEST_CASE("spectral_norm") {
  REQUIRE(spectral_norm(Matrix::Zero(4, 3)) == 0.0);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = -7;
  REQUIRE(spectral_norm(d) == Catch::Approx(7.0));
  const Matrix a = random_matrix(5, 12, 9);
  REQUIRE(std::abs(spectral_norm(a) - svd(a).singular_values(0)) <= 1e-10);
}

TEST_CASE("gaps and the symmetric eigenvalue gap") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 5;
  d(1, 1) = 3;
  d(2, 2) = 1;
  const auto rep = gaps(svd(d), 1);
  REQUIRE(rep.delta_p == Catch::Approx(2.0));
  REQUIRE_FALSE(rep.delta_S.has_value());

  // eigenvalues (4, 1, -3): two leading magnitudes are {4, -3}
  Matrix s = Matrix::Zero(3, 3);
  s(0, 0) = 4;
  s(1, 1) = 1;
  s(2, 2) = -3;
  Vector eigs(3);
  eigs << 4, 1, -3;
  const auto sym = gaps(svd(s), 2, eigs);
  REQUIRE(sym.positive_count == 1);
  REQUIRE(sym.delta_S.has_value());
  REQUIRE(*sym.delta_S == Catch::Approx(3.0));

  Matrix tied = Matrix::Zero(3, 3);
  tied(0, 0) = 5;
  tied(1, 1) = 5;
  tied(2, 2) = 1;
  REQUIRE(gaps(svd(tied), 1).delta_p == Catch::Approx(0.0).margin(1e-12));

  REQUIRE_THROWS_AS(gaps(svd(d), 3), NoGapError);
}

TEST_CASE("boundary cases of the eigenvalue gap") {
  // all leading eigenvalues positive: the negative-side argument is dropped
  Vector eigs(4);
  eigs << 9, 7, 2, -1;
  Matrix a = testsupport::with_spectrum(3, eigs, 4);
  const auto rep = gaps(svd(a), 2, eigs);
  REQUIRE(rep.positive_count == 2);
  REQUIRE(*rep.delta_S == Catch::Approx(5.0));  // lambda_2 - lambda_3

  // all leading eigenvalues negative
  Vector neg(4);
  neg << 1, -2, -7, -9;
  Matrix b = testsupport::with_spectrum(4, neg, 4);
  const auto rep2 = gaps(svd(b), 2, neg);
  REQUIRE(rep2.positive_count == 0);
  REQUIRE(*rep2.delta_S == Catch::Approx(5.0));  // lambda_{n-p} - lambda_{n-p+1} = -2 - (-7)
}

TEST_CASE("energy_fraction") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 4;
  const auto dec = svd(d);
  REQUIRE(energy_fraction(dec, 2) == Catch::Approx(1.0));
  REQUIRE(energy_fraction(dec, 1) == Catch::Approx(0.64));
  REQUIRE_THROWS_AS(energy_fraction(svd(Matrix::Zero(2, 2)), 1), ZeroMatrixError);

  // block ground matrix: vector scaling cancels in the energy ratio
  Fig1Spec spec;
  spec.n = 8;
  const auto dec_f = svd(build_fig1_matrix(spec));
  const double expect = (22.0 * 22 + 11 * 11) / (22.0 * 22 + 11 * 11 + 5 * 5);
  REQUIRE(energy_fraction(dec_f, 2) == Catch::Approx(expect).epsilon(1e-10));
}

TEST_CASE("symmetrize dilation") {
  Matrix one(1, 1);
  one(0, 0) = 2;
  const Matrix d = symmetrize(one);
  REQUIRE(d.rows() == 2);
  REQUIRE(d(0, 1) == 2);
  REQUIRE(d(1, 0) == 2);
  REQUIRE(d(0, 0) == 0);
  const Vector eigs = symmetric_eigenvalues(d);
  REQUIRE(eigs(0) == Catch::Approx(2.0));
  REQUIRE(eigs(1) == Catch::Approx(-2.0));

  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 3;
  diag(1, 1) = 1;
  const auto dec = svd(symmetrize(diag));
  Vector expect(4);
  expect << 3, 3, 1, 1;
  REQUIRE((dec.singular_values - expect).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("dilation preserves the truncation difference") {
  const Matrix a = random_matrix(11, 6, 5);
  const Matrix e = random_matrix(12, 6, 5, 0.05);
  const Index p = 2;
  const double direct = spectral_norm(rank_p_approx(svd(a + e), p) - rank_p_approx(svd(a), p));
  const double dilated = spectral_norm(rank_p_approx(svd(symmetrize(a + e)), 2 * p) -
                                       rank_p_approx(svd(symmetrize(a)), 2 * p));
  REQUIRE(direct == Catch::Approx(dilated).margin(1e-8));
}

TEST_CASE("dilation spectrum property") {
  const Matrix a = random_matrix(21, 7, 4);
  const auto dec_a = svd(a);
  const auto dec_d = svd(symmetrize(a));
  // singular values of the dilation: each sigma_i twice, then |m - n| zeros
  Vector expect = Vector::Zero(11);
  for (Index i = 0; i < 4; ++i) {
    expect(2 * i) = dec_a.singular_values(i);
    expect(2 * i + 1) = dec_a.singular_values(i);
  }
  REQUIRE((dec_d.singular_values - expect).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("weyl_check") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 5;
  a(1, 1) = 1;
  const auto dec_a = svd(a);
  auto res = weyl_check(dec_a, dec_a, 0.0);
  REQUIRE(res.ok);
  REQUIRE(res.violation == 0.0);

  Matrix e = Matrix::Zero(2, 2);
  e(0, 0) = 0.5;
  res = weyl_check(dec_a, svd(a + e), spectral_norm(e));
  REQUIRE(res.ok);

  REQUIRE_THROWS_AS(weyl_check(dec_a, svd(Matrix::Zero(3, 3)), 0.0), ShapeError);
}

TEST_CASE("weyl inequality across seeded symmetric trials") {
  for (std::uint64_t t = 0; t < 100; ++t) {
    const Matrix a = random_symmetric(1000 + t, 20, 2.0);
    NoiseSpec spec;
    spec.kind = NoiseKind::wigner;
    spec.seed = t;
    const Matrix e = sample_noise(spec, 20, 20) * 0.3;
    const auto res = weyl_check(svd(a), svd(a + e), spectral_norm(e));
    REQUIRE(res.ok);
  }
}

TEST_CASE("residual norm identity over random sizes and all p") {
  for (std::uint64_t t = 0; t < 10; ++t) {
    const Index m = 5 + static_cast<Index>(t), n = 4 + static_cast<Index>(t % 5);
    const Matrix a = random_matrix(300 + t, m, n);
    const auto dec = svd(a);
    for (Index p = 1; p + 1 <= std::min(m, n); ++p) {
      const double lhs = spectral_norm(a - rank_p_approx(dec, p));
      REQUIRE(std::abs(lhs - dec.singular_values(p)) <= 1e-8 * dec.singular_values(0));
    }
  }
}

TEST_CASE("truncation idempotence") {
  const Matrix a = random_matrix(77, 9, 8);
  const Matrix a3 = rank_p_approx(svd(a), 3);
  const Matrix again = rank_p_approx(svd(a3), 3);
  REQUIRE((a3 - again).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, a.norm()));
}

TEST_CASE("spectral norm is orthogonally invariant") {
  const Matrix a = random_matrix(88, 7, 6);
  const Matrix q = rng::haar_orthogonal(1, 7, 7);
  const Matrix p = rng::haar_orthogonal(2, 6, 6);
  REQUIRE(std::abs(spectral_norm(q.transpose() * a * p) - spectral_norm(a)) <= 1e-10);
}

TEST_CASE("eigenvalue gap dominates the singular value gap") {
  for (std::uint64_t t = 0; t < 30; ++t) {
    const Matrix a = random_symmetric(500 + t, 8, 3.0);
    const Vector eigs = symmetric_eigenvalues(a);
    const auto dec = svd(a);
    for (Index p = 1; p < 8; ++p) {
      const auto rep = gaps(dec, p, eigs);
      REQUIRE(*rep.delta_S >= rep.delta_p - 1e-10);
    }
  }
}
