#pragma once

#include "rankp/contour.hpp"
#include "rankp/skewness.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace rankp {

/// Shared context for the expansion checks on a PSD pair (A, E): the
/// eigenbasis of A, its leading-rank split, the skewness parameters and the
/// gap quantities at p.
struct ExpansionContext {
  Matrix a;
  Matrix u;            // eigenvectors of A, columns ordered by descending eigenvalue
  Vector lambda;       // eigenvalues, descending
  Index r = 0;         // numerical rank = size of the P block
  Index p = 0;
  double lambda_p = 0, delta_p = 0, norm_e = 0, x = 0, y = 0;
  Matrix e;
  Matrix q_proj;       // I - U_r U_r^T

  static ExpansionContext build(const Matrix& a, const Matrix& e, Index p,
                                std::optional<Index> rank_override = {}) {
    require_finite(a, "ExpansionContext");
    require_same_shape(a, e, "ExpansionContext");
    if (a.rows() != a.cols() || a != a.transpose())
      throw ShapeError("ExpansionContext: A must be symmetric");
    if (e != e.transpose()) throw ShapeError("ExpansionContext: E must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    ExpansionContext ctx;
    const Index n = a.rows();
    ctx.a = a;
    ctx.lambda = es.eigenvalues().reverse();
    ctx.u = es.eigenvectors().rowwise().reverse();
    if (ctx.lambda(n - 1) < -1e-10 * std::abs(ctx.lambda(0)))
      throw InvalidSpecError("ExpansionContext: A must be positive semi-definite");
    Index r = 0;
    for (Index i = 0; i < n; ++i)
      if (ctx.lambda(i) > default_rank_tol() * ctx.lambda(0)) ++r;
    ctx.r = rank_override.value_or(r);
    if (ctx.r < 1 || ctx.r > n) throw EmptyRankError("ExpansionContext: bad rank");
    if (p < 1 || p > ctx.r || p >= n) throw IndexError("ExpansionContext: p out of range");
    ctx.p = p;
    ctx.lambda_p = ctx.lambda(p - 1);
    ctx.delta_p = ctx.lambda(p - 1) - ctx.lambda(p);
    if (!(ctx.delta_p > 0)) throw NoGapError("ExpansionContext: zero gap");
    ctx.e = e;
    ctx.norm_e = spectral_norm(e);
    const Matrix ur = ctx.u.leftCols(ctx.r);
    const Matrix inter = ur.transpose() * e * ur;
    ctx.x = inter.cwiseAbs().maxCoeff();
    ctx.y = 0;
    const Matrix eu = e * ur;
    const Matrix gram = eu.transpose() * eu;
    for (Index i = 0; i < ctx.r; ++i)
      for (Index j = i + 1; j < ctx.r; ++j)
        ctx.y = std::max(ctx.y, std::abs(gram(i, j)));
    ctx.q_proj = Matrix::Identity(n, n) - ur * ur.transpose();
    return ctx;
  }

  /// (zI - A)^{-1} by dense complex LU; the P/Q parts below use the
  /// eigenbasis, which is the point of the expansion.
  ComplexMatrix resolvent(Complex z) const {
    const Index n = u.rows();
    const ComplexMatrix eye = ComplexMatrix::Identity(n, n);
    ComplexMatrix shifted = z * eye - a.cast<Complex>();
    return shifted.partialPivLu().solve(eye);
  }

  ComplexMatrix p_part(Complex z) const {
    ComplexMatrix out = ComplexMatrix::Zero(u.rows(), u.rows());
    for (Index i = 0; i < r; ++i)
      out += (u.col(i) * u.col(i).transpose()).cast<Complex>() / (z - lambda(i));
    return out;
  }

  ComplexMatrix q_part(Complex z) const { return q_proj.cast<Complex>() / z; }
};

struct SeriesReport {
  std::vector<double> term_norms;       // ||F_s|| (spectral), s = 1..s_max
  std::vector<double> partial_residuals;  // ||At_p - A_p - sum_{s'<=s} F_s'||
  double measured_diff = 0;             // ||At_p - A_p||
  double residual = 0;                  // after s_max terms
  double f1_bound = 0;                  // 2||E|| + 3 sqrt(pr) lambda_p x / delta_p
  bool f1_ok = false;
};

/// Expand At_p - A_p = sum_s F_s with
/// F_s = (1/2 pi i) * integral of z (z-A)^{-1} [E (z-A)^{-1}]^s dz and check
/// the partial sums against the directly computed difference. Throws
/// SeriesDiverging when the term norms grow three times in a row.
inline SeriesReport f_series_check(const Matrix& a, const Matrix& e, Index p, int s_max,
                                   const ContourPath& path, const QuadratureSpec& q,
                                   std::optional<double> tol_abs = {}) {
  const ExpansionContext ctx = ExpansionContext::build(a, e, p);
  const Index n = a.rows();
  const Matrix at = a + e;
  const Vector eigs_at = symmetric_eigenvalues(at);
  const double clearance = default_pole_clearance(ctx.delta_p);
  require_pole_clearance(path, ctx.lambda, clearance);
  require_pole_clearance(path, eigs_at, clearance);
  Index enclosed_a = 0, enclosed_at = 0;
  for (Index i = 0; i < n; ++i) {
    if (path.contains(Complex(ctx.lambda(i), 0))) ++enclosed_a;
    if (path.contains(Complex(eigs_at(i), 0))) ++enclosed_at;
  }
  if (enclosed_a != p || enclosed_at != p)
    throw InvalidSpecError("f_series_check: contour does not isolate the top p pair");

  const double tol = tol_abs ? *tol_abs : default_matrix_tol(ctx.lambda(0));
  const ComplexMatrix e_c = e.cast<Complex>();
  const Complex two_pi_i(0.0, kTwoPi);

  auto estimate = [&](int per_edge) {
    std::vector<ComplexMatrix> acc(static_cast<std::size_t>(s_max),
                                   ComplexMatrix::Zero(n, n));
    detail::walk_path(path, per_edge, [&](Complex z, Complex w) {
      const ComplexMatrix res = ctx.resolvent(z);
      ComplexMatrix term = z * res;
      for (int s = 1; s <= s_max; ++s) {
        term = term * e_c * res;
        acc[static_cast<std::size_t>(s - 1)] += term * w;
      }
    });
    for (auto& m : acc) m /= two_pi_i;
    return acc;
  };

  int per_edge = q.nodes_per_edge;
  auto prev = estimate(per_edge);
  bool converged = false;
  for (int d = 0; d < q.max_doublings && !converged; ++d) {
    per_edge *= 2;
    auto cur = estimate(per_edge);
    double worst = 0;
    for (int s = 0; s < s_max; ++s)
      worst = std::max(worst, (cur[static_cast<std::size_t>(s)] -
                               prev[static_cast<std::size_t>(s)])
                                  .norm());
    prev = std::move(cur);
    converged = worst < tol;
  }
  if (!converged)
    throw QuadratureError("f_series_check: not converged", Complex(0, 0), Complex(0, 0));

  SeriesReport rep;
  const Matrix diff = rank_p_approx(svd(at), p) - rank_p_approx(svd(a), p);
  rep.measured_diff = spectral_norm(diff);
  Matrix partial = Matrix::Zero(n, n);
  int growth_streak = 0;
  double prev_norm = -1;
  for (int s = 0; s < s_max; ++s) {
    const Matrix term = prev[static_cast<std::size_t>(s)].real();
    const double norm = spectral_norm(term);
    rep.term_norms.push_back(norm);
    if (prev_norm >= 0 && norm > prev_norm) {
      if (++growth_streak >= 3)
        throw SeriesDivergingError("f_series_check: term norms grew 3 times in a row");
    } else {
      growth_streak = 0;
    }
    prev_norm = norm;
    partial += term;
    rep.partial_residuals.push_back(spectral_norm(diff - partial));
  }
  rep.residual = rep.partial_residuals.back();
  rep.f1_bound = 2.0 * ctx.norm_e +
                 3.0 * std::sqrt(static_cast<double>(p) * static_cast<double>(ctx.r)) *
                     ctx.lambda_p * ctx.x / ctx.delta_p;
  rep.f1_ok = rep.term_norms.front() <= rep.f1_bound + 1e-10;
  return rep;
}

/// Printed operator-term bound: for a product of s+1 resolvent blocks,
/// ||(1/2 pi i) * integral of M(alpha; beta)|| / lambda_p is at most
/// 2/4^s (||E||/lambda_p + r x/delta_p)
///   + r (r y + r^2 x^2)/(lambda_p delta_p) (sqrt(r)||E||/sqrt(lambda_p delta_p))^{s-2}
///   + p (2||E||/lambda_p)^s,
/// the middle term entering for s >= 2 (its exponent is negative otherwise).
inline double mab_bound(const ExpansionContext& ctx, int s) {
  const double r = static_cast<double>(ctx.r);
  const double e_ratio = ctx.norm_e / ctx.lambda_p;
  double total = 2.0 / detail::ipow(4.0, s) * (e_ratio + r * ctx.x / ctx.delta_p);
  if (s >= 2) {
    const double base = std::sqrt(r) * ctx.norm_e / std::sqrt(ctx.lambda_p * ctx.delta_p);
    total += r * (r * ctx.y + r * r * ctx.x * ctx.x) / (ctx.lambda_p * ctx.delta_p) *
             detail::ipow(base, s - 2);
  }
  total += static_cast<double>(ctx.p) * detail::ipow(2.0 * e_ratio, s);
  return total * ctx.lambda_p;
}

struct MabTerm {
  std::string word;  // letters of the product, e.g. "PEQEP"
  std::vector<int> alpha, beta;
  double norm = 0;
  double bound = 0;
  bool pass = false;
};

struct MabReport {
  int s = 0;
  std::vector<MabTerm> terms;
  double f_norm = 0;     // ||F_s|| from the direct integral
  double sum_error = 0;  // || sum of terms - F_s ||
  bool sum_ok = false;
  bool all_bounds_ok = false;
};

inline void to_json(nlohmann::json& j, const MabTerm& t) {
  j = nlohmann::json{{"word", t.word}, {"alpha", t.alpha}, {"beta", t.beta},
                     {"norm", t.norm}, {"bound", t.bound}, {"pass", t.pass}};
}

inline void to_json(nlohmann::json& j, const MabReport& r) {
  j = nlohmann::json{{"s", r.s},           {"f_norm", r.f_norm},
                     {"sum_error", r.sum_error}, {"sum_ok", r.sum_ok},
                     {"all_bounds_ok", r.all_bounds_ok}, {"terms", r.terms}};
}

namespace detail {

/// Run-length blocks of a P/Q word: alpha = Q-run lengths (first and last may
/// be zero), beta = P-run lengths.
inline void word_blocks(const std::vector<bool>& is_p, std::vector<int>& alpha,
                        std::vector<int>& beta) {
  alpha.clear();
  beta.clear();
  std::size_t i = 0;
  const std::size_t len = is_p.size();
  int lead_q = 0;
  while (i < len && !is_p[i]) {
    ++lead_q;
    ++i;
  }
  alpha.push_back(lead_q);
  while (i < len) {
    int run_p = 0;
    while (i < len && is_p[i]) {
      ++run_p;
      ++i;
    }
    beta.push_back(run_p);
    int run_q = 0;
    while (i < len && !is_p[i]) {
      ++run_q;
      ++i;
    }
    alpha.push_back(run_q);
  }
}

}  // namespace detail

/// Enumerate every P/Q composition of z (P+Q) [E (P+Q)]^s for s = 1..s_max,
/// integrate each operator term, check it against the printed bound, and
/// check that the terms of each order sum back to F_s.
inline std::vector<MabReport> m_alpha_beta_check(const Matrix& a, const Matrix& e, Index p,
                                                 int s_max, const ContourPath& path,
                                                 const QuadratureSpec& q,
                                                 double sum_tol_rel = 1e-5,
                                                 std::optional<Index> rank_override = {}) {
  if (s_max < 1 || s_max > 4) throw InvalidSpecError("m_alpha_beta_check: s_max in 1..4");
  const ExpansionContext ctx = ExpansionContext::build(a, e, p, rank_override);
  const Index n = a.rows();
  require_pole_clearance(path, ctx.lambda, default_pole_clearance(ctx.delta_p));
  const double tol_word = 1e-8 * std::max(ctx.lambda(0), 1.0);
  const ComplexMatrix e_c = e.cast<Complex>();

  std::vector<MabReport> reports;
  for (int s = 1; s <= s_max; ++s) {
    MabReport rep;
    rep.s = s;

    auto f_s = [&](Complex z) -> ComplexMatrix {
      const ComplexMatrix res = ctx.resolvent(z);
      ComplexMatrix term = z * res;
      for (int k = 0; k < s; ++k) term = term * e_c * res;
      return term;
    };
    const ComplexMatrix direct = integrate_matrix(f_s, path, q, n, n, tol_word);
    rep.f_norm = spectral_norm(direct.real());

    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    rep.all_bounds_ok = true;
    const int letters = s + 1;
    for (int mask = 0; mask < (1 << letters); ++mask) {
      std::vector<bool> is_p(static_cast<std::size_t>(letters));
      std::string word;
      for (int l = 0; l < letters; ++l) {
        is_p[static_cast<std::size_t>(l)] = (mask >> l) & 1;
        if (l) word += 'E';
        word += is_p[static_cast<std::size_t>(l)] ? 'P' : 'Q';
      }
      auto f_word = [&](Complex z) -> ComplexMatrix {
        const ComplexMatrix pp = ctx.p_part(z);
        const ComplexMatrix qq = ctx.q_part(z);
        ComplexMatrix term = z * (is_p[0] ? pp : qq);
        for (int l = 1; l < letters; ++l)
          term = term * e_c * (is_p[static_cast<std::size_t>(l)] ? pp : qq);
        return term;
      };
      const ComplexMatrix integral = integrate_matrix(f_word, path, q, n, n, tol_word);
      sum += integral;

      MabTerm term;
      term.word = word;
      detail::word_blocks(is_p, term.alpha, term.beta);
      term.norm = spectral_norm(integral.real());
      term.bound = mab_bound(ctx, s);
      term.pass = term.norm <= term.bound + 1e-10;
      if (!term.pass) rep.all_bounds_ok = false;
      rep.terms.push_back(std::move(term));
    }
    rep.sum_error = spectral_norm((sum - direct).real());
    rep.sum_ok = rep.sum_error <= sum_tol_rel * ctx.lambda_p;
    reports.push_back(std::move(rep));
  }
  return reports;
}

}  // namespace rankp
