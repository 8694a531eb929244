#pragma once

#include "rankp/spectral.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace rankp {

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Axis-aligned rectangle in the complex plane, traversed counterclockwise.
/// It encloses exactly the real points of (left, right).
struct RectContour {
  double left = 0;
  double right = 1;
  double half_height = 1;

  RectContour() = default;
  RectContour(double l, double r, double h) : left(l), right(r), half_height(h) {
    if (!(left < right) || !(half_height > 0))
      throw InvalidSpecError("RectContour: need left < right and half_height > 0");
  }

  bool contains(Complex z) const {
    return z.real() > left && z.real() < right && std::abs(z.imag()) < half_height;
  }

  /// Distance from a point to the rectangle's perimeter.
  double path_distance(Complex z) const {
    const double x = z.real(), y = std::abs(z.imag());
    if (x >= left && x <= right && y <= half_height)
      return std::min({x - left, right - x, half_height - y});
    double best = std::numeric_limits<double>::infinity();
    auto seg = [&best, x, y](double ax, double ay, double bx, double by) {
      const double tx = std::clamp(x, std::min(ax, bx), std::max(ax, bx));
      const double ty = std::clamp(y, std::min(ay, by), std::max(ay, by));
      best = std::min(best, std::hypot(x - tx, y - ty));
    };
    seg(left, half_height, right, half_height);
    seg(left, -half_height, right, -half_height);
    seg(left, -half_height, left, half_height);
    seg(right, -half_height, right, half_height);
    return best;
  }

  double perimeter() const { return 2 * (right - left) + 4 * half_height; }
};

/// One or two disjoint rectangles.
struct ContourPath {
  std::vector<RectContour> rects;

  ContourPath() = default;
  explicit ContourPath(RectContour r) : rects{r} {}
  ContourPath(RectContour a, RectContour b) : rects{a, b} {
    const bool disjoint = a.right < b.left || b.right < a.left;
    if (!disjoint) throw InvalidSpecError("ContourPath: rectangles overlap");
  }

  bool contains(Complex z) const {
    for (const auto& r : rects)
      if (r.contains(z)) return true;
    return false;
  }

  double path_distance(Complex z) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : rects) best = std::min(best, r.path_distance(z));
    return best;
  }
};

struct QuadratureSpec {
  int nodes_per_edge = 64;  // power of two, >= 16
  double tol = 1e-9;
  int max_doublings = 10;

  void validate() const {
    if (nodes_per_edge < 16 || (nodes_per_edge & (nodes_per_edge - 1)))
      throw InvalidSpecError("QuadratureSpec: nodes_per_edge must be a power of two >= 16");
    if (!(tol > 0)) throw InvalidSpecError("QuadratureSpec: tol must be positive");
    if (max_doublings < 0) throw InvalidSpecError("QuadratureSpec: negative max_doublings");
  }
};

inline double default_matrix_tol(double norm_a) { return 1e-7 * std::max(norm_a, 1e-300); }
inline double default_pole_clearance(double delta) { return delta / 4.0; }

/// Rectangle of the positive-spectrum construction: left edge bisecting
/// (lambda_{p+1}, lambda_p), right edge through ||A|| + 1.1 ||E||,
/// half_height = right - left (any positive height is analytically
/// equivalent; fixing it keeps runs reproducible).
inline RectContour build_contour_psd(const Vector& eigs, Index p, double norm_e) {
  if (p < 1 || p >= eigs.size()) throw NoGapError("build_contour_psd: p out of range");
  const double lam_p = eigs(p - 1), lam_p1 = eigs(p);
  if (!(lam_p > lam_p1)) throw NoGapError("build_contour_psd: zero gap");
  const double left = 0.5 * (lam_p + lam_p1);
  const double right = eigs.cwiseAbs().maxCoeff() + 1.1 * norm_e;
  return RectContour(left, right, right - left);
}

inline RectContour build_contour_psd(const SpectralDecomposition& dec, Index p,
                                     double norm_e) {
  return build_contour_psd(dec.singular_values, p, norm_e);
}

/// Two-rectangle construction for an indefinite symmetric spectrum: one
/// rectangle right of sigma_p - delta_p/2 around the k leading positive
/// eigenvalues, a mirrored one left of -sigma_p + delta_p/2 around the p - k
/// leading negative ones. Degenerate splits (k = 0 or k = p) give a single
/// rectangle.
inline ContourPath build_contour_symmetric(const Vector& eigs, Index p, double norm_e = 0) {
  const Index n = eigs.size();
  if (p < 1 || p >= n) throw NoGapError("build_contour_symmetric: p out of range");
  for (Index i = 0; i + 1 < n; ++i)
    if (eigs(i) < eigs(i + 1))
      throw InvalidSpecError("build_contour_symmetric: eigenvalues not sorted");
  // Leading-magnitude selection, ties to the positive side.
  Index front = 0, back = n - 1, k = 0;
  for (Index taken = 0; taken < p; ++taken) {
    if (std::abs(eigs(front)) >= std::abs(eigs(back))) {
      ++front;
      ++k;
    } else {
      --back;
    }
  }
  Vector magnitudes = eigs.cwiseAbs();
  std::sort(magnitudes.data(), magnitudes.data() + n, std::greater<double>());
  const double sigma_p = magnitudes(p - 1), sigma_p1 = magnitudes(p);
  const double delta_p = sigma_p - sigma_p1;
  if (!(delta_p > 0)) throw NoGapError("build_contour_symmetric: zero gap");
  const double pad = std::max(1.1 * norm_e, 0.5 * delta_p);

  std::optional<RectContour> right_rect, left_rect;
  if (k > 0) {
    const double l = sigma_p - 0.5 * delta_p;
    const double r = eigs(0) + pad;
    right_rect = RectContour(l, r, r - l);
  }
  if (k < p) {
    const double r = -sigma_p + 0.5 * delta_p;
    const double l = eigs(n - 1) - pad;
    left_rect = RectContour(l, r, r - l);
  }
  if (right_rect && left_rect) return ContourPath(*left_rect, *right_rect);
  return ContourPath(right_rect ? *right_rect : *left_rect);
}

namespace detail {

/// Nodes of one rectangle, counterclockwise, per_edge nodes per edge
/// (corners shared between adjacent edges).
inline std::vector<Complex> rect_nodes(const RectContour& r, int per_edge) {
  std::vector<Complex> nodes;
  nodes.reserve(static_cast<std::size_t>(4) * per_edge);
  const double w = r.right - r.left, h = r.half_height;
  for (int i = 0; i < per_edge; ++i)  // bottom: left -> right
    nodes.emplace_back(r.left + w * i / per_edge, -h);
  for (int i = 0; i < per_edge; ++i)  // right: -h -> +h
    nodes.emplace_back(r.right, -h + 2 * h * i / per_edge);
  for (int i = 0; i < per_edge; ++i)  // top: right -> left
    nodes.emplace_back(r.right - w * i / per_edge, h);
  for (int i = 0; i < per_edge; ++i)  // left: +h -> -h
    nodes.emplace_back(r.left, h - 2 * h * i / per_edge);
  return nodes;
}

/// Closed-polyline trapezoid rule: each node carries weight
/// (z_next - z_prev) / 2. Summation order is fixed (node order).
template <class Visit>
void walk_path(const ContourPath& path, int per_edge, Visit&& visit) {
  for (const auto& rect : path.rects) {
    const auto nodes = rect_nodes(rect, per_edge);
    const std::size_t n = nodes.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Complex prev = nodes[(i + n - 1) % n];
      const Complex next = nodes[(i + 1) % n];
      visit(nodes[i], (next - prev) / 2.0);
    }
  }
}

}  // namespace detail

/// (1/2 pi i) times the contour integral of a scalar integrand. Node counts
/// double until two successive estimates agree to tol.
template <class F>
Complex integrate_scalar(F&& f, const ContourPath& path, const QuadratureSpec& q) {
  q.validate();
  const Complex two_pi_i(0.0, kTwoPi);
  auto estimate = [&](int per_edge) {
    Complex sum = 0;
    detail::walk_path(path, per_edge, [&](Complex z, Complex w) { sum += f(z) * w; });
    return sum / two_pi_i;
  };
  int per_edge = q.nodes_per_edge;
  Complex prev = estimate(per_edge);
  Complex cur = prev;
  for (int d = 0; d < q.max_doublings; ++d) {
    per_edge *= 2;
    cur = estimate(per_edge);
    if (std::abs(cur - prev) < q.tol) return cur;
    prev = cur;
  }
  throw QuadratureError("integrate_scalar: not converged", prev, cur);
}

/// Matrix-valued version; convergence is measured in Frobenius norm against
/// an absolute tolerance supplied by the caller (default 1e-7 ||A||).
template <class F>
ComplexMatrix integrate_matrix(F&& f, const ContourPath& path, const QuadratureSpec& q,
                               Index rows, Index cols, double tol_abs) {
  q.validate();
  const Complex two_pi_i(0.0, kTwoPi);
  auto estimate = [&](int per_edge) {
    ComplexMatrix sum = ComplexMatrix::Zero(rows, cols);
    detail::walk_path(path, per_edge, [&](Complex z, Complex w) { sum += f(z) * w; });
    return ComplexMatrix(sum / two_pi_i);
  };
  int per_edge = q.nodes_per_edge;
  ComplexMatrix prev = estimate(per_edge);
  double last_diff = std::numeric_limits<double>::infinity();
  for (int d = 0; d < q.max_doublings; ++d) {
    per_edge *= 2;
    ComplexMatrix cur = estimate(per_edge);
    last_diff = (cur - prev).norm();
    if (last_diff < tol_abs) return cur;
    prev = std::move(cur);
  }
  throw QuadratureError("integrate_matrix: not converged (last diff " +
                            std::to_string(last_diff) + ")",
                        Complex(prev.norm(), 0), Complex(last_diff, 0));
}

inline void require_pole_clearance(const ContourPath& path, const Vector& poles,
                                   double clearance) {
  for (Index i = 0; i < poles.size(); ++i)
    if (path.path_distance(Complex(poles(i), 0)) < clearance)
      throw PoleClearanceError("contour passes within clearance of a pole");
}

/// Numerical spectral projection: (1/2 pi i) * contour integral of
/// z (zI - A)^{-1} dz over a path enclosing the wanted eigenvalues. A dense
/// complex LU solve runs at every node. Matches the signed truncation of A
/// to the enclosed eigenvalues.
inline Matrix resolvent_projection(const Matrix& a, const ContourPath& path,
                                   const QuadratureSpec& q,
                                   std::optional<double> pole_clearance = {},
                                   std::optional<double> tol_abs = {}) {
  require_finite(a, "resolvent_projection");
  if (a.rows() != a.cols()) throw ShapeError("resolvent_projection: not square");
  if (a != a.transpose()) throw ShapeError("resolvent_projection: not symmetric");
  const Index n = a.rows();
  const Vector eigs = symmetric_eigenvalues(a);

  double clearance;
  if (pole_clearance) {
    clearance = *pole_clearance;
  } else {
    // delta/4 where delta is the smallest enclosed-to-excluded eigenvalue split
    double split = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (!path.contains(Complex(eigs(i), 0))) continue;
      for (Index j = 0; j < n; ++j)
        if (!path.contains(Complex(eigs(j), 0)))
          split = std::min(split, std::abs(eigs(i) - eigs(j)));
    }
    clearance = std::isfinite(split) ? default_pole_clearance(split)
                                     : default_pole_clearance(1.0);
  }
  require_pole_clearance(path, eigs, clearance);

  const double tol = tol_abs ? *tol_abs : default_matrix_tol(eigs.cwiseAbs().maxCoeff());
  const ComplexMatrix eye = ComplexMatrix::Identity(n, n);
  auto f = [&](Complex z) -> ComplexMatrix {
    ComplexMatrix shifted = z * eye - a.cast<Complex>();
    return z * shifted.partialPivLu().solve(eye);
  };
  const ComplexMatrix integral = integrate_matrix(f, path, q, n, n, tol);
  return integral.real();
}

}  // namespace rankp
