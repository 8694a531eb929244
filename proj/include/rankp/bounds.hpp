#pragma once

#include "rankp/core.hpp"

#include <algorithm>
#include <cmath>

namespace rankp {

// Assumption-gate thresholds and leading constants. The rectangular theorem
// pays a factor for the symmetrization step, hence the larger pair.
constexpr double kGateRectangular = 1.0 / 96.0;
constexpr double kGateSymmetric = 1.0 / 24.0;
constexpr double kConstRectangular = 32.0;
constexpr double kConstSymmetric = 8.0;

/// Unconditional baseline: 2 (sigma_{p+1} + ||E||).
inline double eym_bound(double sigma_p1, double norm_e) {
  if (sigma_p1 < 0 || norm_e < 0) throw InvalidSpecError("eym_bound: negative input");
  return 2.0 * (sigma_p1 + norm_e);
}

struct DkBounds {
  std::optional<double> projection;  // 2||E|| / delta_p
  std::optional<double> lowrank;     // 4||E|| sigma_1 / delta_p
  bool gate_pass = false;            // delta_p >= 2||E||
};

/// Davis-Kahan projection bound and its low-rank corollary. Both values are
/// reported only in the regime where the projection bound is meaningful,
/// delta_p >= 2||E||.
inline DkBounds dk_bounds(double sigma_1, double delta_p, double norm_e) {
  if (delta_p <= 0) throw NoGapError("dk_bounds: delta_p <= 0");
  DkBounds out;
  out.gate_pass = delta_p >= 2.0 * norm_e;
  if (out.gate_pass) {
    out.projection = 2.0 * norm_e / delta_p;
    out.lowrank = 4.0 * norm_e * sigma_1 / delta_p;
  }
  return out;
}

struct GateResult {
  double lhs = 0;
  bool pass = false;
};

/// Smallness assumption max{ p||E||/sigma_p, r^2 x/delta, sqrt(r)||E||/sqrt(sigma_p delta) }
/// against the given threshold (1/96 rectangular, 1/24 symmetric).
inline GateResult main_assumption(Index p, Index r, double norm_e, double sigma_p,
                                  double delta, double x, double threshold) {
  if (sigma_p <= 0 || delta <= 0) throw NoGapError("main_assumption: needs sigma_p > 0, delta > 0");
  GateResult g;
  const double t1 = static_cast<double>(p) * norm_e / sigma_p;
  const double t2 = static_cast<double>(r) * static_cast<double>(r) * x / delta;
  const double t3 = std::sqrt(static_cast<double>(r)) * norm_e / std::sqrt(sigma_p * delta);
  g.lhs = std::max({t1, t2, t3});
  g.pass = g.lhs <= threshold;
  return g;
}

/// constant * sigma_p ( ||E||/sigma_p + r x / delta + r^2 y / (sigma_p delta) ).
/// Plain formula; gate handling lives in the callers below.
inline double main_bound_value(Index r, double norm_e, double sigma_p, double delta,
                               double x, double y, double constant) {
  const double rr = static_cast<double>(r);
  return constant * sigma_p * (norm_e / sigma_p + rr * x / delta + rr * rr * y / (sigma_p * delta));
}

/// Rectangular main theorem: gate at 1/96 with delta_p, constant 32.
inline double main_bound(Index p, Index r, double norm_e, double sigma_p, double delta_p,
                         double x, double y) {
  if (!main_assumption(p, r, norm_e, sigma_p, delta_p, x, kGateRectangular).pass)
    throw NotApplicableError("main_bound: assumption gate failed");
  return main_bound_value(r, norm_e, sigma_p, delta_p, x, y, kConstRectangular);
}

/// PSD theorem: gate at 1/24 with delta_p, constant 8.
inline double psd_bound(Index p, Index r, double norm_e, double sigma_p, double delta_p,
                        double x, double y) {
  if (!main_assumption(p, r, norm_e, sigma_p, delta_p, x, kGateSymmetric).pass)
    throw NotApplicableError("psd_bound: assumption gate failed");
  return main_bound_value(r, norm_e, sigma_p, delta_p, x, y, kConstSymmetric);
}

/// Symmetric indefinite theorem: the hypothesis is gated on delta_p (as
/// printed) while the bound itself uses the eigenvalue gap delta_S.
inline double symmetric_bound(Index p, Index r, double norm_e, double sigma_p,
                              double delta_p, double delta_S, double x, double y) {
  if (delta_S <= 0) throw NoGapError("symmetric_bound: delta_S <= 0");
  if (!main_assumption(p, r, norm_e, sigma_p, delta_p, x, kGateSymmetric).pass)
    throw NotApplicableError("symmetric_bound: assumption gate failed");
  return main_bound_value(r, norm_e, sigma_p, delta_S, x, y, kConstSymmetric);
}

/// Random-noise gate (C0): max{ p eps1, r^2 t1 eps2, sqrt(r eta) } <= 1/96
/// with eps1 = ||E||/sigma_p, eps2 = 1/delta_p, eta = ||E||^2/(sigma_p delta_p).
inline GateResult random_gate_c0(Index p, Index r, double t1, double norm_e,
                                 double sigma_p, double delta_p) {
  if (sigma_p <= 0 || delta_p <= 0) throw NoGapError("random_gate_c0: needs positive denominators");
  const double eps1 = norm_e / sigma_p;
  const double eps2 = 1.0 / delta_p;
  const double eta = norm_e * norm_e / (sigma_p * delta_p);
  GateResult g;
  g.lhs = std::max({static_cast<double>(p) * eps1,
                    static_cast<double>(r) * static_cast<double>(r) * t1 * eps2,
                    std::sqrt(static_cast<double>(r) * eta)});
  g.pass = g.lhs <= kGateRectangular;
  return g;
}

enum class RandomVariant { iid_K, profile_Ksigma, trivial };

struct RandomBoundInputs {
  Index p = 1;
  Index r = 1;
  Index m = 0;   // matrix dimensions, used by the tail terms
  Index n = 0;
  double t1 = 1;
  double t2 = 1;
  double norm_e = 0;
  double sigma_p = 1;
  double delta_p = 1;
  double K = 1;      // a.s. entry bound
  double sigma2 = 1; // variance bound (profile variants)
  double m4 = 0;     // max mean fourth moment of the entry sigmas
  double mu = 0;     // mean correction (profile variant)
};

struct RandomBound {
  double bound = 0;
  double fail_prob = 0;  // clamped to [0, 1]
};

/// Random-noise theorems. Variant iid_K assumes iid K-bounded unit-variance
/// entries; profile_Ksigma allows independent (K, sigma)-bounded entries with
/// the mean correction mu; trivial replaces the fourth-moment machinery by
/// y <= ||E||^2. Tail denominators follow the printed statements (4 + K t1
/// for the iid case, 2 sigma^2 + K t1 otherwise).
inline RandomBound random_bound_theorems(RandomVariant variant, const RandomBoundInputs& in) {
  if (!random_gate_c0(in.p, in.r, in.t1, in.norm_e, in.sigma_p, in.delta_p).pass)
    throw NotApplicableError("random_bound_theorems: C0 gate failed");
  const double r = static_cast<double>(in.r);
  const double ratio = in.sigma_p / in.delta_p;
  RandomBound out;
  double prob = 0;
  const double exp_tail = [&] {
    const double denom = (variant == RandomVariant::iid_K) ? 4.0 + in.K * in.t1
                                                           : 2.0 * in.sigma2 + in.K * in.t1;
    return r * r * std::exp(-(in.t1 * in.t1 / 2.0) / denom);
  }();
  switch (variant) {
    case RandomVariant::iid_K:
      out.bound = 32.0 * (in.norm_e + r * in.t1 * ratio + r * r * in.t2 / in.delta_p);
      prob = exp_tail + 5.0 * r * (r - 1.0) * static_cast<double>(in.m + in.n) * in.m4 /
                            (in.t2 * in.t2);
      break;
    case RandomVariant::profile_Ksigma:
      out.bound = 32.0 * (in.norm_e + r * in.t1 * ratio + r * r * (in.t2 + in.mu) / in.delta_p);
      prob = exp_tail + 5.0 * r * (r - 1.0) * static_cast<double>(in.n) * in.m4 /
                            (2.0 * in.t2 * in.t2);
      break;
    case RandomVariant::trivial:
      out.bound = 32.0 * (in.norm_e + r * in.t1 * ratio +
                          r * r * in.norm_e * in.norm_e / in.delta_p);
      prob = exp_tail;
      break;
  }
  out.fail_prob = std::clamp(prob, 0.0, 1.0);
  return out;
}

struct SamplingBound {
  double bound = 0;          // the trivial-variant bound evaluated on the sampling noise
  double fail_prob = 0;
  bool gate_pass = false;    // C0 status; the bound is certified only when this holds
  double diag_sqrt_term = 0; // sqrt(n / rho)
  double diag_mid_term = 0;  // n / (rho delta_p)
  double diag_last_term = 0; // sigma_p / (sqrt(rho) delta_p)
};

/// Missing-entry application: evaluates the trivial-variant bound for the
/// rescaled sampling noise E = rho^{-1} A_Omega - A. The asymptotic form of
/// the missing-entry theorem is reported only as the structural diagnostic
/// terms, never as a certified number.
inline SamplingBound sampling_bound(double rho, const RandomBoundInputs& in) {
  if (!(rho > 0) || rho > 1) throw InvalidDensityError("sampling_bound: rho outside (0, 1]");
  SamplingBound out;
  out.gate_pass = random_gate_c0(in.p, in.r, in.t1, in.norm_e, in.sigma_p, in.delta_p).pass;
  const double r = static_cast<double>(in.r);
  out.bound = 32.0 * (in.norm_e + r * in.t1 * in.sigma_p / in.delta_p +
                      r * r * in.norm_e * in.norm_e / in.delta_p);
  const double denom = 2.0 * in.sigma2 + in.K * in.t1;
  out.fail_prob = std::clamp(r * r * std::exp(-(in.t1 * in.t1 / 2.0) / denom), 0.0, 1.0);
  const double n = static_cast<double>(std::max(in.m, in.n));
  out.diag_sqrt_term = std::sqrt(n / rho);
  out.diag_mid_term = n / (rho * in.delta_p);
  out.diag_last_term = in.sigma_p / (std::sqrt(rho) * in.delta_p);
  return out;
}

}  // namespace rankp
