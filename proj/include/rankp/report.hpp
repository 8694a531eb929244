#pragma once

#include "rankp/bounds.hpp"
#include "rankp/io.hpp"
#include "rankp/noise.hpp"
#include "rankp/skewness.hpp"
#include "rankp/spectral.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace rankp {

/// Everything measured and evaluated for one (A, E, p) pair. Optional bounds
/// are present exactly when their assumption gate passed; the gate left-hand
/// sides are always recorded so near-misses stay visible.
struct BoundReport {
  int trial = 0;
  std::uint64_t seed = 0;
  Index m = 0, n = 0, p = 0, r = 0;

  double sigma_1 = 0, sigma_p = 0, sigma_p1 = 0, delta_p = 0;
  std::optional<double> delta_S;
  std::optional<Index> positive_count;
  bool is_symmetric = false;
  bool is_psd = false;

  double norm_e = 0, x = 0, y = 0;
  std::optional<double> mu;
  double measured_error = 0;

  double gate_lhs = 0;  // max of the three smallness ratios (delta_p form)
  bool gate96_pass = false;
  bool gate24_pass = false;
  std::optional<double> c0_lhs;
  std::optional<bool> c0_pass;

  double eym = 0;
  bool dk_gate_pass = false;
  std::optional<double> dk_projection, dk_lowrank;
  std::optional<double> main_bound, psd_bound, symmetric_bound;
  std::optional<double> a1_bound, a1_fail_prob;
  std::optional<double> a3_bound, a3_fail_prob;
  std::optional<double> a4_bound, a4_fail_prob;
};

inline const std::vector<std::string>& bound_report_columns() {
  static const std::vector<std::string> cols = {
      "trial",      "seed",        "m",           "n",
      "p",          "r",           "sigma_1",     "sigma_p",
      "sigma_p1",   "delta_p",     "delta_s",     "positive_count",
      "is_symmetric", "is_psd",    "norm_e",      "x",
      "y",          "mu",          "measured_error", "gate_lhs",
      "gate96_pass", "gate24_pass", "c0_lhs",     "c0_pass",
      "eym",        "dk_gate_pass", "dk_projection", "dk_lowrank",
      "main_bound", "psd_bound",   "symmetric_bound", "a1_bound",
      "a1_fail_prob", "a3_bound",  "a3_fail_prob", "a4_bound",
      "a4_fail_prob"};
  return cols;
}

namespace detail {
inline std::string opt_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}
inline std::string opt_cell(const std::optional<bool>& v) {
  return v ? std::string(*v ? "1" : "0") : std::string();
}
inline std::string opt_cell(const std::optional<Index>& v) {
  return v ? std::to_string(*v) : std::string();
}
}  // namespace detail

inline std::string bound_report_csv_header() {
  std::string line;
  for (const auto& c : bound_report_columns()) {
    if (!line.empty()) line += ',';
    line += c;
  }
  return line;
}

inline std::string to_csv_row(const BoundReport& r) {
  using detail::opt_cell;
  std::vector<std::string> cells = {
      std::to_string(r.trial),
      std::to_string(r.seed),
      std::to_string(r.m),
      std::to_string(r.n),
      std::to_string(r.p),
      std::to_string(r.r),
      format_double(r.sigma_1),
      format_double(r.sigma_p),
      format_double(r.sigma_p1),
      format_double(r.delta_p),
      opt_cell(r.delta_S),
      opt_cell(r.positive_count),
      r.is_symmetric ? "1" : "0",
      r.is_psd ? "1" : "0",
      format_double(r.norm_e),
      format_double(r.x),
      format_double(r.y),
      opt_cell(r.mu),
      format_double(r.measured_error),
      format_double(r.gate_lhs),
      r.gate96_pass ? "1" : "0",
      r.gate24_pass ? "1" : "0",
      opt_cell(r.c0_lhs),
      opt_cell(r.c0_pass),
      format_double(r.eym),
      r.dk_gate_pass ? "1" : "0",
      opt_cell(r.dk_projection),
      opt_cell(r.dk_lowrank),
      opt_cell(r.main_bound),
      opt_cell(r.psd_bound),
      opt_cell(r.symmetric_bound),
      opt_cell(r.a1_bound),
      opt_cell(r.a1_fail_prob),
      opt_cell(r.a3_bound),
      opt_cell(r.a3_fail_prob),
      opt_cell(r.a4_bound),
      opt_cell(r.a4_fail_prob)};
  std::string line;
  for (const auto& c : cells) {
    if (!line.empty()) line += ',';
    line += c;
  }
  return line;
}

inline void to_json(nlohmann::json& j, const BoundReport& r) {
  j = nlohmann::json{{"trial", r.trial},
                     {"seed", r.seed},
                     {"m", r.m},
                     {"n", r.n},
                     {"p", r.p},
                     {"r", r.r},
                     {"sigma_1", r.sigma_1},
                     {"sigma_p", r.sigma_p},
                     {"sigma_p1", r.sigma_p1},
                     {"delta_p", r.delta_p},
                     {"is_symmetric", r.is_symmetric},
                     {"is_psd", r.is_psd},
                     {"norm_e", r.norm_e},
                     {"x", r.x},
                     {"y", r.y},
                     {"measured_error", r.measured_error},
                     {"gate_lhs", r.gate_lhs},
                     {"gate96_pass", r.gate96_pass},
                     {"gate24_pass", r.gate24_pass},
                     {"eym", r.eym},
                     {"dk_gate_pass", r.dk_gate_pass}};
  auto put = [&j](const char* key, const auto& opt) {
    if (opt) j[key] = *opt;
  };
  put("delta_s", r.delta_S);
  put("positive_count", r.positive_count);
  put("mu", r.mu);
  put("c0_lhs", r.c0_lhs);
  put("c0_pass", r.c0_pass);
  put("dk_projection", r.dk_projection);
  put("dk_lowrank", r.dk_lowrank);
  put("main_bound", r.main_bound);
  put("psd_bound", r.psd_bound);
  put("symmetric_bound", r.symmetric_bound);
  put("a1_bound", r.a1_bound);
  put("a1_fail_prob", r.a1_fail_prob);
  put("a3_bound", r.a3_bound);
  put("a3_fail_prob", r.a3_fail_prob);
  put("a4_bound", r.a4_bound);
  put("a4_fail_prob", r.a4_fail_prob);
}

/// What the random-noise theorems may assume about E's model.
struct NoiseContext {
  bool bounded_model = false;   // K and sigma^2 are known
  bool independent_entries = false;
  bool iid_unit_variance = false;
  double K = 0;
  double sigma2 = 0;
  std::optional<VarianceProfile> profile;  // per-entry variances when non-constant
};

/// Derive the model context for a noise spec; `ground` is needed only for the
/// sampling kind (its variances depend on the hidden matrix).
inline NoiseContext noise_context(const NoiseSpec& spec, const Matrix& ground) {
  NoiseContext ctx;
  switch (spec.kind) {
    case NoiseKind::wigner:
      // Mirrored entries are not independent; the appendix theorems stay off.
      ctx.bounded_model = false;
      break;
    case NoiseKind::iid_bounded: {
      ctx.bounded_model = true;
      ctx.independent_entries = true;
      ctx.K = std::min(spec.K, std::sqrt(3.0 * spec.sigma2));
      ctx.sigma2 = spec.sigma2;
      ctx.iid_unit_variance = std::abs(spec.sigma2 - 1.0) < 1e-12;
      break;
    }
    case NoiseKind::profile: {
      ctx.bounded_model = true;
      ctx.independent_entries = true;
      ctx.profile = spec.profile();
      ctx.K = spec.K;
      ctx.sigma2 = ctx.profile->sigma_max2();
      break;
    }
    case NoiseKind::sampling: {
      ctx.bounded_model = true;
      ctx.independent_entries = true;
      ctx.profile = sampling_noise_profile(ground, spec.rho, spec.entry_noise.get());
      ctx.K = ctx.profile->bound_K;
      ctx.sigma2 = ctx.profile->sigma_max2();
      break;
    }
  }
  return ctx;
}

struct PairInputs {
  Index p = 1;
  std::optional<Index> r;  // defaults to the numerical rank of A
  double t1 = 1.0;
  double t2 = 1.0;
  int trial = 0;
  std::uint64_t seed = 0;
};

/// Evaluate every bound of the toolkit on one perturbation pair. Gates decide
/// which optional bounds are filled in; nothing here is an error condition
/// except an undefined gap.
inline BoundReport evaluate_pair(const Matrix& a, const Matrix& e, const PairInputs& in,
                                 const NoiseContext& noise = {}) {
  require_same_shape(a, e, "evaluate_pair");
  BoundReport rep;
  rep.trial = in.trial;
  rep.seed = in.seed;
  rep.m = a.rows();
  rep.n = a.cols();
  rep.p = in.p;

  const SpectralDecomposition dec_a = svd(a);
  const Index r = in.r.value_or(dec_a.numerical_rank);
  if (r < 1) throw EmptyRankError("evaluate_pair: zero rank");
  rep.r = r;

  const GapReport gap = gaps(dec_a, in.p);
  rep.sigma_1 = dec_a.singular_values(0);
  rep.sigma_p = gap.sigma_p;
  rep.sigma_p1 = gap.sigma_p_plus_1;
  rep.delta_p = gap.delta_p;

  const Matrix at = a + e;
  const SpectralDecomposition dec_at = svd(at);
  rep.measured_error =
      spectral_norm(rank_p_approx(dec_at, in.p) - rank_p_approx(dec_a, in.p));
  rep.norm_e = spectral_norm(e);
  rep.x = compute_x(dec_a, e, r);
  rep.y = compute_y(dec_a, e, r);
  if (noise.profile) rep.mu = compute_mu(dec_a, *noise.profile, r);

  rep.is_symmetric = a.rows() == a.cols() && a == a.transpose();
  std::optional<Vector> eigs;
  if (rep.is_symmetric) {
    eigs = symmetric_eigenvalues(a);
    rep.is_psd = (*eigs)(eigs->size() - 1) >= -1e-10 * rep.sigma_1;
    const GapReport sym_gap = gaps(dec_a, in.p, eigs);
    rep.delta_S = sym_gap.delta_S;
    rep.positive_count = sym_gap.positive_count;
  }

  rep.eym = eym_bound(rep.sigma_p1, rep.norm_e);

  if (rep.delta_p > 0) {
    const DkBounds dk = dk_bounds(rep.sigma_1, rep.delta_p, rep.norm_e);
    rep.dk_gate_pass = dk.gate_pass;
    rep.dk_projection = dk.projection;
    rep.dk_lowrank = dk.lowrank;

    rep.gate_lhs =
        main_assumption(in.p, r, rep.norm_e, rep.sigma_p, rep.delta_p, rep.x, 1.0).lhs;
    rep.gate96_pass = rep.gate_lhs <= kGateRectangular;
    rep.gate24_pass = rep.gate_lhs <= kGateSymmetric;

    if (rep.gate96_pass)
      rep.main_bound = main_bound_value(r, rep.norm_e, rep.sigma_p, rep.delta_p, rep.x,
                                        rep.y, kConstRectangular);
    const bool symmetric_pair = rep.is_symmetric && e == e.transpose();
    if (symmetric_pair && rep.gate24_pass) {
      if (rep.is_psd)
        rep.psd_bound = main_bound_value(r, rep.norm_e, rep.sigma_p, rep.delta_p, rep.x,
                                         rep.y, kConstSymmetric);
      if (rep.delta_S && *rep.delta_S > 0)
        rep.symmetric_bound = main_bound_value(r, rep.norm_e, rep.sigma_p, *rep.delta_S,
                                               rep.x, rep.y, kConstSymmetric);
    }

    if (noise.bounded_model && noise.independent_entries) {
      const GateResult c0 =
          random_gate_c0(in.p, r, in.t1, rep.norm_e, rep.sigma_p, rep.delta_p);
      rep.c0_lhs = c0.lhs;
      rep.c0_pass = c0.pass;
      if (c0.pass) {
        RandomBoundInputs rb;
        rb.p = in.p;
        rb.r = r;
        rb.m = rep.m;
        rb.n = rep.n;
        rb.t1 = in.t1;
        rb.t2 = in.t2;
        rb.norm_e = rep.norm_e;
        rb.sigma_p = rep.sigma_p;
        rb.delta_p = rep.delta_p;
        rb.K = noise.K;
        rb.sigma2 = noise.sigma2;
        rb.mu = rep.mu.value_or(0.0);
        if (noise.profile)
          rb.m4 = compute_m4(*noise.profile);
        else
          rb.m4 = noise.sigma2 * noise.sigma2;  // constant variance grid
        if (noise.iid_unit_variance) {
          const RandomBound b = random_bound_theorems(RandomVariant::iid_K, rb);
          rep.a1_bound = b.bound;
          rep.a1_fail_prob = b.fail_prob;
        }
        {
          const RandomBound b = random_bound_theorems(RandomVariant::profile_Ksigma, rb);
          rep.a3_bound = b.bound;
          rep.a3_fail_prob = b.fail_prob;
        }
        {
          const RandomBound b = random_bound_theorems(RandomVariant::trivial, rb);
          rep.a4_bound = b.bound;
          rep.a4_fail_prob = b.fail_prob;
        }
      }
    }
  }
  return rep;
}

}  // namespace rankp
