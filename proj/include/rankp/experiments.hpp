#pragma once

#include "rankp/report.hpp"
#include "rankp/rng.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

namespace rankp {

// --- ground matrices --------------------------------------------------------

enum class GroundFamily { psd, symmetric, rectangular, fig1 };

inline std::string to_string(GroundFamily f) {
  switch (f) {
    case GroundFamily::psd: return "psd";
    case GroundFamily::symmetric: return "symmetric";
    case GroundFamily::rectangular: return "rectangular";
    case GroundFamily::fig1: return "fig1";
  }
  return "?";
}

inline GroundFamily ground_family_from_string(const std::string& s) {
  if (s == "psd") return GroundFamily::psd;
  if (s == "symmetric") return GroundFamily::symmetric;
  if (s == "rectangular") return GroundFamily::rectangular;
  if (s == "fig1") return GroundFamily::fig1;
  throw InvalidSpecError("unknown ground family '" + s + "'");
}

/// Block ground matrix of the missing-entry illustration: two half-size
/// indicator blocks plus a balanced sign vector, all unnormalized, so the
/// entries land exactly in [-sigma3, sigma1 + sigma3].
struct Fig1Spec {
  Index n = 1000;
  double sigma1 = 22, sigma2 = 11, sigma3 = 5;
  double rho = 0.1;
  std::uint64_t seed = 0;
};

inline Matrix build_fig1_matrix(const Fig1Spec& spec) {
  if (spec.n < 4 || spec.n % 4 != 0)
    throw InvalidSpecError("build_fig1_matrix: n must be divisible by 4");
  if (!(spec.sigma1 > spec.sigma2 && spec.sigma2 > spec.sigma3 && spec.sigma3 > 0))
    throw InvalidSpecError("build_fig1_matrix: sigmas must be positive decreasing");
  const Index n = spec.n, half = n / 2, quarter = n / 4;
  Vector u1 = Vector::Zero(n), u2 = Vector::Zero(n), u3(n);
  u1.head(half).setOnes();
  u2.tail(half).setOnes();
  // u3: +-1 balanced within each half (orthogonality to both indicators),
  // positions from a seeded Fisher-Yates shuffle
  for (Index h = 0; h < 2; ++h) {
    std::vector<Index> idx(static_cast<std::size_t>(half));
    std::iota(idx.begin(), idx.end(), h * half);
    const std::uint64_t s = rng::stream_seed(spec.seed, static_cast<std::uint64_t>(h));
    for (Index i = half - 1; i > 0; --i) {
      const auto j = static_cast<Index>(rng::at(s, static_cast<std::uint64_t>(i)) %
                                        static_cast<std::uint64_t>(i + 1));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    for (Index i = 0; i < half; ++i)
      u3(idx[static_cast<std::size_t>(i)]) = i < quarter ? 1.0 : -1.0;
  }
  return spec.sigma1 * u1 * u1.transpose() + spec.sigma2 * u2 * u2.transpose() +
         spec.sigma3 * u3 * u3.transpose();
}

// --- campaign ---------------------------------------------------------------

struct GroundSpec {
  GroundFamily family = GroundFamily::psd;
  Index m = 0;  // rectangular only; 0 means square
  Index n = 20;
  Vector spectrum;  // descending; may be signed for the symmetric family
  std::uint64_t seed = 0;
  Fig1Spec fig1;
};

/// Ground matrix with the given spectrum in a seeded Haar basis.
inline Matrix build_ground(const GroundSpec& g) {
  switch (g.family) {
    case GroundFamily::fig1:
      return build_fig1_matrix(g.fig1);
    case GroundFamily::psd:
    case GroundFamily::symmetric: {
      const Index r = g.spectrum.size();
      if (r < 1 || r > g.n) throw InvalidSpecError("build_ground: bad spectrum length");
      if (g.family == GroundFamily::psd && (g.spectrum.array() < 0).any())
        throw InvalidSpecError("build_ground: psd spectrum must be nonnegative");
      const Matrix u = rng::haar_orthogonal(rng::stream_seed(g.seed, 1), g.n, r);
      return u * g.spectrum.asDiagonal() * u.transpose();
    }
    case GroundFamily::rectangular: {
      const Index m = g.m > 0 ? g.m : g.n;
      const Index r = g.spectrum.size();
      if (r < 1 || r > std::min(m, g.n))
        throw InvalidSpecError("build_ground: bad spectrum length");
      if ((g.spectrum.array() < 0).any())
        throw InvalidSpecError("build_ground: singular values must be nonnegative");
      const Matrix u = rng::haar_orthogonal(rng::stream_seed(g.seed, 1), m, r);
      const Matrix v = rng::haar_orthogonal(rng::stream_seed(g.seed, 2), g.n, r);
      return u * g.spectrum.asDiagonal() * v.transpose();
    }
  }
  throw InvalidSpecError("build_ground: bad family");
}

inline void to_json(nlohmann::json& j, const Fig1Spec& s) {
  j = nlohmann::json{{"n", s.n},
                     {"sigmas", std::vector<double>{s.sigma1, s.sigma2, s.sigma3}},
                     {"rho", s.rho},
                     {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, Fig1Spec& s) {
  s = Fig1Spec{};
  s.n = j.value("n", Index{1000});
  if (j.contains("sigmas")) {
    const auto v = j.at("sigmas").get<std::vector<double>>();
    if (v.size() != 3) throw InvalidSpecError("Fig1Spec: sigmas must have 3 entries");
    s.sigma1 = v[0];
    s.sigma2 = v[1];
    s.sigma3 = v[2];
  }
  s.rho = j.value("rho", 0.1);
  s.seed = j.value("seed", std::uint64_t{0});
}

inline void to_json(nlohmann::json& j, const GroundSpec& g) {
  j = nlohmann::json{{"family", to_string(g.family)}, {"n", g.n}, {"seed", g.seed}};
  if (g.m > 0) j["m"] = g.m;
  if (g.spectrum.size()) {
    std::vector<double> spec(g.spectrum.data(), g.spectrum.data() + g.spectrum.size());
    j["spectrum"] = spec;
  }
  if (g.family == GroundFamily::fig1) j["fig1"] = g.fig1;
}

inline void from_json(const nlohmann::json& j, GroundSpec& g) {
  g = GroundSpec{};
  g.family = ground_family_from_string(j.at("family").get<std::string>());
  g.n = j.value("n", Index{20});
  g.m = j.value("m", Index{0});
  g.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("spectrum")) {
    const auto v = j.at("spectrum").get<std::vector<double>>();
    g.spectrum = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
  }
  if (j.contains("fig1")) g.fig1 = j.at("fig1").get<Fig1Spec>();
  if (g.family == GroundFamily::fig1) g.n = g.fig1.n;
}

struct CampaignConfig {
  GroundSpec ground;
  NoiseSpec noise;
  Index p = 1;
  std::optional<Index> r;
  int trials = 1;
  std::uint64_t master_seed = 0;
  double t1 = 1.0, t2 = 1.0;
  int jobs = 1;
};

struct CampaignSummary {
  int trials = 0;
  int gate96_count = 0, gate24_count = 0, c0_count = 0, dk_count = 0;
  int main_valid = 0, psd_valid = 0, symmetric_valid = 0, a4_valid = 0;
  int main_count = 0, psd_count = 0, symmetric_count = 0, a4_count = 0;
  int eym_valid = 0;
  double mean_eym_over_main = 0;       // over trials where main bound applies
  double mean_dk_lowrank_over_main = 0;  // over trials where both apply
  double runtime_seconds = 0;
};

struct CampaignResult {
  std::vector<BoundReport> reports;
  CampaignSummary summary;
};

// runtime_seconds deliberately stays out of the JSON form: summaries must be
// byte-identical across reruns, wall time belongs in the run manifest.
inline void to_json(nlohmann::json& j, const CampaignSummary& s) {
  j = nlohmann::json{{"trials", s.trials},
                     {"gate96_count", s.gate96_count},
                     {"gate24_count", s.gate24_count},
                     {"c0_count", s.c0_count},
                     {"dk_count", s.dk_count},
                     {"eym_valid", s.eym_valid},
                     {"main_count", s.main_count},
                     {"main_valid", s.main_valid},
                     {"psd_count", s.psd_count},
                     {"psd_valid", s.psd_valid},
                     {"symmetric_count", s.symmetric_count},
                     {"symmetric_valid", s.symmetric_valid},
                     {"a4_count", s.a4_count},
                     {"a4_valid", s.a4_valid},
                     {"mean_eym_over_main", s.mean_eym_over_main},
                     {"mean_dk_lowrank_over_main", s.mean_dk_lowrank_over_main}};
}

/// One noise draw per trial against a fixed ground matrix; reports are keyed
/// by trial index so aggregation does not depend on scheduling.
inline CampaignResult run_bound_campaign(const CampaignConfig& cfg) {
  if (cfg.trials < 1) throw InvalidSpecError("run_bound_campaign: trials < 1");
  const auto t_start = std::chrono::steady_clock::now();
  const Matrix a = build_ground(cfg.ground);

  CampaignResult result;
  result.reports.resize(static_cast<std::size_t>(cfg.trials));

  auto run_trial = [&](int t) {
    NoiseSpec spec = cfg.noise;
    spec.seed = rng::stream_seed(cfg.master_seed, static_cast<std::uint64_t>(t));
    Matrix e;
    if (spec.kind == NoiseKind::sampling) {
      const Mask mask = sample_mask(spec.rho, a.rows(), a.cols(),
                                    rng::stream_seed(spec.seed, 11));
      NoiseSpec entry;
      const NoiseSpec* entry_ptr = nullptr;
      if (spec.entry_noise) {
        entry = *spec.entry_noise;
        entry.seed = rng::stream_seed(spec.seed, 12);
        entry_ptr = &entry;
      }
      e = sampling_noise(a, mask, spec.rho, entry_ptr).E;
    } else {
      e = sample_noise(spec, a.rows(), a.cols());
    }
    PairInputs in;
    in.p = cfg.p;
    in.r = cfg.r;
    in.t1 = cfg.t1;
    in.t2 = cfg.t2;
    in.trial = t;
    in.seed = spec.seed;
    result.reports[static_cast<std::size_t>(t)] = evaluate_pair(a, e, in, noise_context(spec, a));
  };

  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    for (int t = 0; t < cfg.trials; ++t) run_trial(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1)) {
          try {
            run_trial(t);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  CampaignSummary& s = result.summary;
  s.trials = cfg.trials;
  double eym_ratio_sum = 0, dk_ratio_sum = 0;
  int dk_ratio_count = 0;
  for (const auto& rep : result.reports) {
    const double err = rep.measured_error;
    if (err <= rep.eym + 1e-9) ++s.eym_valid;
    if (rep.gate96_pass) ++s.gate96_count;
    if (rep.gate24_pass) ++s.gate24_count;
    if (rep.c0_pass.value_or(false)) ++s.c0_count;
    if (rep.dk_gate_pass) ++s.dk_count;
    if (rep.main_bound) {
      ++s.main_count;
      if (err <= *rep.main_bound + 1e-9) ++s.main_valid;
      eym_ratio_sum += rep.eym / *rep.main_bound;
      if (rep.dk_lowrank) {
        dk_ratio_sum += *rep.dk_lowrank / *rep.main_bound;
        ++dk_ratio_count;
      }
    }
    if (rep.psd_bound) {
      ++s.psd_count;
      if (err <= *rep.psd_bound + 1e-9) ++s.psd_valid;
    }
    if (rep.symmetric_bound) {
      ++s.symmetric_count;
      if (err <= *rep.symmetric_bound + 1e-9) ++s.symmetric_valid;
    }
    if (rep.a4_bound) {
      ++s.a4_count;
      if (err <= *rep.a4_bound + 1e-9) ++s.a4_valid;
    }
  }
  s.mean_eym_over_main = s.main_count ? eym_ratio_sum / s.main_count : 0;
  s.mean_dk_lowrank_over_main = dk_ratio_count ? dk_ratio_sum / dk_ratio_count : 0;
  s.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

// --- missing-entry demonstration ---------------------------------------------

struct Fig1Result {
  Matrix a;        // panel (a)
  Matrix b;        // panel (b): observed entries, zeros elsewhere
  Matrix a2;       // panel (c): rank-2 truncation of A
  Matrix at2;      // panel (d): rank-2 truncation of rho^{-1} B
  BoundReport report;
  double sign_agreement = 0;  // fraction of entries whose sign class matches
  double value_lo = 0, value_hi = 0;  // shared grayscale range of the panels
};

/// Sign classification band for the panel comparison: entries within
/// +-sigma3/2 count as zero.
inline int sign_class(double v, double tol) { return v > tol ? 1 : (v < -tol ? -1 : 0); }

inline Fig1Result run_fig1(const Fig1Spec& spec, double t1 = 1.0, double t2 = 1.0) {
  Fig1Result out;
  out.a = build_fig1_matrix(spec);
  const Index n = spec.n;
  const Mask mask = sample_mask(spec.rho, n, n, rng::stream_seed(spec.seed, 11));
  const SamplingNoise noise = sampling_noise(out.a, mask, spec.rho);
  out.b = noise.observed.values;
  const Matrix at = out.b / spec.rho;

  out.a2 = rank_p_approx(svd(out.a), 2);
  out.at2 = rank_p_approx(svd(at), 2);

  NoiseSpec nspec;
  nspec.kind = NoiseKind::sampling;
  nspec.rho = spec.rho;
  nspec.seed = spec.seed;
  PairInputs in;
  in.p = 2;
  in.r = 3;
  in.t1 = t1;
  in.t2 = t2;
  in.seed = spec.seed;
  out.report = evaluate_pair(out.a, noise.E, in, noise_context(nspec, out.a));

  const double tol = spec.sigma3 / 2.0;
  Index agree = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (sign_class(out.a2(i, j), tol) == sign_class(out.at2(i, j), tol)) ++agree;
  out.sign_agreement = static_cast<double>(agree) / (static_cast<double>(n) * n);
  out.value_lo = -spec.sigma3;
  out.value_hi = spec.sigma1 + spec.sigma3;
  return out;
}

// --- sharpness (top singular value shift under additive noise) ---------------

struct SharpnessTrial {
  std::uint64_t seed = 0;
  double sigma1 = 0, sigma1_tilde = 0, norm_e = 0;
  std::optional<double> ratio;  // |shift| / (||E||^2 / sigma1); absent when E = 0
  double shift = 0;
  double error_rank1 = 0;  // ||At_1 - A_1||
  bool lower_bound_ok = false;  // error_rank1 >= |shift|
};

struct SharpnessReport {
  std::vector<SharpnessTrial> trials;
  double c = 0;
  Index n = 0;
};

/// Spiked rank-one matrix sigma1 = c sqrt(n) under unit-variance bounded
/// noise: record the top singular value shift against ||E||^2 / sigma1 and
/// the rank-one error lower bound.
inline SharpnessReport run_sharpness(Index n, double c, int trials, std::uint64_t seed,
                                     double noise_scale = 1.0) {
  if (!(c > 2)) throw InvalidSpecError("run_sharpness: c must exceed 2");
  if (trials < 1) throw InvalidSpecError("run_sharpness: trials < 1");
  SharpnessReport rep;
  rep.c = c;
  rep.n = n;
  const double sigma1 = c * std::sqrt(static_cast<double>(n));
  Vector ones = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  const Matrix a = sigma1 * ones * ones.transpose();
  const Matrix a1 = a;  // rank one already
  for (int t = 0; t < trials; ++t) {
    SharpnessTrial trial;
    trial.seed = rng::stream_seed(seed, static_cast<std::uint64_t>(t));
    NoiseSpec nspec;
    nspec.kind = NoiseKind::iid_bounded;
    nspec.sigma2 = noise_scale * noise_scale;
    nspec.K = std::sqrt(3.0) * noise_scale;
    nspec.seed = trial.seed;
    const Matrix e = sample_noise(nspec, n, n);
    const Matrix at = a + e;
    const SpectralDecomposition dec_at = svd(at);
    trial.sigma1 = sigma1;
    trial.sigma1_tilde = dec_at.singular_values(0);
    trial.norm_e = spectral_norm(e);
    trial.shift = std::abs(trial.sigma1_tilde - sigma1);
    trial.error_rank1 = spectral_norm(rank_p_approx(dec_at, 1) - a1);
    trial.lower_bound_ok = trial.error_rank1 >= trial.shift - 1e-9;
    if (trial.norm_e > 0)
      trial.ratio = trial.shift / (trial.norm_e * trial.norm_e / sigma1);
    rep.trials.push_back(trial);
  }
  return rep;
}

// --- geometric parallelism diagnostic ----------------------------------------

/// Frobenius cosine between the residual segments A - A_p and At - At_p.
inline double run_parallelism(const Matrix& a, const Matrix& e, Index p) {
  const Matrix at = a + e;
  const Matrix seg_a = a - rank_p_approx(svd(a), p);
  const Matrix seg_at = at - rank_p_approx(svd(at), p);
  const double na = seg_a.norm(), nat = seg_at.norm();
  if (na == 0 || nat == 0)
    throw NotApplicableError("run_parallelism: zero residual segment");
  return (seg_a.array() * seg_at.array()).sum() / (na * nat);
}

}  // namespace rankp
