#pragma once

#include "rankp/rng.hpp"
#include "rankp/skewness.hpp"

#include <json.hpp>

#include <cmath>
#include <memory>
#include <string>

namespace rankp {

enum class NoiseKind { wigner, iid_bounded, profile, sampling };

inline std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::wigner: return "wigner";
    case NoiseKind::iid_bounded: return "iid_bounded";
    case NoiseKind::profile: return "profile";
    case NoiseKind::sampling: return "sampling";
  }
  return "?";
}

inline NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "wigner") return NoiseKind::wigner;
  if (s == "iid_bounded") return NoiseKind::iid_bounded;
  if (s == "profile") return NoiseKind::profile;
  if (s == "sampling") return NoiseKind::sampling;
  throw InvalidSpecError("unknown noise kind '" + s + "'");
}

/// Seeded description of a noise matrix. Same (spec, shape, seed) always
/// yields the same matrix, bit for bit: entries are drawn from a
/// counter-based stream indexed by their row-major position.
///
/// Atoms: wigner mirrors a Rademacher upper triangle scaled to the requested
/// variance (entries +-sigma, bound sigma); iid_bounded draws uniform on
/// [-sqrt(3) sigma, sqrt(3) sigma] (variance sigma^2), clipped at K if K is
/// tighter; profile draws sigma_ij times a Rademacher sign, so
/// |entry| <= sigma_ij <= K holds exactly.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::iid_bounded;
  std::uint64_t seed = 0;
  double K = 1.0;       // a.s. bound (iid_bounded; wigner is fixed at 1)
  double sigma2 = 1.0;  // target entry variance (iid_bounded)
  std::optional<Matrix> profile_sigma2;  // kind == profile
  double rho = 1.0;                      // kind == sampling
  std::shared_ptr<NoiseSpec> entry_noise;  // optional, kind == sampling

  VarianceProfile profile() const {
    if (kind != NoiseKind::profile || !profile_sigma2)
      throw InvalidSpecError("NoiseSpec: no variance profile");
    return VarianceProfile(*profile_sigma2, K);
  }
};

inline Matrix sample_noise(const NoiseSpec& spec, Index m, Index n) {
  switch (spec.kind) {
    case NoiseKind::wigner: {
      if (m != n) throw ShapeError("sample_noise: wigner requires m = n");
      if (spec.sigma2 < 0) throw InvalidSpecError("sample_noise: negative variance");
      const double scale = std::sqrt(spec.sigma2);
      Matrix e(n, n);
      for (Index i = 0; i < n; ++i) {
        for (Index j = i; j < n; ++j) {
          const double v =
              scale * rng::rademacher(spec.seed, static_cast<std::uint64_t>(i) * n + j);
          e(i, j) = v;
          e(j, i) = v;
        }
      }
      return e;
    }
    case NoiseKind::iid_bounded: {
      if (spec.sigma2 < 0) throw InvalidSpecError("sample_noise: negative variance");
      const double half_width = std::sqrt(3.0 * spec.sigma2);
      Matrix e(m, n);
      for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) {
          double v = rng::uniform_sym(spec.seed, static_cast<std::uint64_t>(i) * n + j,
                                      half_width);
          v = std::clamp(v, -spec.K, spec.K);
          e(i, j) = v;
        }
      }
      return e;
    }
    case NoiseKind::profile: {
      const VarianceProfile prof = spec.profile();
      if (prof.sigma2.rows() != m || prof.sigma2.cols() != n)
        throw ShapeError("sample_noise: profile shape mismatch");
      Matrix e(m, n);
      for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j)
          e(i, j) = std::sqrt(prof.sigma2(i, j)) *
                    rng::rademacher(spec.seed, static_cast<std::uint64_t>(i) * n + j);
      return e;
    }
    case NoiseKind::sampling:
      throw InvalidSpecError(
          "sample_noise: sampling noise needs a ground matrix; use sampling_noise()");
  }
  throw InvalidSpecError("sample_noise: bad kind");
}

/// Iid Bernoulli(rho) observation mask.
inline Mask sample_mask(double rho, Index m, Index n, std::uint64_t seed) {
  if (!(rho > 0) || rho > 1) throw InvalidDensityError("sample_mask: rho outside (0, 1]");
  Mask mask(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      mask(i, j) = rng::uniform01(seed, static_cast<std::uint64_t>(i) * n + j) < rho;
  return mask;
}

/// Observed entries (zeros elsewhere); the mask distinguishes an observed
/// zero from a missing entry.
struct ObservedMatrix {
  Matrix values;
  Mask mask;
  double rho = 1.0;
};

struct SamplingNoise {
  Matrix E;  // rho^{-1} B - A
  ObservedMatrix observed;
};

/// Missing-entry noise: entries of A' = A + xi are kept with the given mask,
/// zeroed otherwise, and the kept matrix B is rescaled by 1/rho. The
/// resulting E = rho^{-1} B - A has zero mean entrywise over the mask draw.
inline SamplingNoise sampling_noise(const Matrix& a, const Mask& mask, double rho,
                                    const NoiseSpec* entry_noise = nullptr) {
  if (!(rho > 0) || rho > 1) throw InvalidDensityError("sampling_noise: rho outside (0, 1]");
  if (a.rows() != mask.rows() || a.cols() != mask.cols())
    throw ShapeError("sampling_noise: mask shape mismatch");
  Matrix xi = Matrix::Zero(a.rows(), a.cols());
  if (entry_noise) xi = sample_noise(*entry_noise, a.rows(), a.cols());
  SamplingNoise out;
  out.observed.rho = rho;
  out.observed.mask = mask;
  out.observed.values = mask.select(a + xi, Matrix::Zero(a.rows(), a.cols()));
  out.E = out.observed.values / rho - a;
  return out;
}

/// Per-entry variance and a.s. bound of the sampling noise, given the ground
/// matrix: Var E_ij = A_ij^2 (1 - rho)/rho + sigma_xi^2 / rho, and
/// |E_ij| <= max(|A_ij|(1-rho)/rho + K_xi/rho, |A_ij| + K_xi).
inline VarianceProfile sampling_noise_profile(const Matrix& a, double rho,
                                              const NoiseSpec* entry_noise = nullptr) {
  if (!(rho > 0) || rho > 1) throw InvalidDensityError("sampling_noise_profile: bad rho");
  double xi_var = 0, xi_bound = 0;
  if (entry_noise) {
    switch (entry_noise->kind) {
      case NoiseKind::wigner:
        xi_var = 1;
        xi_bound = 1;
        break;
      case NoiseKind::iid_bounded:
        xi_var = entry_noise->sigma2;
        xi_bound = std::min(entry_noise->K, std::sqrt(3.0 * entry_noise->sigma2));
        break;
      case NoiseKind::profile: {
        const VarianceProfile p = entry_noise->profile();
        xi_var = p.sigma_max2();
        xi_bound = entry_noise->K;
        break;
      }
      case NoiseKind::sampling:
        throw InvalidSpecError("sampling_noise_profile: nested sampling noise");
    }
  }
  const double vmax = a.cwiseAbs().maxCoeff();
  Matrix grid = (a.array().square() * ((1.0 - rho) / rho) + xi_var / rho).matrix();
  const double k = std::max(vmax * (1.0 - rho) / rho + xi_bound / rho, vmax + xi_bound);
  return VarianceProfile(std::move(grid), std::max(k, 1e-300));
}

// --- JSON form -------------------------------------------------------------

inline void to_json(nlohmann::json& j, const NoiseSpec& spec) {
  j = nlohmann::json{{"kind", to_string(spec.kind)}, {"seed", spec.seed}};
  switch (spec.kind) {
    case NoiseKind::wigner:
      break;
    case NoiseKind::iid_bounded:
      j["K"] = spec.K;
      j["sigma2"] = spec.sigma2;
      break;
    case NoiseKind::profile: {
      j["K"] = spec.K;
      if (spec.profile_sigma2) {
        std::vector<std::vector<double>> rows;
        for (Index i = 0; i < spec.profile_sigma2->rows(); ++i) {
          std::vector<double> row;
          for (Index jx = 0; jx < spec.profile_sigma2->cols(); ++jx)
            row.push_back((*spec.profile_sigma2)(i, jx));
          rows.push_back(std::move(row));
        }
        j["sigma2_grid"] = rows;
      }
      break;
    }
    case NoiseKind::sampling:
      j["rho"] = spec.rho;
      if (spec.entry_noise) {
        nlohmann::json sub;
        to_json(sub, *spec.entry_noise);
        j["entry_noise"] = sub;
      }
      break;
  }
}

inline void from_json(const nlohmann::json& j, NoiseSpec& spec) {
  spec = NoiseSpec{};
  spec.kind = noise_kind_from_string(j.at("kind").get<std::string>());
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.K = j.value("K", 1.0);
  spec.sigma2 = j.value("sigma2", 1.0);
  spec.rho = j.value("rho", 1.0);
  if (j.contains("sigma2_grid")) {
    const auto rows = j.at("sigma2_grid").get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw InvalidSpecError("NoiseSpec: empty sigma2_grid");
    Matrix grid(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < grid.rows(); ++i) {
      if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != grid.cols())
        throw InvalidSpecError("NoiseSpec: ragged sigma2_grid");
      for (Index jx = 0; jx < grid.cols(); ++jx)
        grid(i, jx) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(jx)];
    }
    spec.profile_sigma2 = std::move(grid);
  }
  if (j.contains("entry_noise")) {
    auto sub = std::make_shared<NoiseSpec>();
    from_json(j.at("entry_noise"), *sub);
    if (sub->kind == NoiseKind::sampling)
      throw InvalidSpecError("NoiseSpec: nested sampling noise");
    spec.entry_noise = std::move(sub);
  }
}

}  // namespace rankp
