#pragma once

#include "rankp/contour.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace rankp {

/// Rational integrand z^z_power / prod_i (z - a_i)^{t_i} with real poles.
struct PoleTerm {
  double position = 0;
  int exponent = 1;
};

struct ScalarIntegrand {
  std::vector<PoleTerm> poles;
  int z_power = 0;  // 0 or 1

  Complex operator()(Complex z) const {
    Complex denom = 1.0;
    for (const auto& p : poles)
      for (int k = 0; k < p.exponent; ++k) denom *= (z - p.position);
    Complex num = z_power ? z : Complex(1.0);
    return num / denom;
  }

  int total_exponent() const {
    int s = 0;
    for (const auto& p : poles) s += p.exponent;
    return s;
  }

  std::string describe(const ContourPath& path) const {
    std::ostringstream os;
    os << (z_power ? "z" : "1") << " / (";
    for (std::size_t i = 0; i < poles.size(); ++i) {
      if (i) os << ' ';
      os << "(z-" << poles[i].position << ")^" << poles[i].exponent;
    }
    os << ") on";
    for (const auto& r : path.rects) os << " [" << r.left << "," << r.right << "]";
    return os.str();
  }
};

struct LemmaCheck {
  std::string lemma;
  std::string config;
  Complex value{};
  std::optional<Complex> expected;
  std::optional<double> bound;
  double error = 0;  // identity: |value - expected|; bound: excess over bound (>= 0)
  bool pass = false;
};

struct LemmaReport {
  std::vector<LemmaCheck> checks;
  int violations = 0;

  void add(LemmaCheck c) {
    if (!c.pass) ++violations;
    checks.push_back(std::move(c));
  }
  void merge(const LemmaReport& other) {
    violations += other.violations;
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  }
  bool all_pass() const { return violations == 0; }
};

inline void require_all_pass(const LemmaReport& rep) {
  for (const auto& c : rep.checks)
    if (!c.pass)
      throw LemmaViolationError("lemma check failed: " + c.lemma + " at " + c.config,
                                c.config);
}

inline void to_json(nlohmann::json& j, const LemmaCheck& c) {
  j = nlohmann::json{{"lemma", c.lemma},
                     {"config", c.config},
                     {"value_re", c.value.real()},
                     {"value_im", c.value.imag()},
                     {"error", c.error},
                     {"pass", c.pass}};
  if (c.expected) {
    j["expected_re"] = c.expected->real();
    j["expected_im"] = c.expected->imag();
  }
  if (c.bound) j["bound"] = *c.bound;
}

inline void to_json(nlohmann::json& j, const LemmaReport& r) {
  j = nlohmann::json{{"total", r.checks.size()}, {"violations", r.violations},
                     {"checks", r.checks}};
}

namespace detail {

inline double ipow(double base, int e) {
  double out = 1;
  for (int k = 0; k < e; ++k) out *= base;
  return out;
}

struct SplitPoles {
  std::vector<PoleTerm> inside, outside;
};

inline SplitPoles split_poles(const ScalarIntegrand& g, const ContourPath& path) {
  SplitPoles s;
  for (const auto& p : g.poles) {
    if (path.contains(Complex(p.position, 0)))
      s.inside.push_back(p);
    else
      s.outside.push_back(p);
  }
  return s;
}

}  // namespace detail

/// Exact-value contour identities: the Cauchy integral (with f = 1 and
/// f = z), vanishing of higher-order residue-free integrals, the two-pole
/// partial-fraction value 1/(a-b), the z-numerator values {1, 0}, and the
/// one-in-one-out ratio a/(a-b). Configurations none of these cover return
/// no checks.
inline LemmaReport verify_scalar_lemmas(const ScalarIntegrand& g, const ContourPath& path,
                                        const QuadratureSpec& q) {
  LemmaReport rep;
  const auto split = detail::split_poles(g, path);
  const int s = g.total_exponent();
  const std::string config = g.describe(path);

  std::optional<Complex> expected;
  std::string lemma;
  if (split.inside.empty()) {
    expected = Complex(0.0);
    lemma = "analytic-inside";
  } else if (split.outside.empty()) {
    if (g.z_power == 0) {
      expected = (s == 1) ? Complex(1.0) : Complex(0.0);
      lemma = (s == 1) ? "cauchy" : "inside-higher-order-zero";
    } else {
      if (s == 1) {
        expected = Complex(split.inside.front().position);
        lemma = "cauchy-z";
      } else {
        expected = (s == 2) ? Complex(1.0) : Complex(0.0);
        lemma = "z-numerator-value";
      }
    }
  } else if (s == 2 && split.inside.size() == 1 && split.outside.size() == 1 &&
             split.inside[0].exponent == 1 && split.outside[0].exponent == 1) {
    const double a = split.inside[0].position, b = split.outside[0].position;
    expected = Complex((g.z_power ? a : 1.0) / (a - b));
    lemma = g.z_power ? "split-pair-ratio" : "split-pair";
  }
  if (!expected) return rep;

  LemmaCheck check;
  check.lemma = lemma;
  check.config = config;
  check.value = integrate_scalar(g, path, q);
  check.expected = expected;
  check.error = std::abs(check.value - *expected);
  check.pass = check.error <= 1e-8;
  rep.add(std::move(check));
  return rep;
}

/// Bound lemmas for mixed pole configurations (some inside, some outside,
/// every exponent >= 1). The reference pole a_m may be any outside pole; the
/// bound is checked for each choice.
inline LemmaReport verify_bound_lemmas(const ScalarIntegrand& g, const ContourPath& path,
                                       const QuadratureSpec& q, double slack = 1e-8) {
  LemmaReport rep;
  const auto split = detail::split_poles(g, path);
  if (split.inside.empty() || split.outside.empty()) return rep;
  const int s = g.total_exponent();
  const std::string config = g.describe(path);

  double delta = std::numeric_limits<double>::infinity();
  for (const auto& xi : split.inside)
    for (const auto& yj : split.outside)
      delta = std::min(delta, std::abs(xi.position - yj.position));

  const Complex value = integrate_scalar(g, path, q);
  const double mag = std::abs(value);

  for (const auto& am : split.outside) {
    const int t = am.exponent;
    double lambda = std::numeric_limits<double>::infinity();
    for (const auto& xi : split.inside)
      lambda = std::min(lambda, std::abs(xi.position - am.position));

    LemmaCheck check;
    check.config = config + "; a_m=" + std::to_string(am.position);
    check.value = value;
    if (g.z_power == 0) {
      check.lemma = "resolvent-product-bound";  // 2^{s-1} / (lambda^t delta^{s-t-1})
      check.bound = detail::ipow(2.0, s - 1) /
                    (detail::ipow(lambda, t) * detail::ipow(delta, s - t - 1));
    } else if (s == t + 1) {
      // forces X = {a_1} with exponent 1 and Y = {a_m}
      const double a1 = split.inside[0].position;
      const Complex exact = a1 / Complex(detail::ipow(a1 - am.position, t));
      check.lemma = "z-numerator-tail-exact";
      check.expected = exact;
      check.bound = 1.0 / detail::ipow(lambda, t - 1) +
                    std::abs(am.position) / detail::ipow(lambda, t);
      const double id_err = std::abs(value - exact);
      if (id_err > 1e-8) {
        check.error = id_err;
        check.pass = false;
        rep.add(std::move(check));
        continue;
      }
    } else {
      // first-listed outside pole: any choice is a valid labeling, so the
      // smallest magnitude gives the tightest admissible bound
      double a_l1 = std::abs(am.position);
      if (split.outside.size() > 1) {
        a_l1 = std::numeric_limits<double>::infinity();
        for (const auto& yj : split.outside)
          if (&yj != &am) a_l1 = std::min(a_l1, std::abs(yj.position));
      }
      check.lemma = "z-numerator-bound";
      check.bound =
          detail::ipow(2.0, s) *
          (1.0 / (detail::ipow(lambda, t) * detail::ipow(delta, s - t - 2)) +
           a_l1 / (detail::ipow(lambda, t) * detail::ipow(delta, s - t - 1)));
    }
    check.error = std::max(0.0, mag - *check.bound);
    check.pass = check.error <= slack;
    rep.add(std::move(check));
  }
  return rep;
}

struct SweepConfig {
  std::vector<double> poles = {-3, -2, -1, 1, 2, 3, 5};
  std::vector<ContourPath> contours;  // empty: use the default suite
  int max_poles = 4;
  int max_total_exponent = 6;
  QuadratureSpec quad{};

  static std::vector<ContourPath> default_contours() {
    std::vector<ContourPath> cs;
    cs.emplace_back(RectContour(0.5, 3.5, 3.0));
    cs.emplace_back(RectContour(0.5, 1.5, 1.0));
    cs.emplace_back(RectContour(-3.5, -0.5, 3.0));
    cs.emplace_back(RectContour(-1.5, 2.5, 4.0));
    cs.emplace_back(RectContour(4.0, 6.0, 2.0));
    cs.emplace_back(RectContour(-2.5, 5.5, 8.0));
    cs.emplace_back(ContourPath(RectContour(-3.5, -0.5, 3.0), RectContour(0.5, 3.5, 3.0)));
    return cs;
  }
};

/// Exhaustive sweep over pole subsets, exponent profiles, both numerators and
/// every contour of the suite; aggregates scalar-identity and bound-lemma
/// checks.
inline LemmaReport lemma_sweep(const SweepConfig& cfg) {
  if (cfg.max_total_exponent < 1) throw InvalidSpecError("lemma_sweep: empty sweep");
  LemmaReport rep;
  const auto contours = cfg.contours.empty() ? SweepConfig::default_contours() : cfg.contours;
  const int np = static_cast<int>(cfg.poles.size());

  std::vector<int> subset;
  auto run_subset = [&](const std::vector<int>& idx) {
    const int k = static_cast<int>(idx.size());
    std::vector<int> expo(static_cast<std::size_t>(k), 1);
    // enumerate exponent vectors with each >= 1 and total <= max_total_exponent
    auto total = [&] {
      int t = 0;
      for (int e : expo) t += e;
      return t;
    };
    while (true) {
      if (total() <= cfg.max_total_exponent) {
        ScalarIntegrand g;
        for (int i = 0; i < k; ++i)
          g.poles.push_back({cfg.poles[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])],
                             expo[static_cast<std::size_t>(i)]});
        for (int zp : {0, 1}) {
          g.z_power = zp;
          for (const auto& path : contours) {
            rep.merge(verify_scalar_lemmas(g, path, cfg.quad));
            rep.merge(verify_bound_lemmas(g, path, cfg.quad));
          }
        }
      }
      // next exponent vector (odometer with early cutoff on the total)
      int pos = k - 1;
      while (pos >= 0) {
        ++expo[static_cast<std::size_t>(pos)];
        if (total() <= cfg.max_total_exponent) break;
        expo[static_cast<std::size_t>(pos)] = 1;
        --pos;
      }
      if (pos < 0) break;
    }
  };

  std::function<void(int)> choose = [&](int start) {
    if (!subset.empty()) run_subset(subset);
    if (static_cast<int>(subset.size()) == cfg.max_poles) return;
    for (int i = start; i < np; ++i) {
      subset.push_back(i);
      choose(i + 1);
      subset.pop_back();
    }
  };
  choose(0);
  return rep;
}

}  // namespace rankp
