// Command-line front end: lemma verification sweeps, single-pair and campaign
// bound evaluation, and the experiment drivers (missing-entry panels, top
// singular value sharpness, residual parallelism).

#include "rankp/rankp.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "rankp 0.1.0";

// Exit codes are part of the interface: 0 success, 1 property violation,
// 2 numerical non-convergence, 64 usage, 65 input format.
constexpr int kExitViolation = 1;
constexpr int kExitQuadrature = 2;
constexpr int kExitUsage = 64;
constexpr int kExitFormat = 65;

std::string iso_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

// Run metadata written next to the outputs on every path, success or not.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  json config;
  std::uint64_t master_seed = 0;
  std::string start_time;
  std::string end_time;
  std::vector<std::string> outputs;
  std::string status = "success";
  std::string error;

  void write(const fs::path& dir) const {
    json j{{"command", command}, {"argv", argv},       {"config", config},
           {"master_seed", master_seed}, {"tool_version", kVersion},
           {"start_time", start_time},  {"end_time", end_time},
           {"outputs", outputs},        {"status", status}};
    if (!error.empty()) j["error"] = error;
    std::ofstream out(dir / "manifest.json");
    out << j.dump(2) << '\n';
  }
};

std::uint64_t resolve_seed(const CLI::Option* seed_opt, std::uint64_t flag_value) {
  if (seed_opt->count() > 0) return flag_value;
  if (const char* env = std::getenv("SEED")) return std::strtoull(env, nullptr, 10);
  return flag_value;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rankp::Error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_text(RunManifest& manifest, const fs::path& dir, const std::string& name,
                const std::string& content) {
  std::ofstream out(dir / name);
  if (!out) throw rankp::Error("cannot write " + (dir / name).string());
  out << content;
  manifest.outputs.push_back(name);
}

void write_json_file(RunManifest& manifest, const fs::path& dir, const std::string& name,
                     const json& j) {
  write_text(manifest, dir, name, j.dump(2) + "\n");
}

void write_reports_csv(RunManifest& manifest, const fs::path& dir, const std::string& name,
                       const std::vector<rankp::BoundReport>& reports) {
  std::string csv = rankp::bound_report_csv_header() + "\n";
  for (const auto& r : reports) csv += rankp::to_csv_row(r) + "\n";
  write_text(manifest, dir, name, csv);
}

void write_pgm_file(RunManifest& manifest, const fs::path& dir, const std::string& name,
                    const rankp::Matrix& m, double lo, double hi) {
  rankp::write_pgm((dir / name).string(), m, lo, hi);
  manifest.outputs.push_back(name);
}

struct VerifyLemmasArgs {
  double tol = 1e-9;
  int sweep_size = 6;
  std::string out = "out";
};

int cmd_verify_lemmas(const VerifyLemmasArgs& args, RunManifest& manifest) {
  rankp::SweepConfig cfg;
  cfg.max_total_exponent = args.sweep_size;
  cfg.quad.tol = args.tol;
  manifest.config = json{{"tol", args.tol}, {"sweep_size", args.sweep_size}};
  const rankp::LemmaReport report = rankp::lemma_sweep(cfg);
  json j;
  rankp::to_json(j, report);
  write_json_file(manifest, args.out, "lemma_report.json", j);
  std::cout << "lemma checks: " << report.checks.size() << ", violations: "
            << report.violations << "\n";
  rankp::require_all_pass(report);  // -> exit 1 on violation
  return 0;
}

struct BoundsArgs {
  std::string matrix_csv;
  std::string generate_json;
  std::string noise_json;
  rankp::Index p = 0;
  rankp::Index r = 0;
  int trials = 1;
  double t1 = 1.0, t2 = 1.0;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string out = "out";
};

int cmd_bounds(const BoundsArgs& args, RunManifest& manifest) {
  rankp::CampaignConfig cfg;
  json ground_echo;
  if (!args.matrix_csv.empty()) {
    ground_echo = json{{"matrix", args.matrix_csv}};
  } else {
    const json gj = load_json(args.generate_json);
    cfg.ground = gj.get<rankp::GroundSpec>();
    ground_echo = gj;
  }
  const json nj = load_json(args.noise_json);
  cfg.noise = nj.get<rankp::NoiseSpec>();
  cfg.p = args.p;
  if (args.r > 0) cfg.r = args.r;
  cfg.trials = args.trials;
  cfg.master_seed = args.seed;
  cfg.t1 = args.t1;
  cfg.t2 = args.t2;
  cfg.jobs = args.jobs > 0 ? args.jobs
                           : static_cast<int>(std::thread::hardware_concurrency());
  manifest.config = json{{"ground", ground_echo}, {"noise", nj},   {"p", cfg.p},
                         {"r", args.r},           {"trials", cfg.trials},
                         {"t1", cfg.t1},          {"t2", cfg.t2}};

  rankp::CampaignResult result;
  if (!args.matrix_csv.empty()) {
    // explicit matrix: same trial loop against the loaded ground matrix
    const rankp::Matrix a = rankp::read_csv_matrix(args.matrix_csv);
    result.reports.reserve(static_cast<std::size_t>(cfg.trials));
    for (int t = 0; t < cfg.trials; ++t) {
      rankp::NoiseSpec spec = cfg.noise;
      spec.seed = rankp::rng::stream_seed(cfg.master_seed, static_cast<std::uint64_t>(t));
      rankp::Matrix e;
      if (spec.kind == rankp::NoiseKind::sampling) {
        const rankp::Mask mask = rankp::sample_mask(
            spec.rho, a.rows(), a.cols(), rankp::rng::stream_seed(spec.seed, 11));
        e = rankp::sampling_noise(a, mask, spec.rho, spec.entry_noise.get()).E;
      } else {
        e = rankp::sample_noise(spec, a.rows(), a.cols());
      }
      rankp::PairInputs in;
      in.p = cfg.p;
      if (cfg.r) in.r = cfg.r;
      in.t1 = cfg.t1;
      in.t2 = cfg.t2;
      in.trial = t;
      in.seed = spec.seed;
      result.reports.push_back(
          rankp::evaluate_pair(a, e, in, rankp::noise_context(spec, a)));
    }
    rankp::CampaignSummary& s = result.summary;
    s.trials = cfg.trials;
    for (const auto& rep : result.reports) {
      if (rep.measured_error <= rep.eym + 1e-9) ++s.eym_valid;
      if (rep.gate96_pass) ++s.gate96_count;
      if (rep.gate24_pass) ++s.gate24_count;
      if (rep.main_bound) {
        ++s.main_count;
        if (rep.measured_error <= *rep.main_bound + 1e-9) ++s.main_valid;
      }
      if (rep.a4_bound) {
        ++s.a4_count;
        if (rep.measured_error <= *rep.a4_bound + 1e-9) ++s.a4_valid;
      }
    }
  } else {
    result = rankp::run_bound_campaign(cfg);
  }

  write_reports_csv(manifest, args.out, "reports.csv", result.reports);
  json sj;
  rankp::to_json(sj, result.summary);
  write_json_file(manifest, args.out, "summary.json", sj);

  // Gate failures are data. A certified bound falling below the measured
  // error is a property violation and turns the exit code.
  const auto& s = result.summary;
  const bool valid = s.eym_valid == s.trials && s.main_valid == s.main_count &&
                     s.psd_valid == s.psd_count &&
                     s.symmetric_valid == s.symmetric_count && s.a4_valid == s.a4_count;
  if (!valid) {
    std::cerr << "bound validity violated; see " << args.out << "/summary.json\n";
    return kExitViolation;
  }
  std::cout << "trials: " << s.trials << ", gated(1/96): " << s.gate96_count
            << ", gated(1/24): " << s.gate24_count << ", all certified bounds valid\n";
  return 0;
}

struct Fig1Args {
  rankp::Index n = 1000;
  double rho = 0.1;
  std::uint64_t seed = 0;
  double t1 = 7.0, t2 = 1.0;
  std::string out = "out";
};

int cmd_experiment_fig1(const Fig1Args& args, RunManifest& manifest) {
  rankp::Fig1Spec spec;
  spec.n = args.n;
  spec.rho = args.rho;
  spec.seed = args.seed;
  json cfg;
  rankp::to_json(cfg, spec);
  manifest.config = cfg;
  const rankp::Fig1Result res = rankp::run_fig1(spec, args.t1, args.t2);
  const double lo = res.value_lo, hi = res.value_hi;
  write_pgm_file(manifest, args.out, "panel_a.pgm", res.a, lo, hi);
  write_pgm_file(manifest, args.out, "panel_b.pgm", res.b, lo, hi);
  write_pgm_file(manifest, args.out, "panel_c.pgm", res.a2, lo, hi);
  write_pgm_file(manifest, args.out, "panel_d.pgm", res.at2, lo, hi);
  json rj;
  rankp::to_json(rj, res.report);
  rj["sign_agreement"] = res.sign_agreement;
  rj["entry_min"] = res.a.minCoeff();
  rj["entry_max"] = res.a.maxCoeff();
  write_json_file(manifest, args.out, "fig1_report.json", rj);
  write_reports_csv(manifest, args.out, "fig1_report.csv", {res.report});
  std::cout << "fig1: measured error " << res.report.measured_error
            << ", sign agreement " << res.sign_agreement << "\n";
  return 0;
}

struct SharpnessArgs {
  rankp::Index n = 1000;
  double c = 4.0;
  int trials = 20;
  std::uint64_t seed = 0;
  std::string out = "out";
};

int cmd_experiment_sharpness(const SharpnessArgs& args, RunManifest& manifest) {
  manifest.config =
      json{{"n", args.n}, {"c", args.c}, {"trials", args.trials}, {"seed", args.seed}};
  const rankp::SharpnessReport rep =
      rankp::run_sharpness(args.n, args.c, args.trials, args.seed);
  std::string csv = "trial,seed,sigma1,sigma1_tilde,norm_e,shift,ratio,error_rank1,"
                    "lower_bound_ok\n";
  bool all_lower = true;
  for (std::size_t t = 0; t < rep.trials.size(); ++t) {
    const auto& tr = rep.trials[t];
    csv += std::to_string(t) + "," + std::to_string(tr.seed) + "," +
           rankp::format_double(tr.sigma1) + "," + rankp::format_double(tr.sigma1_tilde) +
           "," + rankp::format_double(tr.norm_e) + "," + rankp::format_double(tr.shift) +
           "," + (tr.ratio ? rankp::format_double(*tr.ratio) : std::string()) + "," +
           rankp::format_double(tr.error_rank1) + "," + (tr.lower_bound_ok ? "1" : "0") +
           "\n";
    all_lower = all_lower && tr.lower_bound_ok;
  }
  write_text(manifest, args.out, "sharpness.csv", csv);
  std::cout << "sharpness: " << rep.trials.size() << " trials, lower bound "
            << (all_lower ? "holds" : "VIOLATED") << "\n";
  return all_lower ? 0 : kExitViolation;
}

struct ParallelArgs {
  std::string matrix_csv;
  std::string generate_json;
  std::string noise_json;
  rankp::Index p = 1;
  std::uint64_t seed = 0;
  std::string out = "out";
};

int cmd_experiment_parallel(const ParallelArgs& args, RunManifest& manifest) {
  rankp::Matrix a;
  json ground_echo;
  if (!args.matrix_csv.empty()) {
    a = rankp::read_csv_matrix(args.matrix_csv);
    ground_echo = json{{"matrix", args.matrix_csv}};
  } else {
    const json gj = load_json(args.generate_json);
    a = rankp::build_ground(gj.get<rankp::GroundSpec>());
    ground_echo = gj;
  }
  const json nj = load_json(args.noise_json);
  rankp::NoiseSpec spec = nj.get<rankp::NoiseSpec>();
  spec.seed = rankp::rng::stream_seed(args.seed, 0);
  manifest.config = json{{"ground", ground_echo}, {"noise", nj}, {"p", args.p}};
  rankp::Matrix e;
  if (spec.kind == rankp::NoiseKind::sampling) {
    const rankp::Mask mask = rankp::sample_mask(spec.rho, a.rows(), a.cols(),
                                                rankp::rng::stream_seed(spec.seed, 11));
    e = rankp::sampling_noise(a, mask, spec.rho, spec.entry_noise.get()).E;
  } else {
    e = rankp::sample_noise(spec, a.rows(), a.cols());
  }
  const double cosine = rankp::run_parallelism(a, e, args.p);
  write_json_file(manifest, args.out, "parallelism.json", json{{"cosine", cosine}});
  std::cout << "parallelism cosine: " << cosine << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"perturbation bounds for best rank-p approximations"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  VerifyLemmasArgs vl;
  auto* sub_vl = app.add_subcommand("verify-lemmas", "contour lemma sweep");
  sub_vl->add_option("--tol", vl.tol, "quadrature tolerance")->check(CLI::PositiveNumber);
  sub_vl->add_option("--sweep-size", vl.sweep_size, "max total pole exponent")
      ->check(CLI::PositiveNumber);
  sub_vl->add_option("--out", vl.out, "output directory");

  BoundsArgs ba;
  auto* sub_b = app.add_subcommand("bounds", "evaluate bounds over seeded trials");
  auto* opt_matrix = sub_b->add_option("--matrix", ba.matrix_csv, "ground matrix CSV");
  auto* opt_gen = sub_b->add_option("--generate", ba.generate_json, "ground spec JSON");
  sub_b->add_option("--noise", ba.noise_json, "noise spec JSON")->required();
  sub_b->add_option("--p", ba.p, "approximation rank p")->required()
      ->check(CLI::PositiveNumber);
  sub_b->add_option("--r", ba.r, "rank parameter r (default: numerical rank)");
  sub_b->add_option("--trials", ba.trials, "number of trials")->check(CLI::PositiveNumber);
  sub_b->add_option("--t1", ba.t1, "tail parameter t1");
  sub_b->add_option("--t2", ba.t2, "tail parameter t2");
  auto* opt_seed_b = sub_b->add_option("--seed", ba.seed, "master seed");
  sub_b->add_option("--jobs", ba.jobs, "worker threads (default: logical cores)");
  sub_b->add_option("--out", ba.out, "output directory");
  opt_matrix->excludes(opt_gen);

  auto* sub_e = app.add_subcommand("experiment", "experiment campaigns");
  sub_e->require_subcommand(1);

  Fig1Args fa;
  auto* sub_f = sub_e->add_subcommand("fig1", "missing-entry demonstration");
  sub_f->add_option("--n", fa.n, "matrix size (divisible by 4)");
  sub_f->add_option("--rho", fa.rho, "observation density");
  auto* opt_seed_f = sub_f->add_option("--seed", fa.seed, "seed");
  sub_f->add_option("--t1", fa.t1, "tail parameter t1");
  sub_f->add_option("--out", fa.out, "output directory");

  SharpnessArgs sa;
  auto* sub_s = sub_e->add_subcommand("sharpness", "top singular value shift");
  sub_s->add_option("--n", sa.n, "matrix size");
  sub_s->add_option("--c", sa.c, "spike strength (sigma1 = c sqrt(n))");
  sub_s->add_option("--trials", sa.trials, "number of trials")->check(CLI::PositiveNumber);
  auto* opt_seed_s = sub_s->add_option("--seed", sa.seed, "seed");
  sub_s->add_option("--out", sa.out, "output directory");

  ParallelArgs pa;
  auto* sub_p = sub_e->add_subcommand("parallel", "residual parallelism diagnostic");
  auto* opt_matrix_p = sub_p->add_option("--matrix", pa.matrix_csv, "ground matrix CSV");
  auto* opt_gen_p = sub_p->add_option("--generate", pa.generate_json, "ground spec JSON");
  sub_p->add_option("--noise", pa.noise_json, "noise spec JSON")->required();
  sub_p->add_option("--p", pa.p, "approximation rank p")->required();
  auto* opt_seed_p = sub_p->add_option("--seed", pa.seed, "seed");
  sub_p->add_option("--out", pa.out, "output directory");
  opt_matrix_p->excludes(opt_gen_p);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  RunManifest manifest;
  manifest.start_time = iso_utc_now();
  for (int i = 0; i < argc; ++i) manifest.argv.emplace_back(argv[i]);

  std::string out_dir;
  int code = 0;
  try {
    if (sub_vl->parsed()) {
      manifest.command = "verify-lemmas";
      out_dir = vl.out;
      fs::create_directories(out_dir);
      code = cmd_verify_lemmas(vl, manifest);
    } else if (sub_b->parsed()) {
      manifest.command = "bounds";
      if (ba.matrix_csv.empty() == ba.generate_json.empty()) {
        std::cerr << "bounds: exactly one of --matrix / --generate is required\n";
        return kExitUsage;
      }
      ba.seed = resolve_seed(opt_seed_b, ba.seed);
      manifest.master_seed = ba.seed;
      out_dir = ba.out;
      fs::create_directories(out_dir);
      code = cmd_bounds(ba, manifest);
    } else if (sub_f->parsed()) {
      manifest.command = "experiment fig1";
      fa.seed = resolve_seed(opt_seed_f, fa.seed);
      manifest.master_seed = fa.seed;
      out_dir = fa.out;
      fs::create_directories(out_dir);
      code = cmd_experiment_fig1(fa, manifest);
    } else if (sub_s->parsed()) {
      manifest.command = "experiment sharpness";
      sa.seed = resolve_seed(opt_seed_s, sa.seed);
      manifest.master_seed = sa.seed;
      out_dir = sa.out;
      fs::create_directories(out_dir);
      code = cmd_experiment_sharpness(sa, manifest);
    } else if (sub_p->parsed()) {
      manifest.command = "experiment parallel";
      pa.seed = resolve_seed(opt_seed_p, pa.seed);
      manifest.master_seed = pa.seed;
      out_dir = pa.out;
      fs::create_directories(out_dir);
      code = cmd_experiment_parallel(pa, manifest);
    }
  } catch (const rankp::CsvFormatError& e) {
    manifest.status = "error";
    manifest.error = e.what();
    std::cerr << e.what() << "\n";
    code = kExitFormat;
  } catch (const rankp::QuadratureError& e) {
    manifest.status = "error";
    manifest.error = e.what();
    std::cerr << e.what() << "\n";
    code = kExitQuadrature;
  } catch (const rankp::LemmaViolationError& e) {
    manifest.status = "error";
    manifest.error = e.what();
    std::cerr << e.what() << "\n";
    code = kExitViolation;
  } catch (const std::exception& e) {
    manifest.status = "error";
    manifest.error = e.what();
    std::cerr << e.what() << "\n";
    code = kExitViolation;
  }
  manifest.end_time = iso_utc_now();
  if (!out_dir.empty()) manifest.write(out_dir);
  return code;
}
