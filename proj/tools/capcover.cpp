// capcover: generate cap families, test separability, compute and verify
// covering caps, run the brute-force oracles, plot and benchmark.
//
// Exit codes: 0 success, 1 verification/oracle failure, 2 separable,
// 3 indeterminate, 4 refused (separable), 5 invalid cover, 64 malformed
// input file or invalid argument, 65 hypothesis violated, 66 size budget
// exceeded, 70 internal error.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <omp.h>

#include "CLI11.hpp"
#include "capcover/cover.hpp"
#include "capcover/generators.hpp"
#include "capcover/io.hpp"
#include "capcover/oracle.hpp"
#include "capcover/separability.hpp"
#include "capcover/svg.hpp"

namespace cc = capcover;

namespace {

enum Exit : int {
  kOk = 0,
  kFail = 1,
  kSeparable = 2,
  kIndeterminate = 3,
  kRefused = 4,
  kInvalidCover = 5,
  kMalformed = 64,
  kHypothesis = 65,
  kBudget = 66,
  kInternal = 70,
};

std::string margin_text(double m) {
  return std::isnan(m) ? "null" : fmt::format("{:.17g}", m);
}

void print_verdict(const cc::SeparabilityVerdict& v) {
  fmt::print("status: {}\n", cc::to_string(v.status));
  fmt::print("method: {}\n", cc::to_string(v.method));
  fmt::print("best_margin: {}\n", margin_text(v.best_margin));
  fmt::print("patterns_checked: {}\n", v.patterns_checked);
  if (v.witness_pattern) {
    fmt::print("witness_pattern: {}\n", v.witness_pattern->to_string());
  }
  if (v.witness_normal) {
    fmt::print("witness_normal: {}\n", cc::to_string(*v.witness_normal));
  }
}

int verdict_exit(const cc::SeparabilityVerdict& v) {
  switch (v.status) {
    case cc::SeparabilityStatus::nonseparable: return kOk;
    case cc::SeparabilityStatus::separable: return kSeparable;
    case cc::SeparabilityStatus::indeterminate: return kIndeterminate;
  }
  return kInternal;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    cc::write_file_atomic(out, text);
  }
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string kind;
  int dim = 2;
  int n = 3;
  std::uint64_t seed = 0;
  std::vector<double> radii;
  double overlap = 0.0;
  double total = 1.2;
  bool equator = false;
  std::string out;
};

int run_gen(const GenArgs& a) {
  cc::Instance inst;
  if (a.kind == "chain") {
    std::vector<double> radii = a.radii;
    if (radii.empty()) {
      radii = {a.n * (cc::kPi / 12) < cc::kHalfPi - 1e-3 ? cc::kPi / 12
                                                         : 1.4 / a.n};
    }
    if (a.equator) {
      if (radii.size() == 1) radii.assign(a.n, radii.front());
      inst = cc::gen_chain_on_equator(a.dim, radii, a.overlap);
    } else {
      inst = cc::gen_chain(a.dim, a.n, radii, a.overlap, a.seed);
    }
  } else if (a.kind == "tree") {
    inst = cc::gen_random_tree(a.dim, a.n, a.seed, a.total);
  } else {
    inst = cc::gen_separable(a.dim, a.seed);
  }
  emit(a.out, cc::instance_to_json(inst));
  return kOk;
}

// ---------------------------------------------------------------------------

struct SolverArgs {
  int restarts = 8;
  int iters = 5000;
  std::uint64_t seed = 0;

  cc::SolverParams params() const {
    cc::SolverParams p;
    p.restarts = restarts;
    p.max_iters = iters;
    p.seed = seed;
    return p;
  }
};

int run_check(const std::string& file, const SolverArgs& s) {
  const cc::Instance inst = cc::load_instance(file);
  const cc::SeparabilityVerdict v = cc::check_nonseparable(inst, s.params());
  print_verdict(v);
  return verdict_exit(v);
}

// ---------------------------------------------------------------------------

struct CoverArgs {
  std::string file;
  std::string out;
  bool skip_check = false;
  int exact_threshold = cc::kMaxExactSigning;
  SolverArgs solver;
};

int run_cover(const CoverArgs& a) {
  const cc::Instance inst = cc::load_instance(a.file);
  cc::CoverOptions opt;
  opt.skip_check = a.skip_check;
  opt.solver = a.solver.params();
  opt.signing.exact_threshold = a.exact_threshold;
  opt.signing.seed = a.solver.seed;

  cc::CertificateFile file;
  file.instance_digest = cc::instance_digest(inst);
  file.seed = a.solver.seed;
  try {
    file.certificate = cc::cover_caps(inst, opt);
  } catch (const cc::RefusedInput& e) {
    fmt::print(std::cerr, "capcover: {}\n", e.what());
    print_verdict(e.verdict());
    return e.verdict().separable() ? kRefused : kIndeterminate;
  } catch (const cc::ConstructionError& e) {
    fmt::print(std::cerr, "capcover: cover construction failed: {}\n",
               e.what());
    return kInvalidCover;
  } catch (const cc::InvariantError& e) {
    fmt::print(std::cerr, "capcover: cover construction failed: {}\n",
               e.what());
    return kInvalidCover;
  }

  const cc::CoverCertificate& c = file.certificate;
  emit(a.out, cc::certificate_to_json(file));
  const double worst =
      *std::min_element(c.containment_slacks.begin(),
                        c.containment_slacks.end());
  fmt::print(std::cerr,
             "cover: center={} radius={:.17g} min_slack={:.3g} merges={} "
             "heuristic={} valid={}\n",
             cc::to_string(c.cover_cap.center), c.cover_cap.radius, worst,
             c.merge_trace.size(), c.heuristic_signing, c.valid);
  return c.valid ? kOk : kInvalidCover;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string cert;
  std::string file;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 0;
};

int run_verify(const VerifyArgs& a) {
  const cc::CertificateFile file = cc::load_certificate(a.cert);
  const cc::Instance inst = cc::load_instance(a.file);
  const cc::CoverCertificate& c = file.certificate;
  bool ok = true;
  auto fail = [&](const std::string& msg) {
    fmt::print("FAIL {}\n", msg);
    ok = false;
  };

  if (file.instance_digest != cc::instance_digest(inst)) {
    fail("instance digest does not match the certificate");
  }
  if (c.input_caps.size() != inst.caps.size()) {
    fail("certificate lists a different number of caps");
  }
  if (c.cover_cap.center.size() != inst.dim + 1) {
    fail("certificate dimension differs from the instance");
    return kFail;
  }
  const double total = cc::sum_of_radii(inst);
  if (std::abs(c.cover_cap.radius - total) > 1e-12) {
    fail(fmt::format("cover radius {:.17g} differs from the radius sum {:.17g}",
                     c.cover_cap.radius, total));
  }
  if (!c.valid) fail("certificate is marked invalid");

  const std::vector<double> slacks =
      cc::containment_slacks(c.cover_cap, inst.caps);
  for (std::size_t i = 0; i < slacks.size(); ++i) {
    if (slacks[i] < -cc::kEpsGeom) {
      fail(fmt::format("cap {} sticks out of the cover by {:.3g}", i,
                       -slacks[i]));
    }
    if (i < c.containment_slacks.size() &&
        std::abs(slacks[i] - c.containment_slacks[i]) > 1e-12) {
      fail(fmt::format("recorded slack of cap {} does not reproduce", i));
    }
  }

  if (c.separability.method != cc::SeparabilityMethod::skipped) {
    cc::SolverParams p;
    p.seed = file.seed;
    const cc::SeparabilityVerdict v = cc::check_nonseparable(inst, p);
    if (v.status != c.separability.status) {
      fail(fmt::format("separability re-check gives {}, certificate says {}",
                       cc::to_string(v.status),
                       cc::to_string(c.separability.status)));
    }
  }

  std::uint64_t outside = 0;
  for (std::size_t i = 0; i < inst.caps.size(); ++i) {
    const cc::OracleReport r = cc::sampled_containment(
        c.cover_cap, inst.caps[i], a.samples, cc::split_seed(a.seed, i));
    outside += r.violations;
    if (!r.pass()) {
      fail(fmt::format("{} of {} samples of cap {} fall outside the cover",
                       r.violations, r.checked, i));
    }
  }
  fmt::print("{} caps, {} samples each, {} outside; analytic min slack {:.3g}\n",
             inst.caps.size(), a.samples, outside,
             slacks.empty() ? 0.0
                            : *std::min_element(slacks.begin(), slacks.end()));
  fmt::print("{}\n", ok ? "OK" : "FAILED");
  return ok ? kOk : kFail;
}

// ---------------------------------------------------------------------------

struct OracleArgs {
  std::string kind;
  std::string file;
  std::uint64_t resolution = 1000000;
  std::uint64_t families = 1000;
  std::uint64_t samples = 100;
  int max_n = 6;
  int iters = 2000;
  int restarts = 8;
  std::uint64_t seed = 0;
  bool corrupt = false;
};

int run_oracle(const OracleArgs& a) {
  if (a.kind == "grid-sep") {
    if (a.file.empty()) throw CLI::ValidationError("grid-sep needs FILE");
    const cc::Instance inst = cc::load_instance(a.file);
    const cc::OracleReport r = cc::grid_separability(inst, a.resolution);
    fmt::print("directions: {}\nseparating: {}\nbest_margin: {:.6g}\n",
               r.checked, r.violations, r.max_violation);
    if (!r.witnesses.empty()) {
      fmt::print("witness_normal: {}\n", cc::to_string(r.witnesses.front()));
    }
    fmt::print("{}\n", r.pass() ? "no separating great circle found"
                                : "separating great circle found");
    return r.pass() ? kOk : kFail;
  }
  if (a.kind == "lemma7") {
    cc::Lemma7Options o;
    o.families = a.families;
    o.samples_per_family = a.samples;
    o.max_n = a.max_n;
    o.seed = a.seed;
    o.corrupt_membership = a.corrupt;
    const cc::OracleReport r = cc::lemma7_harness(o);
    fmt::print("triples: {}\npremises: {}\nviolations: {}\n", r.checked,
               r.premises, r.violations);
    fmt::print("{}\n", r.pass() ? "PASS" : "FAIL");
    return r.pass() ? kOk : kFail;
  }
  if (a.file.empty()) throw CLI::ValidationError("mec needs FILE");
  const cc::Instance inst = cc::load_instance(a.file);
  const cc::EnclosingCap e =
      cc::minimal_enclosing_cap_estimate(inst.caps, a.iters, a.restarts, a.seed);
  const double total = cc::sum_of_radii(inst);
  fmt::print("center: {}\nradius: {:.17g}\nradius_sum: {:.17g}\n",
             cc::to_string(e.center), e.radius, total);
  const bool pass = e.radius <= total + 1e-9;
  fmt::print("{}\n", pass ? "PASS" : "FAIL");
  return pass ? kOk : kFail;
}

// ---------------------------------------------------------------------------

struct PlotArgs {
  std::string file;
  std::string cert;
  std::string out;
  int size = 400;
  std::uint64_t seed = 0;
};

int run_plot(const PlotArgs& a) {
  cc::PlotInput in;
  in.instance = cc::load_instance(a.file);
  if (in.instance.dim != 2) {
    fmt::print(std::cerr, "capcover: plot supports dim 2 only\n");
    return kFail;
  }
  if (!a.cert.empty()) {
    in.cover = cc::load_certificate(a.cert).certificate.cover_cap;
  } else {
    cc::SolverParams p;
    p.seed = a.seed;
    const cc::SeparabilityVerdict v = cc::check_nonseparable(in.instance, p);
    if (v.separable()) in.witness_normal = v.witness_normal;
  }
  emit(a.out, cc::render_svg(in, a.size));
  return kOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string suite = "mixed";
  std::uint64_t seed = 0;
  int count = 100;
  std::string out;
};

struct BenchRow {
  int n = 0, dim = 0;
  double sum_alpha = 0, w_before = 0, w_after = 0;
  std::size_t merges = 0;
  double max_slack = 0, min_slack = 0, wall_ms = 0;
  bool valid = false;
};

cc::Instance bench_instance(const std::string& suite, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int dim = std::uniform_int_distribution<int>(2, 3)(rng);
  const int n = std::uniform_int_distribution<int>(1, 10)(rng);
  const double total =
      std::uniform_real_distribution<double>(0.1, cc::kHalfPi - 0.01)(rng);
  const bool chain = suite == "chain" || (suite == "mixed" && rng() % 2 == 0);
  if (chain) {
    const double overlap = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    const auto radii =
        cc::random_radii(n, std::min(total, cc::kHalfPi - 0.002), rng());
    return cc::gen_chain(dim, n, radii, overlap, rng());
  }
  return cc::gen_random_tree(dim, n, rng(), total);
}

int run_bench(const BenchArgs& a) {
  if (a.count < 1) throw CLI::ValidationError("--count must be positive");
  std::vector<BenchRow> rows(a.count);
  int failures = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : failures)
  for (int i = 0; i < a.count; ++i) {
    const cc::Instance inst =
        bench_instance(a.suite, cc::split_seed(a.seed, i));
    cc::CoverOptions opt;
    opt.solver.seed = a.seed;
    opt.solver.exec = cc::Exec::serial;
    opt.signing.exec = cc::Exec::serial;
    opt.signing.seed = a.seed;
    BenchRow& r = rows[i];
    r.n = static_cast<int>(inst.caps.size());
    r.dim = inst.dim;
    r.sum_alpha = cc::sum_of_radii(inst);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const cc::CoverCertificate c = cc::cover_caps(inst, opt);
      r.w_before = c.initial_w_norm;
      r.w_after = c.final_w.norm();
      r.merges = c.merge_trace.size();
      r.max_slack = *std::max_element(c.containment_slacks.begin(),
                                      c.containment_slacks.end());
      r.min_slack = *std::min_element(c.containment_slacks.begin(),
                                      c.containment_slacks.end());
      r.valid = c.valid;
    } catch (const cc::Error&) {
      r.valid = false;
    }
    r.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    if (!r.valid) ++failures;
  }

  std::string csv =
      "n,dim,sum_alpha,w_before,w_after,merges,max_slack,min_slack,valid,"
      "wall_ms\n";
  for (const BenchRow& r : rows) {
    csv += fmt::format("{},{},{:.17g},{:.17g},{:.17g},{},{:.17g},{:.17g},{},"
                       "{:.3f}\n",
                       r.n, r.dim, r.sum_alpha, r.w_before, r.w_after,
                       r.merges, r.max_slack, r.min_slack, r.valid ? 1 : 0,
                       r.wall_ms);
  }
  emit(a.out, csv);
  fmt::print(std::cerr, "bench: {} instances, {} failed, {} threads\n",
             a.count, failures, omp_get_max_threads());
  return failures == 0 ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covering families of spherical caps by a single cap"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cc::kToolVersion));

  std::uint64_t default_seed = 0;
  if (const char* env = std::getenv("CAPCOVER_SEED")) {
    try {
      default_seed = std::stoull(env);
    } catch (const std::exception&) {
      fmt::print(std::cerr, "capcover: ignoring malformed CAPCOVER_SEED\n");
    }
  }

  GenArgs gen;
  gen.seed = default_seed;
  auto* gen_cmd = app.add_subcommand("gen", "Generate an instance file");
  gen_cmd->add_option("kind", gen.kind, "chain, tree or separable")
      ->required()
      ->check(CLI::IsMember({"chain", "tree", "separable"}));
  gen_cmd->add_option("--dim", gen.dim, "Sphere dimension d (points in R^{d+1})")
      ->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "Number of caps")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--radius", gen.radii,
                      "Chain radii: one value for all caps, or n values");
  gen_cmd->add_option("--overlap", gen.overlap,
                      "Chain overlap factor in [0, 1]; 0 makes caps tangent")
      ->capture_default_str();
  gen_cmd->add_option("--total", gen.total, "Tree radius sum")
      ->capture_default_str();
  gen_cmd->add_flag("--equator", gen.equator,
                    "Lay the chain along the e1-e2 great circle");
  gen_cmd->add_option("--out", gen.out, "Output file (default stdout)");

  std::string check_file;
  SolverArgs check_solver;
  check_solver.seed = default_seed;
  auto* check_cmd = app.add_subcommand("check", "Decide separability");
  check_cmd->add_option("FILE", check_file)->required();
  check_cmd->add_option("--restarts", check_solver.restarts)
      ->capture_default_str();
  check_cmd->add_option("--iters", check_solver.iters)->capture_default_str();
  check_cmd->add_option("--seed", check_solver.seed)->capture_default_str();

  CoverArgs cover;
  cover.solver.seed = default_seed;
  auto* cover_cmd = app.add_subcommand("cover", "Compute a covering cap");
  cover_cmd->add_option("FILE", cover.file)->required();
  cover_cmd->add_option("--out", cover.out, "Certificate file (default stdout)");
  cover_cmd->add_flag("--skip-check", cover.skip_check,
                      "Do not test separability first");
  cover_cmd->add_option("--exact-threshold", cover.exact_threshold,
                        "Largest family signed exactly; above it local search")
      ->capture_default_str();
  cover_cmd->add_option("--restarts", cover.solver.restarts)
      ->capture_default_str();
  cover_cmd->add_option("--iters", cover.solver.iters)->capture_default_str();
  cover_cmd->add_option("--seed", cover.solver.seed)->capture_default_str();

  VerifyArgs verify;
  verify.seed = default_seed;
  auto* verify_cmd =
      app.add_subcommand("verify", "Re-verify a certificate against its instance");
  verify_cmd->add_option("CERT", verify.cert)->required();
  verify_cmd->add_option("FILE", verify.file)->required();
  verify_cmd->add_option("--samples", verify.samples, "Samples per cap")
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify.seed)->capture_default_str();

  OracleArgs oracle;
  oracle.seed = default_seed;
  auto* oracle_cmd = app.add_subcommand("oracle", "Run a brute-force oracle");
  oracle_cmd->add_option("kind", oracle.kind, "grid-sep, lemma7 or mec")
      ->required()
      ->check(CLI::IsMember({"grid-sep", "lemma7", "mec"}));
  oracle_cmd->add_option("FILE", oracle.file, "Instance (grid-sep, mec)");
  oracle_cmd->add_option("--resolution", oracle.resolution,
                         "grid-sep: number of lattice directions")
      ->capture_default_str();
  oracle_cmd->add_option("--families", oracle.families, "lemma7")
      ->capture_default_str();
  oracle_cmd->add_option("--samples", oracle.samples,
                         "lemma7: samples per family")
      ->capture_default_str();
  oracle_cmd->add_option("--max-n", oracle.max_n, "lemma7: largest family")
      ->capture_default_str();
  oracle_cmd->add_flag("--corrupt", oracle.corrupt,
                       "lemma7: test the wrong cell (must fail)");
  oracle_cmd->add_option("--iters", oracle.iters, "mec")->capture_default_str();
  oracle_cmd->add_option("--restarts", oracle.restarts, "mec")
      ->capture_default_str();
  oracle_cmd->add_option("--seed", oracle.seed)->capture_default_str();

  PlotArgs plot;
  plot.seed = default_seed;
  auto* plot_cmd = app.add_subcommand("plot", "Render a d = 2 instance as SVG");
  plot_cmd->add_option("FILE", plot.file)->required();
  plot_cmd->add_option("CERT", plot.cert);
  plot_cmd->add_option("--out", plot.out, "SVG file (default stdout)");
  plot_cmd->add_option("--size", plot.size, "Panel size in pixels")
      ->capture_default_str();

  BenchArgs bench;
  bench.seed = default_seed;
  auto* bench_cmd = app.add_subcommand("bench", "Batch experiments to CSV");
  bench_cmd->add_option("--suite", bench.suite)
      ->check(CLI::IsMember({"chain", "tree", "mixed"}))
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
  bench_cmd->add_option("--count", bench.count)->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen_cmd->parsed()) return run_gen(gen);
    if (check_cmd->parsed()) return run_check(check_file, check_solver);
    if (cover_cmd->parsed()) return run_cover(cover);
    if (verify_cmd->parsed()) return run_verify(verify);
    if (oracle_cmd->parsed()) return run_oracle(oracle);
    if (plot_cmd->parsed()) return run_plot(plot);
    if (bench_cmd->parsed()) return run_bench(bench);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const cc::FormatError& e) {
    fmt::print(std::cerr, "capcover: {}\n", e.what());
    return kMalformed;
  } catch (const cc::ValidationError& e) {
    fmt::print(std::cerr, "capcover: invalid input: {}\n", e.what());
    return kMalformed;
  } catch (const cc::HypothesisError& e) {
    fmt::print(std::cerr, "capcover: hypothesis violated: {}\n", e.what());
    return kHypothesis;
  } catch (const cc::BudgetError& e) {
    fmt::print(std::cerr, "capcover: {}\n", e.what());
    return kBudget;
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "capcover: internal error: {}\n", e.what());
    return kInternal;
  }
  return kInternal;
}
