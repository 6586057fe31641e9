// Command-line front end: problem-file ingestion, directed-information
// reports, variational spot checks, rate-distortion curve sweeps, and
// oracle comparisons.
//
// Exit codes: 0 success (including flagged non-convergence), 1 a check
// reported FAIL, 2 parse/validation error, 3 I/O error.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "causalinfo/causalinfo.hpp"

namespace {

using namespace causalinfo;

constexpr int kExitCheckFailed = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

bool verbose() {
  const char* v = std::getenv("CAUSALINFO_VERBOSE");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12f", v);
  return buf;
}

std::string fmt_sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

std::string nats_and_bits(double nats) {
  return fmt(nats) + " nats  (" + fmt(nats / kLn2) + " bits)";
}

int cmd_dirinfo(const std::string& path, const std::string& out_path) {
  const Problem prob = parse_problem_file(path);
  const CausalKernelFamily p = build_source(prob);
  const CausalKernelFamily q = build_channel(prob);

  const DirectedInfoReport report = directed_information(p, q);
  const double mi = mutual_information(causal_product(p, q));

  std::ostringstream text;
  text << "directed information I(X^n -> Y^n): " << nats_and_bits(report.value_nats)
       << "\n";
  text << "mutual information   I(X^n ; Y^n):  " << nats_and_bits(mi) << "\n";
  text << "per-stage I(X^i; Y_i | Y^{i-1}):\n";
  for (std::size_t i = 0; i < report.per_stage.size(); ++i) {
    text << "  stage " << i << ": " << nats_and_bits(report.per_stage[i]) << "\n";
  }
  text << "chain-rule residual: " << fmt_sci(report.chain_check_residual) << "\n";

  std::cout << text.str();
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      throw std::ios_base::failure("cannot open output file: " + out_path);
    }
    out << text.str();
    if (!out.good()) {
      throw std::ios_base::failure("write failed: " + out_path);
    }
  }
  return 0;
}

int cmd_check_variational(const std::string& path, int trials,
                          std::uint64_t seed) {
  const Problem prob = parse_problem_file(path);
  const CausalKernelFamily p = build_source(prob);
  const CausalKernelFamily q = build_channel(prob);

  JointCausalDistribution joint = causal_product(p, q);
  if (prob.debug_scale_joint_mass) {
    std::vector<double> scaled = joint.table();
    for (double& v : scaled) v *= *prob.debug_scale_joint_mass;
    // Re-validating the scaled table exercises the mass check end to end.
    joint = JointCausalDistribution(joint.x(), joint.y(), std::move(scaled));
  }

  const double di = directed_information(p, q).value_nats;
  const auto [mu, nu] = marginals(joint);

  std::mt19937_64 rng(seed);
  double worst_lower_gap_a = 0.0;   // most negative A - DI seen
  double worst_kl_mismatch = 0.0;   // |(A - DI) - KL(nu, nu_bar)|
  double worst_lower_gap_b = 0.0;   // most negative DI - B seen
  for (int t = 0; t < trials; ++t) {
    const FinitePmf nu_bar = random_pmf(rng, nu.alphabet());
    const double a = directed_info_upper(p, q, nu_bar);
    worst_lower_gap_a = std::min(worst_lower_gap_a, a - di);
    worst_kl_mismatch = std::max(
        worst_kl_mismatch, std::abs((a - di) - kl_divergence(nu, nu_bar)));

    const CausalKernelFamily s_rand = random_kernel_family(
        rng, KernelKind::OutputPredictor, p.x(), p.y());
    const CausalKernelFamily r_rand = random_kernel_family(
        rng, KernelKind::InputPosterior, p.x(), p.y());
    const double b = directed_info_lower(p, q, s_rand, r_rand);
    worst_lower_gap_b = std::min(worst_lower_gap_b, di - b);
  }

  const double achiever_a = std::abs(directed_info_upper(p, q, nu) - di);
  const CausalKernelFamily s_star = condition_joint(joint, KernelKind::OutputPredictor);
  const CausalKernelFamily r_star = condition_joint(joint, KernelKind::InputPosterior);
  const double achiever_b =
      std::abs(directed_info_lower(p, q, s_star, r_star) - di);

  // Closed-form posterior against the exact conditional, on support only.
  const CausalKernelFamily r_formula = input_posterior_kernel(p, q);
  double posterior_diff = 0.0;
  for (int i = 0; i <= p.horizon(); ++i) {
    const auto& a = r_formula.stage(i);
    const auto& b = r_star.stage(i);
    for (std::size_t r = 0; r < a.rows; ++r) {
      if (a.flagged[r] || b.flagged[r]) continue;
      for (int c = 0; c < a.cols; ++c) {
        posterior_diff = std::max(posterior_diff, std::abs(a(r, c) - b(r, c)));
      }
    }
  }

  const bool pass = worst_lower_gap_a >= -1e-12 && worst_lower_gap_b >= -1e-12 &&
                    achiever_a <= 1e-10 && achiever_b <= 1e-10 &&
                    posterior_diff <= 1e-12;

  std::cout << "directed information: " << nats_and_bits(di) << "\n";
  std::cout << "trials: " << trials << " seed: " << seed << "\n";
  std::cout << "max lower-bound violation, output-law objective:  "
            << fmt_sci(-worst_lower_gap_a) << "\n";
  std::cout << "max |gap - KL(nu, nu_bar)|:                       "
            << fmt_sci(worst_kl_mismatch) << "\n";
  std::cout << "max upper-bound violation, product decomposition: "
            << fmt_sci(-worst_lower_gap_b) << "\n";
  std::cout << "achiever residual (true output law):              "
            << fmt_sci(achiever_a) << "\n";
  std::cout << "achiever residual (exact conditionals):           "
            << fmt_sci(achiever_b) << "\n";
  std::cout << "posterior formula vs conditional extraction:      "
            << fmt_sci(posterior_diff) << "\n";
  std::cout << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : kExitCheckFailed;
}

int cmd_rdf_curve(const std::string& path, std::string out_path,
                  bool no_warm_start, bool parallel) {
  const Problem prob = parse_problem_file(path);
  const CausalKernelFamily source = build_source(prob);
  const DistortionSpec d = build_distortion(prob);
  const std::vector<Slope> grid = slope_grid(prob);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i].value < grid[i - 1].value) {
      throw ProblemError("problem field 's_grid': must be sorted ascending");
    }
  }
  if (out_path.empty()) {
    if (!prob.output_csv) {
      throw ProblemError(
          "no output path: pass --out or set output.csv in the problem file");
    }
    out_path = *prob.output_csv;
  }

  if (verbose()) {
    std::cerr << "sweeping " << grid.size() << " slopes, warm_start="
              << (no_warm_start ? "off" : "on") << "\n";
  }
  const std::vector<RDPoint> points =
      rd_curve(source, d, grid, prob.baa, !no_warm_start,
               parallel && no_warm_start);

  std::ofstream out(out_path);
  if (!out) {
    throw std::ios_base::failure("cannot open output file: " + out_path);
  }
  out << "s,D,R_nats_per_letter,R_bits_per_letter,iterations,residual,converged\n";
  int flagged = 0;
  for (const RDPoint& pt : points) {
    out << fmt(pt.s) << ',' << fmt(pt.distortion) << ','
        << fmt(pt.rate_nats_per_letter) << ',' << fmt(pt.rate_bits_per_letter)
        << ',' << pt.iterations << ',' << fmt_sci(pt.residual) << ','
        << (pt.converged ? "true" : "false") << '\n';
    if (!pt.converged) ++flagged;
  }
  if (!out.good()) {
    throw std::ios_base::failure("write failed: " + out_path);
  }

  const CurveShapeReport shape = check_curve_shape(points);
  std::cout << "wrote " << points.size() << " points to " << out_path << "\n";
  std::cout << "endpoints: (D=" << fmt(points.front().distortion)
            << ", R=" << fmt(points.front().rate_nats_per_letter)
            << ") .. (D=" << fmt(points.back().distortion)
            << ", R=" << fmt(points.back().rate_nats_per_letter)
            << ") nats/letter\n";
  std::cout << "monotone: " << (shape.distortion_monotone && shape.rate_monotone
                                     ? "true" : "false")
            << "  convex: " << (shape.convex ? "true" : "false") << "\n";
  if (flagged > 0) {
    std::cerr << "warning: " << flagged
              << " point(s) did not converge within max_iter\n";
  }
  return 0;
}

int cmd_oracle_compare(const std::string& path, double step) {
  const Problem prob = parse_problem_file(path);
  const CausalKernelFamily source = build_source(prob);
  const DistortionSpec d = build_distortion(prob);
  const std::vector<Slope> grid = slope_grid(prob);

  bool all_pass = true;
  for (const Slope s : grid) {
    const BaaTrace trace = baa_run(source, d, s, prob.baa);
    const double baa_objective = trace.final_objective();
    const OracleReport oracle = grid_lagrangian_min(source, d, s, step);
    const double gap = oracle.value_nats - baa_objective;
    const bool pass = std::abs(gap) <= 3.0 * oracle.resolution;
    all_pass = all_pass && pass;
    std::cout << "s=" << fmt(s.value) << "  baa objective=" << fmt(baa_objective)
              << "  grid minimum=" << fmt(oracle.value_nats) << "  gap="
              << fmt_sci(gap) << "  bound=" << fmt(3.0 * oracle.resolution)
              << "  " << (pass ? "PASS" : "FAIL") << "\n";

    if (prob.source_type == SourceType::Iid) {
      const OracleReport classical = classical_blahut(
          FinitePmf(Alphabet(prob.x_size, "x"), prob.source_pmf), *prob.distortion,
          s);
      const double per_letter = baa_objective / (prob.horizon + 1);
      const double cgap = std::abs(per_letter - classical.value_nats);
      const bool cpass = cgap <= 1e-8;
      all_pass = all_pass && cpass;
      std::cout << "s=" << fmt(s.value) << "  per-letter objective vs classical"
                << " alternating minimization: gap=" << fmt_sci(cgap) << "  "
                << (cpass ? "PASS" : "FAIL") << "\n";
    }
  }
  std::cout << (all_pass ? "PASS" : "FAIL") << "\n";
  return all_pass ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Finite-alphabet directed information and nonanticipative "
      "rate-distortion"};
  app.require_subcommand(1);

  std::string problem_path;
  std::string out_path;
  int trials = 100;
  std::uint64_t seed = 1;
  bool no_warm_start = false;
  bool parallel = false;
  double step = 0.0;

  auto* dirinfo = app.add_subcommand(
      "dirinfo", "Directed and mutual information of a source/channel pair");
  dirinfo->add_option("file", problem_path, "problem file")->required();
  dirinfo->add_option("--out", out_path, "also write the report to this file");

  auto* checkvar = app.add_subcommand(
      "check-variational",
      "Randomized bounds and achiever checks for both variational objectives");
  checkvar->add_option("file", problem_path, "problem file")->required();
  checkvar->add_option("--trials", trials, "random draws per objective");
  checkvar->add_option("--seed", seed, "RNG seed");

  auto* curve = app.add_subcommand(
      "rdf-curve", "Sweep the rate-distortion curve over the slope grid");
  curve->add_option("file", problem_path, "problem file")->required();
  curve->add_option("--out", out_path, "output CSV path");
  curve->add_flag("--no-warm-start", no_warm_start,
                  "solve each slope from the configured init");
  curve->add_flag("--parallel", parallel,
                  "evaluate grid points concurrently (needs --no-warm-start)");

  auto* oracle = app.add_subcommand(
      "oracle-compare",
      "Compare the converged objective against brute-force oracles");
  oracle->add_option("file", problem_path, "problem file")->required();
  oracle->add_option("--step", step,
                     "simplex grid step (default 0.01 at n=0, 0.02 at n=1)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (dirinfo->parsed()) return cmd_dirinfo(problem_path, out_path);
    if (checkvar->parsed()) return cmd_check_variational(problem_path, trials, seed);
    if (curve->parsed()) {
      return cmd_rdf_curve(problem_path, out_path, no_warm_start, parallel);
    }
    if (oracle->parsed()) return cmd_oracle_compare(problem_path, step);
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ProblemError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::length_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
