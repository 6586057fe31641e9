// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Each criterion pins its tolerance in code; timings are wall-clock.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "causalinfo/causalinfo.hpp"

using namespace causalinfo;

namespace {

const Alphabet kBinary(2, "binary");
const std::vector<std::vector<double>> kHamming{{0.0, 1.0}, {1.0, 0.0}};

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

int g_failures = 0;

void report(int number, const char* title, const Outcome& o, double secs,
            double budget) {
  const bool in_budget = secs < budget;
  const bool ok = o.pass && in_budget;
  if (!ok) ++g_failures;
  std::printf("[%s] criterion %d: %s (%.1fs/%.0fs)%s%s\n", ok ? "PASS" : "FAIL",
              number, title, secs, budget,
              o.pass ? "" : " -- ", o.pass ? "" : o.detail.c_str());
  if (o.pass && !in_budget) {
    std::printf("       exceeded the runtime budget\n");
  }
  std::fflush(stdout);
}

double sup_diff_on_support(const CausalKernelFamily& a,
                           const CausalKernelFamily& b) {
  double sup = 0.0;
  for (int i = 0; i <= a.horizon(); ++i) {
    const auto& sa = a.stage(i);
    const auto& sb = b.stage(i);
    for (std::size_t r = 0; r < sa.rows; ++r) {
      if (sa.flagged[r] || sb.flagged[r]) continue;
      for (int c = 0; c < sa.cols; ++c) {
        sup = std::max(sup, std::abs(sa(r, c) - sb(r, c)));
      }
    }
  }
  return sup;
}

// --- criterion 1: the output-law objective dominates directed information,
// with gap exactly the divergence to the true output law.
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  std::mt19937_64 rng(20240917);
  for (int inst = 0; inst < 100; ++inst) {
    const RandomInstance ri = random_instance(rng, 3);
    const double di = directed_information(ri.source, ri.channel).value_nats;
    const auto [mu, nu] = marginals(causal_product(ri.source, ri.channel));
    for (int k = 0; k < 100; ++k) {
      const FinitePmf nu_bar = random_pmf(rng, nu.alphabet());
      const double val = directed_info_upper(ri.source, ri.channel, nu_bar);
      o.require(val - di >= -1e-12, "lower-bound violation at instance " +
                                        std::to_string(inst));
      o.require(std::abs((val - di) - kl_divergence(nu, nu_bar)) <= 1e-10,
                "gap is not KL(nu, nu_bar) at instance " + std::to_string(inst));
    }
    o.require(std::abs(directed_info_upper(ri.source, ri.channel, nu) - di) <=
                  1e-10,
              "achiever residual at instance " + std::to_string(inst));
  }
  report(1, "output-law variational equality (100 instances x 100 draws)", o,
         seconds_since(t0), 30.0);
}

// --- criterion 2: the product-decomposition objective is dominated by
// directed information and achieved at the exact conditionals.
void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  std::mt19937_64 rng(20240918);
  for (int inst = 0; inst < 100; ++inst) {
    const RandomInstance ri = random_instance(rng, 3);
    const auto j = causal_product(ri.source, ri.channel);
    const double di = directed_information(ri.source, ri.channel).value_nats;
    for (int k = 0; k < 100; ++k) {
      const auto s = random_kernel_family(rng, KernelKind::OutputPredictor,
                                          ri.source.x(), ri.source.y());
      const auto r = random_kernel_family(rng, KernelKind::InputPosterior,
                                          ri.source.x(), ri.source.y());
      const double val = directed_info_lower(ri.source, ri.channel, s, r);
      o.require(di - val >= -1e-12, "upper-bound violation at instance " +
                                        std::to_string(inst));
    }
    const auto s_star = condition_joint(j, KernelKind::OutputPredictor);
    const auto r_star = condition_joint(j, KernelKind::InputPosterior);
    o.require(std::abs(directed_info_lower(ri.source, ri.channel, s_star,
                                           r_star) -
                       di) <= 1e-10,
              "achiever residual at instance " + std::to_string(inst));
    o.require(sup_diff_on_support(input_posterior_kernel(ri.source, ri.channel),
                                  r_star) <= 1e-12,
              "posterior formula mismatch at instance " + std::to_string(inst));
  }
  report(2, "product-decomposition variational equality (100 x 100)", o,
         seconds_since(t0), 60.0);
}

// --- criterion 3: mutual and directed information coincide for sources
// without feedback.
void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  std::mt19937_64 rng(20240919);
  for (int inst = 0; inst < 100; ++inst) {
    const RandomInstance ri = random_instance(rng, 3, /*feedback_free=*/true);
    o.require(mutual_directed_residual(ri.source, ri.channel) <= 1e-10,
              "residual above 1e-10 at instance " + std::to_string(inst));
  }
  const auto markov = make_markov_source(2, FinitePmf::bernoulli(0.5),
                                         {{0.7, 0.3}, {0.3, 0.7}}, kBinary);
  o.require(mutual_directed_residual(markov, make_bsc_channel(2, 0.1)) <= 1e-10,
            "Markov/BSC residual");
  o.require(mutual_directed_residual(
                make_iid_source(1, FinitePmf::bernoulli(0.3), kBinary),
                make_identity_channel(1, kBinary)) <= 1e-10,
            "noiseless residual");
  report(3, "mutual = directed for feedback-free sources", o,
         seconds_since(t0), 30.0);
}

// --- criterion 4: the solver reproduces the analytic binary curve.
void criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const auto source = make_iid_source(3, FinitePmf::bernoulli(0.5), kBinary);
  const DistortionSpec d(3, kHamming);

  const Slope s_star(-std::log(9.0));
  const BaaTrace trace = baa_run(source, d, s_star, BaaConfig{});
  o.require(trace.converged, "no convergence at s = -ln 9");
  const RDPoint pt = na_rdf_value(source, d, s_star, trace);
  o.require(std::abs(pt.distortion - 0.1) <= 1e-6,
            "distortion " + std::to_string(pt.distortion) + " != 0.1");
  o.require(std::abs(pt.rate_nats_per_letter -
                     (std::log(2.0) - binary_entropy(0.1))) <= 1e-5,
            "rate off the closed form at s = -ln 9");

  std::vector<Slope> grid;
  for (int k = 0; k < 20; ++k) grid.push_back(Slope(-4.0 + 0.2 * k));
  const auto pts = rd_curve(source, d, grid, BaaConfig{});
  for (const RDPoint& p : pts) {
    o.require(p.converged, "sweep point did not converge");
    o.require(std::abs(p.rate_nats_per_letter -
                       analytic_binary_rdf(0.5, p.distortion)) <= 1e-5,
              "sweep point off h(1/2) - h(D) at s = " + std::to_string(p.s));
  }
  report(4, "analytic binary reproduction (n=3, 20-point sweep)", o,
         seconds_since(t0), 10.0);
}

// --- criterion 5: converged objectives match the brute-force grid minimum.
void criterion_5() {
  Outcome o;
  double total = 0.0;
  struct Case {
    const char* name;
    CausalKernelFamily source;
    int horizon;
    double s;
    double step;
  };
  const std::vector<Case> cases = {
      {"Bern(0.5) n=0", make_iid_source(0, FinitePmf::bernoulli(0.5), kBinary),
       0, -std::log(9.0), 0.005},
      {"Bern(0.7) n=0", make_iid_source(0, FinitePmf::bernoulli(0.7), kBinary),
       0, -1.0, 0.005},
      {"Bern(0.7) n=1", make_iid_source(1, FinitePmf::bernoulli(0.7), kBinary),
       1, -2.0, 0.01},
      {"Markov(0.3) n=1",
       make_markov_source(1, FinitePmf::bernoulli(0.5),
                          {{0.7, 0.3}, {0.3, 0.7}}, kBinary),
       1, -1.2, 0.02},
  };
  for (const Case& c : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const DistortionSpec d(c.horizon, kHamming);
    const BaaTrace trace = baa_run(c.source, d, Slope(c.s), BaaConfig{});
    o.require(trace.converged, std::string(c.name) + ": no convergence");
    const OracleReport oracle =
        grid_lagrangian_min(c.source, d, Slope(c.s), c.step);
    const double gap = oracle.value_nats - trace.final_objective();
    o.require(std::abs(gap) <= 3.0 * oracle.resolution,
              std::string(c.name) + ": |gap| " + std::to_string(std::abs(gap)) +
                  " > " + std::to_string(3.0 * oracle.resolution));
    const double secs = seconds_since(t0);
    total += secs;
    o.require(secs < 60.0, std::string(c.name) + ": instance over 60 s");
  }
  report(5, "grid-oracle equivalence on four binary instances", o, total,
         240.0);
}

// --- criterion 6: monotone objective, fixed-point residual at termination,
// and a basin-independent limit.
void criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const auto source = make_iid_source(2, FinitePmf::bernoulli(0.7), kBinary);
  const DistortionSpec d(2, kHamming);
  const Slope s(-1.5);

  // Uniform reference plus 10 random positive starts.
  double ref_rate = 0.0;
  double ref_dist = 0.0;
  for (int run = 0; run <= 10; ++run) {
    BaaConfig cfg;
    cfg.init = run == 0 ? BaaInit::Uniform : BaaInit::SeededRandomPositive;
    cfg.seed = static_cast<std::uint64_t>(run * 7919 + 13);
    const BaaTrace trace = baa_run(source, d, s, cfg);
    o.require(trace.converged, "run " + std::to_string(run) + " not converged");
    for (std::size_t k = 1; k < trace.iterates.size(); ++k) {
      o.require(trace.iterates[k].objective_nats <=
                    trace.iterates[k - 1].objective_nats + 1e-12,
                "objective increased at run " + std::to_string(run));
    }
    o.require(fixed_point_residual(source, trace.final_channel,
                                   trace.final_marginals, d, s) <= 1e-9,
              "fixed-point residual above 1e-9 at run " + std::to_string(run));
    const RDPoint pt = na_rdf_value(source, d, s, trace);
    if (run == 0) {
      ref_rate = pt.rate_nats_per_letter;
      ref_dist = pt.distortion;
    } else {
      o.require(std::abs(pt.rate_nats_per_letter - ref_rate) <= 1e-7,
                "rate depends on the initialization");
      o.require(std::abs(pt.distortion - ref_dist) <= 1e-7,
                "distortion depends on the initialization");
    }
  }
  report(6, "alternating-minimization behavior from 10 initializations", o,
         seconds_since(t0), 60.0);
}

// --- criterion 7: per-letter values are horizon-free for memoryless sources.
void criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const FinitePmf letter = FinitePmf::bernoulli(0.7);
  const auto source5 = make_iid_source(5, letter, kBinary);
  const DistortionSpec d5(5, kHamming);
  for (double s : {-3.0, -2.2, -1.6, -1.1, -0.7, -0.4, -0.15, 0.0}) {
    const BaaTrace trace = baa_run(source5, d5, Slope(s), BaaConfig{});
    o.require(trace.converged, "n=5 run not converged at s=" + std::to_string(s));
    const RDPoint pt = na_rdf_value(source5, d5, Slope(s), trace);
    const OracleReport classical = classical_blahut(letter, kHamming, Slope(s));
    o.require(std::abs(pt.rate_nats_per_letter - classical.rate_nats) <= 1e-8,
              "rate splits from the memoryless baseline at s=" +
                  std::to_string(s));
    o.require(std::abs(pt.distortion - classical.distortion) <= 1e-8,
              "distortion splits from the memoryless baseline at s=" +
                  std::to_string(s));
  }
  report(7, "memoryless reduction: n=5 equals the n=0 baseline", o,
         seconds_since(t0), 120.0);
}

// --- criterion 8: every emitted curve is monotone with convex chords.
void criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;

  {
    const auto source = make_iid_source(3, FinitePmf::bernoulli(0.5), kBinary);
    std::vector<Slope> grid;
    for (int k = 0; k < 20; ++k) grid.push_back(Slope(-4.0 + 0.2 * k));
    const auto pts = rd_curve(source, DistortionSpec(3, kHamming), grid,
                              BaaConfig{});
    o.require(check_curve_shape(pts, 1e-7).ok(), "binary symmetric curve");
  }
  {
    const auto source = make_iid_source(2, FinitePmf::bernoulli(0.7), kBinary);
    std::vector<Slope> grid;
    for (int k = 0; k < 14; ++k) grid.push_back(Slope(-4.5 + 0.3 * k));
    const auto pts = rd_curve(source, DistortionSpec(2, kHamming), grid,
                              BaaConfig{});
    o.require(check_curve_shape(pts, 1e-7).ok(), "biased binary curve");
  }
  {
    const auto source = make_markov_source(4, FinitePmf::bernoulli(0.5),
                                           {{0.7, 0.3}, {0.3, 0.7}}, kBinary);
    std::vector<Slope> grid;
    for (int k = 0; k < 12; ++k) grid.push_back(Slope(-4.0 + 0.31 * k));
    const auto pts = rd_curve(source, DistortionSpec(4, kHamming), grid,
                              BaaConfig{});
    o.require(check_curve_shape(pts, 1e-7).ok(), "Markov source curve");
    for (const RDPoint& p : pts) {
      o.require(p.converged, "Markov curve point not converged");
    }
  }
  report(8, "curve shape: monotone and convex on three sweeps", o,
         seconds_since(t0), 120.0);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
