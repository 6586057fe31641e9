#include <doctest.h>

#include <cmath>
#include <random>

#include "causalinfo/directed_info.hpp"
#include "causalinfo/oracle.hpp"
#include "causalinfo/random.hpp"

using namespace causalinfo;

namespace {

const Alphabet kBinary(2, "binary");

/// Test-side evaluation of D(joint || s x r), the expected gap of the
/// product-decomposition objective.
double kl_joint_vs_product(const JointCausalDistribution& j,
                           const CausalKernelFamily& s,
                           const CausalKernelFamily& r) {
  double acc = 0.0;
  for (std::size_t ix = 0; ix < j.size_x(); ++ix) {
    for (std::size_t iy = 0; iy < j.size_y(); ++iy) {
      const double w = j(ix, iy);
      if (w == 0.0) continue;
      double prod = 1.0;
      for (int i = 0; i <= j.x().horizon(); ++i) {
        prod *= s.stage_prob(i, ix, iy) * r.stage_prob(i, ix, iy);
      }
      acc += w * std::log(w / prod);
    }
  }
  return acc;
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

}  // namespace

TEST_CASE("directed information vanishes for an input-blind channel") {
  const auto p = make_iid_source(2, FinitePmf::bernoulli(0.3), kBinary);
  const auto q =
      make_memoryless_channel(2, {{0.6, 0.4}, {0.6, 0.4}}, kBinary, kBinary);
  const auto rep = directed_information(p, q);
  CHECK(std::abs(rep.value_nats) <= 1e-12);
  CHECK(rep.value_nats >= -1e-12);
}

TEST_CASE("directed information of a noiseless pair is the source entropy") {
  const auto p = make_iid_source(1, FinitePmf::bernoulli(0.5), kBinary);
  const auto q = make_identity_channel(1, kBinary);
  const auto rep = directed_information(p, q);
  CHECK(std::abs(rep.value_nats - 2.0 * std::log(2.0)) <= 1e-12);
  REQUIRE(rep.per_stage.size() == 2);
  CHECK(std::abs(rep.per_stage[0] - std::log(2.0)) <= 1e-12);
  CHECK(std::abs(rep.per_stage[1] - std::log(2.0)) <= 1e-12);
  CHECK(rep.chain_check_residual <= 1e-10);
}

TEST_CASE("directed information through a BSC, against the closed form") {
  const auto p = make_iid_source(0, FinitePmf::bernoulli(0.5), kBinary);
  const auto q = make_bsc_channel(0, 0.1);
  const auto rep = directed_information(p, q);
  const double expected = std::log(2.0) - binary_entropy(0.1);
  CHECK(std::abs(rep.value_nats - expected) <= 1e-12);
  CHECK(rep.value_nats / kLn2 == doctest::Approx(0.531).epsilon(1e-3));
}

TEST_CASE("chain decomposition agrees with the log-ratio path") {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 60; ++t) {
    const auto inst = random_instance(rng, 3);
    const auto rep = directed_information(inst.source, inst.channel);
    CHECK(rep.value_nats >= -1e-12);
    CHECK(rep.chain_check_residual <= 1e-10);
  }
}

TEST_CASE("mutual information basics") {
  const auto p = make_iid_source(0, FinitePmf::bernoulli(0.5), kBinary);
  CHECK(mutual_information(causal_product(
            p, make_memoryless_channel(0, {{0.4, 0.6}, {0.4, 0.6}}, kBinary,
                                       kBinary))) <= 1e-12);
  CHECK(std::abs(mutual_information(causal_product(
                     p, make_identity_channel(0, kBinary))) -
                 std::log(2.0)) <= 1e-12);
  const auto q = make_bsc_channel(0, 0.1);
  CHECK(std::abs(mutual_information(causal_product(p, q)) -
                 directed_information(p, q).value_nats) <= 1e-12);
}

TEST_CASE("output-law objective: achiever and closed-form gap") {
  const auto p = make_iid_source(0, FinitePmf::bernoulli(0.9), kBinary);
  const auto q = make_bsc_channel(0, 0.1);
  const double di = directed_information(p, q).value_nats;
  const auto [mu, nu] = marginals(causal_product(p, q));

  CHECK(std::abs(directed_info_upper(p, q, nu) - di) <= 1e-10);

  const FinitePmf uniform = FinitePmf::uniform(nu.alphabet());
  const double at_uniform = directed_info_upper(p, q, uniform);
  CHECK(at_uniform - di == doctest::Approx(0.2218).epsilon(1e-3));
  CHECK(std::abs((at_uniform - di) - kl_divergence(nu, uniform)) <= 1e-10);

  // A trial law missing part of the support takes the objective to +inf.
  CHECK(std::isinf(directed_info_upper(p, q, FinitePmf::delta(nu.alphabet(), 0))));
}

TEST_CASE("output-law objective dominates directed information") {
  std::mt19937_64 rng(131);
  for (int t = 0; t < 40; ++t) {
    const auto inst = random_instance(rng, 3);
    const double di = directed_information(inst.source, inst.channel).value_nats;
    const auto [mu, nu] = marginals(causal_product(inst.source, inst.channel));
    for (int k = 0; k < 10; ++k) {
      const FinitePmf nu_bar = random_pmf(rng, nu.alphabet());
      const double val = directed_info_upper(inst.source, inst.channel, nu_bar);
      CHECK(val - di >= -1e-12);
      CHECK(std::abs((val - di) - kl_divergence(nu, nu_bar)) <= 1e-10);
    }
  }
}

TEST_CASE("product-decomposition objective: achiever attains equality") {
  const auto p = make_iid_source(1, FinitePmf::bernoulli(0.3), kBinary);
  const auto q = make_bsc_channel(1, 0.15);
  const auto j = causal_product(p, q);
  const double di = directed_information(p, q).value_nats;
  const auto s = condition_joint(j, KernelKind::OutputPredictor);
  const auto r = condition_joint(j, KernelKind::InputPosterior);
  CHECK(std::abs(directed_info_lower(p, q, s, r) - di) <= 1e-10);
}

TEST_CASE("product decomposition equal to the reference measure scores zero") {
  const auto p = make_iid_source(1, FinitePmf::bernoulli(0.3), kBinary);
  const auto q = make_bsc_channel(1, 0.15);
  const auto j = causal_product(p, q);
  const auto pi = pi_measure(j, p);
  const auto s = condition_joint(pi, KernelKind::OutputPredictor);
  const auto r = condition_joint(pi, KernelKind::InputPosterior);
  CHECK(std::abs(directed_info_lower(p, q, s, r)) <= 1e-12);
}

TEST_CASE("product-decomposition objective is dominated, gap is a divergence") {
  std::mt19937_64 rng(137);
  for (int t = 0; t < 30; ++t) {
    const auto inst = random_instance(rng, 2);
    const auto j = causal_product(inst.source, inst.channel);
    const double di = directed_information(inst.source, inst.channel).value_nats;
    for (int k = 0; k < 10; ++k) {
      const auto s = random_kernel_family(rng, KernelKind::OutputPredictor,
                                          inst.source.x(), inst.source.y());
      const auto r = random_kernel_family(rng, KernelKind::InputPosterior,
                                          inst.source.x(), inst.source.y());
      const double val = directed_info_lower(inst.source, inst.channel, s, r);
      CHECK(di - val >= -1e-12);
      CHECK(std::abs((di - val) - kl_joint_vs_product(j, s, r)) <= 1e-10);
    }
  }
}

TEST_CASE("product-decomposition objective hits -inf off the support") {
  const auto p = make_iid_source(0, FinitePmf::bernoulli(0.5), kBinary);
  const auto q = make_identity_channel(0, kBinary);
  const auto s = condition_joint(causal_product(p, q), KernelKind::OutputPredictor);
  // Posterior that swaps the symbols: zero mass exactly where the joint lives.
  StageKernel bad(2, 2);
  bad.at(0, 0) = 0.0;
  bad.at(0, 1) = 1.0;
  bad.at(1, 0) = 1.0;
  bad.at(1, 1) = 0.0;
  const CausalKernelFamily r(KernelKind::InputPosterior, p.x(), p.y(), {bad});
  const double val = directed_info_lower(p, q, s, r);
  CHECK(std::isinf(val));
  CHECK(val < 0);
}

TEST_CASE("posterior kernel closed form") {
  {
    const auto p = make_iid_source(0, FinitePmf::bernoulli(0.5), kBinary);
    const auto r = input_posterior_kernel(p, make_identity_channel(0, kBinary));
    CHECK(r.stage(0)(0, 0) == doctest::Approx(1.0));
    CHECK(r.stage(0)(1, 1) == doctest::Approx(1.0));
  }
  {
    const auto p = make_iid_source(0, FinitePmf::bernoulli(0.5), kBinary);
    const auto r = input_posterior_kernel(p, make_bsc_channel(0, 0.1));
    CHECK(std::abs(r.stage(0)(0, 0) - 0.9) <= 1e-15);
    CHECK(std::abs(r.stage(0)(0, 1) - 0.1) <= 1e-15);
    CHECK(std::abs(r.stage(0)(1, 1) - 0.9) <= 1e-15);
  }
}

TEST_CASE("posterior kernel matches conditional extraction on support") {
  std::mt19937_64 rng(149);
  for (int t = 0; t < 40; ++t) {
    const auto inst = random_instance(rng, 3);
    const auto direct = input_posterior_kernel(inst.source, inst.channel);
    const auto extracted = condition_joint(
        causal_product(inst.source, inst.channel), KernelKind::InputPosterior);
    CHECK(sup_diff_on_support(direct, extracted) <= 1e-12);
  }
}

TEST_CASE("posterior kernel flags rows with a vanishing normalizer") {
  const auto p = make_iid_source(0, FinitePmf::bernoulli(0.5), kBinary);
  // The channel never emits symbol 1, so conditioning on it is vacuous.
  const auto q =
      make_memoryless_channel(0, {{1.0, 0.0}, {1.0, 0.0}}, kBinary, kBinary);
  const auto r = input_posterior_kernel(p, q);
  CHECK(r.stage(0).flagged[1] == 1);
  CHECK(r.stage(0)(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("mutual equals directed for feedback-free sources") {
  {
    const auto p = make_iid_source(1, FinitePmf::bernoulli(0.3), kBinary);
    CHECK(mutual_directed_residual(p, make_bsc_channel(1, 0.2)) <= 1e-10);
  }
  {
    const auto p = make_markov_source(2, FinitePmf::bernoulli(0.5),
                                      {{0.7, 0.3}, {0.3, 0.7}}, kBinary);
    CHECK(mutual_directed_residual(p, make_bsc_channel(2, 0.1)) <= 1e-10);
  }
  {
    // Noiseless reproduction: both sides are the source entropy
    // ln 2 + 2 h(0.3).
    const auto p = make_markov_source(2, FinitePmf::bernoulli(0.5),
                                      {{0.7, 0.3}, {0.3, 0.7}}, kBinary);
    const auto q = make_identity_channel(2, kBinary);
    const double entropy = std::log(2.0) + 2.0 * binary_entropy(0.3);
    CHECK(std::abs(directed_information(p, q).value_nats - entropy) <= 1e-10);
    CHECK(mutual_directed_residual(p, q) <= 1e-10);
  }
}

TEST_CASE("mutual/directed check rejects sources with feedback") {
  std::mt19937_64 rng(151);
  const SequenceIndexer x = SequenceIndexer::constant(1, kBinary);
  const SequenceIndexer y = SequenceIndexer::constant(1, kBinary);
  const auto p = random_kernel_family(rng, KernelKind::SourceFeedback, x, y);
  const auto q = random_kernel_family(rng, KernelKind::ChannelFeedforward, x, y);
  REQUIRE_FALSE(p.is_feedback_free());
  CHECK_THROWS_AS(mutual_directed_residual(p, q), std::invalid_argument);
}

TEST_CASE("rectangular alphabets flow through the whole pipeline") {
  // Binary source, ternary reproduction.
  const Alphabet three(3, "ternary");
  const auto p = make_iid_source(1, FinitePmf::bernoulli(0.4), three);
  const auto q = make_memoryless_channel(
      1, {{0.8, 0.15, 0.05}, {0.1, 0.2, 0.7}}, kBinary, three);
  const auto rep = directed_information(p, q);
  CHECK(rep.value_nats > 0.0);
  CHECK(rep.chain_check_residual <= 1e-10);
  CHECK(mutual_directed_residual(p, q) <= 1e-10);

  const auto j = causal_product(p, q);
  const auto recovered = condition_joint(j, KernelKind::ChannelFeedforward);
  for (int i = 0; i <= 1; ++i) {
    const auto& a = q.stage(i);
    const auto& b = recovered.stage(i);
    for (std::size_t r = 0; r < a.rows; ++r) {
      if (b.flagged[r]) continue;
      for (int c = 0; c < a.cols; ++c) {
        CHECK(std::abs(a(r, c) - b(r, c)) <= 1e-12);
      }
    }
  }
  const auto s = condition_joint(j, KernelKind::OutputPredictor);
  const auto r = condition_joint(j, KernelKind::InputPosterior);
  CHECK(std::abs(directed_info_lower(p, q, s, r) - rep.value_nats) <= 1e-10);
}

TEST_CASE("feedback-free directed information never exceeds mutual information") {
  std::mt19937_64 rng(157);
  for (int t = 0; t < 40; ++t) {
    const auto inst = random_instance(rng, 3, /*feedback_free=*/true);
    const double di = directed_information(inst.source, inst.channel).value_nats;
    const double mi = mutual_information(causal_product(inst.source, inst.channel));
    CHECK(di <= mi + 1e-12);
    CHECK(mutual_directed_residual(inst.source, inst.channel) <= 1e-10);
  }
}
