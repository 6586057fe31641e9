#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "causalinfo/divergence.hpp"
#include "causalinfo/joint.hpp"
#include "causalinfo/kernels.hpp"

namespace causalinfo {

/**
 * I(X^n -> Y^n) in nats, with its decomposition into per-stage conditional
 * mutual informations I(X^i; Y_i | Y^{i-1}). The two are computed by
 * independent code paths (kernel log-ratio vs. conditional pmfs of the
 * joint); chain_check_residual is their absolute difference.
 */
struct DirectedInfoReport {
  double value_nats = 0.0;
  std::vector<double> per_stage;
  double chain_check_residual = 0.0;
};

namespace detail {

/// I(X^i; Y_i | Y^{i-1}) from the marginal of the joint on prefixes of
/// length i+1, using only conditionals derived by summation.
inline double stage_conditional_mi(const JointCausalDistribution& j, int i) {
  const std::size_t xpc = j.x().prefix_count(i + 1);
  const std::size_t ypc = j.y().prefix_count(i + 1);
  const std::size_t ypre_count = j.y().prefix_count(i);
  const auto cy = static_cast<std::size_t>(j.y().stage(i).size());

  std::vector<double> t(xpc * ypc, 0.0);
  for (std::size_t ix = 0; ix < j.size_x(); ++ix) {
    const std::size_t xp = j.x().prefix_index(ix, i + 1);
    for (std::size_t iy = 0; iy < j.size_y(); ++iy) {
      const double w = j(ix, iy);
      if (w == 0.0) continue;
      t[xp * ypc + j.y().prefix_index(iy, i + 1)] += w;
    }
  }

  std::vector<double> a(xpc * ypre_count, 0.0);  // P(x^i, y^{i-1})
  std::vector<double> b(ypc, 0.0);               // P(y^i)
  std::vector<double> m(ypre_count, 0.0);        // P(y^{i-1})
  for (std::size_t xp = 0; xp < xpc; ++xp) {
    for (std::size_t yp = 0; yp < ypc; ++yp) {
      const double w = t[xp * ypc + yp];
      if (w == 0.0) continue;
      a[xp * ypre_count + yp / cy] += w;
      b[yp] += w;
    }
  }
  for (std::size_t xp = 0; xp < xpc; ++xp) {
    for (std::size_t yp = 0; yp < ypre_count; ++yp) {
      m[yp] += a[xp * ypre_count + yp];
    }
  }

  double acc = 0.0;
  for (std::size_t xp = 0; xp < xpc; ++xp) {
    for (std::size_t yp = 0; yp < ypc; ++yp) {
      const double w = t[xp * ypc + yp];
      if (w == 0.0) continue;
      const std::size_t ypre = yp / cy;
      acc += w * std::log(w * m[ypre] / (a[xp * ypre_count + ypre] * b[yp]));
    }
  }
  return acc;
}

/// log of the channel's causal factor prod_i q_i(y_i | y^{i-1}, x^i).
inline double log_channel_factor(const CausalKernelFamily& q, std::size_t ix,
                                 std::size_t iy) {
  double acc = 0.0;
  for (int i = 0; i <= q.horizon(); ++i) {
    acc += std::log(q.stage_prob(i, ix, iy));
  }
  return acc;
}

}  // namespace detail

/// Directed information via the relative-entropy form
///   sum_{x^n,y^n} joint * ln( prod_i q_i / nu(y^n) ).
inline DirectedInfoReport directed_information(const CausalKernelFamily& p,
                                               const CausalKernelFamily& q) {
  const JointCausalDistribution j = causal_product(p, q);
  const auto [mu, nu] = marginals(j);

  double value = 0.0;
  for (std::size_t ix = 0; ix < j.size_x(); ++ix) {
    for (std::size_t iy = 0; iy < j.size_y(); ++iy) {
      const double w = j(ix, iy);
      if (w == 0.0) continue;
      value += w * (detail::log_channel_factor(q, ix, iy) -
                    std::log(nu[static_cast<int>(iy)]));
    }
  }

  DirectedInfoReport report;
  report.value_nats = value;
  report.per_stage.reserve(static_cast<std::size_t>(j.x().num_stages()));
  double chain_sum = 0.0;
  for (int i = 0; i <= j.x().horizon(); ++i) {
    const double term = detail::stage_conditional_mi(j, i);
    report.per_stage.push_back(term);
    chain_sum += term;
  }
  report.chain_check_residual = std::abs(value - chain_sum);
  return report;
}

/// I(X^n; Y^n) = D(joint || mu x nu) in nats.
inline double mutual_information(const JointCausalDistribution& j) {
  const auto [mu, nu] = marginals(j);
  double acc = 0.0;
  for (std::size_t ix = 0; ix < j.size_x(); ++ix) {
    for (std::size_t iy = 0; iy < j.size_y(); ++iy) {
      const double w = j(ix, iy);
      if (w == 0.0) continue;
      acc += w * std::log(w / (mu[static_cast<int>(ix)] *
                               nu[static_cast<int>(iy)]));
    }
  }
  if (acc < 0.0 && acc > -1e-12) acc = 0.0;
  return acc;
}

/**
 * Relative-entropy objective against a trial output law:
 *   sum joint * ln( prod_i q_i / nu_bar(y^n) ).
 * Upper-bounds directed information for every nu_bar, with equality at the
 * true y-marginal; the gap is D(nu || nu_bar). Returns +inf when nu_bar
 * vanishes somewhere the true marginal does not.
 */
inline double directed_info_upper(const CausalKernelFamily& p,
                                  const CausalKernelFamily& q,
                                  const FinitePmf& nu_bar) {
  const JointCausalDistribution j = causal_product(p, q);
  if (static_cast<std::size_t>(nu_bar.size()) != j.size_y()) {
    throw std::invalid_argument(
        "directed_info_upper: output law size does not match y-sequence count");
  }
  double acc = 0.0;
  for (std::size_t ix = 0; ix < j.size_x(); ++ix) {
    for (std::size_t iy = 0; iy < j.size_y(); ++iy) {
      const double w = j(ix, iy);
      if (w == 0.0) continue;
      const double nb = nu_bar[static_cast<int>(iy)];
      if (nb <= 0.0) return std::numeric_limits<double>::infinity();
      acc += w * (detail::log_channel_factor(q, ix, iy) - std::log(nb));
    }
  }
  return acc;
}

/**
 * Relative-entropy objective for a product decomposition (s, r):
 *   sum joint * ln( prod_i s_i r_i / Pi ),
 * with s an OutputPredictor and r an InputPosterior family. Lower-bounds
 * directed information, with equality when (s, r) are the exact
 * conditionals of the joint; the gap is D(joint || s x r). Returns -inf
 * when the product vanishes on the joint's support.
 */
inline double directed_info_lower(const CausalKernelFamily& p,
                                  const CausalKernelFamily& q,
                                  const CausalKernelFamily& s,
                                  const CausalKernelFamily& r) {
  if (s.kind() != KernelKind::OutputPredictor ||
      r.kind() != KernelKind::InputPosterior) {
    throw std::invalid_argument(
        "directed_info_lower: expected (OutputPredictor, InputPosterior)");
  }
  if (!(s.x() == p.x()) || !(s.y() == p.y()) || !(r.x() == p.x()) ||
      !(r.y() == p.y())) {
    throw std::invalid_argument("directed_info_lower: family shapes differ");
  }
  const JointCausalDistribution j = causal_product(p, q);
  const JointCausalDistribution pi = pi_measure(j, p);
  const int n = j.x().horizon();
  double acc = 0.0;
  for (std::size_t ix = 0; ix < j.size_x(); ++ix) {
    for (std::size_t iy = 0; iy < j.size_y(); ++iy) {
      const double w = j(ix, iy);
      if (w == 0.0) continue;
      double prod = 1.0;
      for (int i = 0; i <= n && prod > 0.0; ++i) {
        prod *= s.stage_prob(i, ix, iy) * r.stage_prob(i, ix, iy);
      }
      if (prod <= 0.0) return -std::numeric_limits<double>::infinity();
      acc += w * (std::log(prod) - std::log(pi(ix, iy)));
    }
  }
  return acc;
}

/**
 * Closed-form input posterior of the pair (p, q):
 *   r_i(x_i | x^{i-1}, y^i) = p_i(x_i|x^{i-1},y^{i-1}) q_i(y_i|y^{i-1},x^i)
 *                             / sum_{x_i} (same),
 * the achiever of the product-decomposition supremum. Agrees with
 * condition_joint(causal_product(p, q), InputPosterior) on every
 * positive-probability row; rows with a vanishing normalizer are filled
 * uniform and flagged.
 */
inline CausalKernelFamily input_posterior_kernel(const CausalKernelFamily& p,
                                                 const CausalKernelFamily& q) {
  if (p.kind() != KernelKind::SourceFeedback ||
      q.kind() != KernelKind::ChannelFeedforward) {
    throw std::invalid_argument(
        "input_posterior_kernel: expected (SourceFeedback, ChannelFeedforward)");
  }
  if (!(p.x() == q.x()) || !(p.y() == q.y())) {
    throw std::invalid_argument("input_posterior_kernel: family shapes differ");
  }
  const auto& x = p.x();
  const auto& y = p.y();
  const int n = x.horizon();
  std::vector<StageKernel> stages;
  for (int i = 0; i <= n; ++i) {
    const std::size_t xpc = x.prefix_count(i);       // x^{i-1} tuples
    const std::size_t yfc = y.prefix_count(i + 1);   // y^i tuples
    const std::size_t ypc = y.prefix_count(i);
    const auto cx = static_cast<std::size_t>(x.stage(i).size());
    const auto cy = static_cast<std::size_t>(y.stage(i).size());
    StageKernel st(xpc * yfc, static_cast<int>(cx));
    for (std::size_t xp = 0; xp < xpc; ++xp) {
      for (std::size_t yf = 0; yf < yfc; ++yf) {
        const std::size_t ypre = yf / cy;
        const int ysym = static_cast<int>(yf % cy);
        const std::size_t prow = xp * ypc + ypre;
        const std::size_t row = xp * yfc + yf;
        double z = 0.0;
        for (std::size_t xs = 0; xs < cx; ++xs) {
          const std::size_t xfull = xp * cx + xs;
          const std::size_t qrow = ypre * x.prefix_count(i + 1) + xfull;
          const double v = p.stage(i)(prow, static_cast<int>(xs)) *
                           q.stage(i)(qrow, ysym);
          st.at(row, static_cast<int>(xs)) = v;
          z += v;
        }
        if (z > 0.0) {
          for (std::size_t xs = 0; xs < cx; ++xs) {
            st.at(row, static_cast<int>(xs)) /= z;
          }
        } else {
          for (std::size_t xs = 0; xs < cx; ++xs) {
            st.at(row, static_cast<int>(xs)) = 1.0 / static_cast<double>(cx);
          }
          st.flagged[row] = 1;
        }
      }
    }
    stages.push_back(std::move(st));
  }
  return CausalKernelFamily(KernelKind::InputPosterior, x, y,
                            std::move(stages));
}

/**
 * |I(X^n;Y^n) - I(X^n->Y^n)| for a source without feedback. The two agree
 * for every causal channel; the residual is a consistency check, expected
 * at round-off scale. Throws if p actually depends on past outputs.
 */
inline double mutual_directed_residual(const CausalKernelFamily& p,
                                       const CausalKernelFamily& q) {
  if (!p.is_feedback_free()) {
    throw std::invalid_argument(
        "mutual_directed_residual: source has feedback (depends on y)");
  }
  const JointCausalDistribution j = causal_product(p, q);
  const double mi = mutual_information(j);
  const double di = directed_information(p, q).value_nats;
  return std::abs(mi - di);
}

}  // namespace causalinfo
