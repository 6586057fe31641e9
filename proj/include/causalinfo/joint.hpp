#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "causalinfo/alphabet.hpp"
#include "causalinfo/kernels.hpp"
#include "causalinfo/pmf.hpp"

namespace causalinfo {

/// Exhaustive enumeration is the chosen realization of these measures, so
/// the full joint table must stay in memory.
inline constexpr std::size_t kMaxJointEntries = 10'000'000;

/**
 * Full joint pmf over (x^n, y^n) pairs, stored dense with index
 * ix * |Y_{0,n}| + iy. Immutable after construction; mass is validated to 1
 * within 1e-12.
 */
class JointCausalDistribution {
 public:
  JointCausalDistribution(SequenceIndexer x, SequenceIndexer y,
                          std::vector<double> joint)
      : x_(std::move(x)), y_(std::move(y)), joint_(std::move(joint)) {
    check_size(x_, y_);
    if (joint_.size() != x_.count() * y_.count()) {
      throw std::invalid_argument("JointCausalDistribution: table size " +
                                  std::to_string(joint_.size()) +
                                  " does not match " +
                                  std::to_string(x_.count() * y_.count()));
    }
    detail::validate_mass(joint_, "JointCausalDistribution");
  }

  static void check_size(const SequenceIndexer& x, const SequenceIndexer& y) {
    if (x.count() > kMaxJointEntries / y.count()) {
      throw std::length_error(
          "joint table would exceed " + std::to_string(kMaxJointEntries) +
          " entries (" + std::to_string(x.count()) + " x " +
          std::to_string(y.count()) + "); reduce horizon or alphabet sizes");
    }
  }

  const SequenceIndexer& x() const { return x_; }
  const SequenceIndexer& y() const { return y_; }
  std::size_t size_x() const { return x_.count(); }
  std::size_t size_y() const { return y_.count(); }
  double operator()(std::size_t ix, std::size_t iy) const {
    return joint_[ix * y_.count() + iy];
  }
  const std::vector<double>& table() const { return joint_; }

 private:
  SequenceIndexer x_;
  SequenceIndexer y_;
  std::vector<double> joint_;
};

/**
 * Joint pmf of a source/channel pair:
 *   joint(x^n, y^n) = prod_i p_i(x_i | x^{i-1}, y^{i-1}) q_i(y_i | y^{i-1}, x^i).
 */
inline JointCausalDistribution causal_product(const CausalKernelFamily& p,
                                              const CausalKernelFamily& q) {
  if (p.kind() != KernelKind::SourceFeedback ||
      q.kind() != KernelKind::ChannelFeedforward) {
    throw std::invalid_argument(
        "causal_product: expected (SourceFeedback, ChannelFeedforward), got (" +
        std::string(to_string(p.kind())) + ", " + to_string(q.kind()) + ")");
  }
  if (!(p.x() == q.x()) || !(p.y() == q.y())) {
    throw std::invalid_argument(
        "causal_product: source and channel disagree on alphabets or horizon");
  }
  JointCausalDistribution::check_size(p.x(), p.y());
  const std::size_t nx = p.x().count();
  const std::size_t ny = p.y().count();
  const int n = p.horizon();
  std::vector<double> table(nx * ny);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      double w = 1.0;
      for (int i = 0; i <= n && w > 0.0; ++i) {
        w *= p.stage_prob(i, ix, iy) * q.stage_prob(i, ix, iy);
      }
      table[ix * ny + iy] = w;
    }
  }
  return JointCausalDistribution(p.x(), p.y(), std::move(table));
}

/// Marginal pmfs of the two sequence coordinates.
inline std::pair<FinitePmf, FinitePmf> marginals(
    const JointCausalDistribution& j) {
  const std::size_t nx = j.size_x();
  const std::size_t ny = j.size_y();
  std::vector<double> mu(nx, 0.0);
  std::vector<double> nu(ny, 0.0);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const double w = j(ix, iy);
      mu[ix] += w;
      nu[iy] += w;
    }
  }
  return {FinitePmf(Alphabet(static_cast<int>(nx), "x_sequences"), std::move(mu)),
          FinitePmf(Alphabet(static_cast<int>(ny), "y_sequences"), std::move(nu))};
}

/**
 * The reference measure pairing the source's causal factor with the output
 * marginal:
 *   Pi(x^n, y^n) = [prod_i p_i(x_i | x^{i-1}, y^{i-1})] * nu(y^n),
 * where nu is the y-marginal of j. Directed information is D(j || Pi).
 */
inline JointCausalDistribution pi_measure(const JointCausalDistribution& j,
                                          const CausalKernelFamily& p) {
  if (p.kind() != KernelKind::SourceFeedback) {
    throw std::invalid_argument("pi_measure: p must be a SourceFeedback family");
  }
  if (!(p.x() == j.x()) || !(p.y() == j.y())) {
    throw std::invalid_argument("pi_measure: joint and source shapes differ");
  }
  const auto [mu, nu] = marginals(j);
  const std::size_t nx = j.size_x();
  const std::size_t ny = j.size_y();
  const int n = p.horizon();
  std::vector<double> table(nx * ny);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      double w = nu[static_cast<int>(iy)];
      for (int i = 0; i <= n && w > 0.0; ++i) {
        w *= p.stage_prob(i, ix, iy);
      }
      table[ix * ny + iy] = w;
    }
  }
  return JointCausalDistribution(j.x(), j.y(), std::move(table));
}

/**
 * Exact per-stage conditionals of a joint under the requested conditioning
 * pattern. Rows whose conditioning event has zero probability are filled
 * uniform and flagged.
 */
inline CausalKernelFamily condition_joint(const JointCausalDistribution& j,
                                          KernelKind kind) {
  const std::size_t nx = j.size_x();
  const std::size_t ny = j.size_y();
  const int n = j.x().horizon();

  // Accumulate raw conditional numerators stage by stage, then normalize.
  std::vector<StageKernel> stages;
  stages.reserve(static_cast<std::size_t>(n) + 1);
  // A scratch family provides the row mapping; tables start as all-zero.
  for (int i = 0; i <= n; ++i) {
    const auto shape = detail::cond_shape(kind, i);
    const std::size_t rows =
        j.x().prefix_count(shape.x_len) * j.y().prefix_count(shape.y_len);
    const int cols = detail::emits_x(kind) ? j.x().stage(i).size()
                                           : j.y().stage(i).size();
    stages.emplace_back(rows, cols);
  }

  for (int i = 0; i <= n; ++i) {
    const auto shape = detail::cond_shape(kind, i);
    const std::size_t ypc = j.y().prefix_count(shape.y_len);
    const std::size_t xpc = j.x().prefix_count(shape.x_len);
    auto& st = stages[static_cast<std::size_t>(i)];
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t xp = j.x().prefix_index(ix, shape.x_len);
      const int xsym = j.x().symbol_at(ix, i);
      for (std::size_t iy = 0; iy < ny; ++iy) {
        const double w = j(ix, iy);
        if (w == 0.0) continue;
        const std::size_t yp = j.y().prefix_index(iy, shape.y_len);
        const std::size_t row = shape.x_major ? xp * ypc + yp : yp * xpc + xp;
        const int sym = detail::emits_x(kind) ? xsym : j.y().symbol_at(iy, i);
        st.at(row, sym) += w;
      }
    }
    for (std::size_t r = 0; r < st.rows; ++r) {
      auto row = st.row(r);
      double sum = 0.0;
      for (double v : row) sum += v;
      if (sum > 0.0) {
        for (double& v : row) v /= sum;
      } else {
        for (double& v : row) v = 1.0 / st.cols;
        st.flagged[r] = 1;
      }
    }
  }
  return CausalKernelFamily(kind, j.x(), j.y(), std::move(stages));
}

}  // namespace causalinfo
