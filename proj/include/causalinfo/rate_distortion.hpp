#pragma once

#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "causalinfo/directed_info.hpp"
#include "causalinfo/joint.hpp"
#include "causalinfo/kernels.hpp"

namespace causalinfo {

inline constexpr double kLn2 = 0.6931471805599453094;

enum class DistortionMode { SingleLetter };

/**
 * Additive single-letter distortion: d_{0,n}(x^n, y^n) = sum_i rho(x_i, y_i)
 * with a fixed nonnegative letter matrix rho. The general shifted form that
 * reads future symbols has no causal semantics here and is not supported.
 */
class DistortionSpec {
 public:
  DistortionSpec(int horizon, const std::vector<std::vector<double>>& rho)
      : horizon_(horizon),
        x_size_(static_cast<int>(rho.size())),
        y_size_(rho.empty() ? 0 : static_cast<int>(rho.front().size())) {
    if (horizon_ < 0) {
      throw std::invalid_argument("DistortionSpec: horizon must be >= 0");
    }
    if (x_size_ < 1 || y_size_ < 1) {
      throw std::invalid_argument("DistortionSpec: empty letter matrix");
    }
    rho_.reserve(static_cast<std::size_t>(x_size_ * y_size_));
    for (const auto& row : rho) {
      if (static_cast<int>(row.size()) != y_size_) {
        throw std::invalid_argument("DistortionSpec: ragged letter matrix");
      }
      for (double v : row) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw std::invalid_argument(
              "DistortionSpec: entries must be finite and >= 0");
        }
        rho_.push_back(v);
      }
    }
  }

  int horizon() const { return horizon_; }
  int x_size() const { return x_size_; }
  int y_size() const { return y_size_; }
  DistortionMode mode() const { return DistortionMode::SingleLetter; }

  double letter(int x, int y) const {
    return rho_[static_cast<std::size_t>(x * y_size_ + y)];
  }

  double max_letter() const {
    double m = 0.0;
    for (double v : rho_) m = std::max(m, v);
    return m;
  }

  double sequence(const SequenceIndexer& x, const SequenceIndexer& y,
                  std::size_t ix, std::size_t iy) const {
    double acc = 0.0;
    for (int i = 0; i <= horizon_; ++i) {
      acc += letter(x.symbol_at(ix, i), y.symbol_at(iy, i));
    }
    return acc;
  }

  void check_compatible(const SequenceIndexer& x,
                        const SequenceIndexer& y) const {
    if (x.horizon() != horizon_ || y.horizon() != horizon_) {
      throw std::invalid_argument("DistortionSpec: horizon mismatch");
    }
    for (int i = 0; i <= horizon_; ++i) {
      if (x.stage(i).size() != x_size_ || y.stage(i).size() != y_size_) {
        throw std::invalid_argument(
            "DistortionSpec: single-letter matrix requires constant stage "
            "alphabets matching its dimensions");
      }
    }
  }

 private:
  int horizon_;
  int x_size_;
  int y_size_;
  std::vector<double> rho_;  // x_size * y_size, row-major
};

/// Lagrange multiplier of the distortion constraint, in nats per distortion
/// unit. Nonpositive by definition of the parametrized curve.
struct Slope {
  double value;
  explicit Slope(double s) : value(s) {
    if (!(s <= 0.0)) {
      throw std::invalid_argument("Slope: s must be <= 0, got " +
                                  std::to_string(s));
    }
  }
};

enum class BaaInit { Uniform, SeededRandomPositive };

struct BaaConfig {
  double tol_marginal = 1e-10;     // sup-norm change of the output pmf
  double tol_fixed_point = 1e-9;   // sup-norm self-consistency of kernels
  int max_iter = 10000;
  BaaInit init = BaaInit::Uniform;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(tol_marginal > 0.0) || !(tol_fixed_point > 0.0)) {
      throw std::invalid_argument("BaaConfig: tolerances must be > 0");
    }
    if (max_iter < 1) {
      throw std::invalid_argument("BaaConfig: max_iter must be >= 1");
    }
  }
};

/**
 * Output-marginal state of the alternating minimization: a pmf over y^n
 * together with its per-stage kernels P(y_i | y^{i-1}), re-derived by exact
 * conditioning whenever the pmf changes. Zero-probability prefixes get
 * uniform (flagged) kernel rows; they never occur for positive pmfs.
 */
class MarginalState {
 public:
  MarginalState(SequenceIndexer y, std::vector<double> pmf)
      : y_(std::move(y)), pmf_(std::move(pmf)) {
    if (pmf_.size() != y_.count()) {
      throw std::invalid_argument("MarginalState: pmf length mismatch");
    }
    detail::validate_mass(pmf_, "MarginalState");
    derive_kernels();
  }

  static MarginalState uniform(const SequenceIndexer& y) {
    return MarginalState(
        y, std::vector<double>(y.count(), 1.0 / static_cast<double>(y.count())));
  }

  /// Random strictly positive pmf; raw entries are uniform on [0.05, 1]
  /// before normalization.
  static MarginalState seeded_random_positive(const SequenceIndexer& y,
                                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> raw(y.count());
    double sum = 0.0;
    for (double& v : raw) {
      v = u(rng);
      sum += v;
    }
    for (double& v : raw) v /= sum;
    return MarginalState(y, std::move(raw));
  }

  const SequenceIndexer& y() const { return y_; }
  const std::vector<double>& pmf() const { return pmf_; }
  int num_stages() const { return y_.num_stages(); }
  const StageKernel& stage(int i) const {
    return stages_[static_cast<std::size_t>(i)];
  }
  double kernel(int i, std::size_t y_prefix, int sym) const {
    return stages_[static_cast<std::size_t>(i)](y_prefix, sym);
  }

  bool strictly_positive() const {
    for (double v : pmf_) {
      if (!(v > 0.0)) return false;
    }
    return true;
  }

  double sup_distance_pmf(const MarginalState& other) const {
    double m = 0.0;
    for (std::size_t i = 0; i < pmf_.size(); ++i) {
      m = std::max(m, std::abs(pmf_[i] - other.pmf_[i]));
    }
    return m;
  }

  /// Sup-norm over stage kernel entries, skipping rows either side filled
  /// in for a zero-probability prefix.
  double sup_distance_kernels(const MarginalState& other) const {
    double m = 0.0;
    for (int i = 0; i < num_stages(); ++i) {
      const auto& a = stage(i);
      const auto& b = other.stage(i);
      for (std::size_t r = 0; r < a.rows; ++r) {
        if (a.flagged[r] || b.flagged[r]) continue;
        for (int c = 0; c < a.cols; ++c) {
          m = std::max(m, std::abs(a(r, c) - b(r, c)));
        }
      }
    }
    return m;
  }

 private:
  void derive_kernels() {
    const int n = y_.horizon();
    stages_.clear();
    // level[u] holds the prefix marginal of length i+1 while walking down.
    std::vector<double> level = pmf_;
    std::vector<std::vector<double>> prefix(static_cast<std::size_t>(n) + 2);
    prefix[static_cast<std::size_t>(n) + 1] = level;
    for (int i = n; i >= 0; --i) {
      const std::size_t up = y_.prefix_count(i);
      const auto c = static_cast<std::size_t>(y_.stage(i).size());
      std::vector<double> coarser(up, 0.0);
      for (std::size_t u = 0; u < up; ++u) {
        for (std::size_t s = 0; s < c; ++s) {
          coarser[u] += level[u * c + s];
        }
      }
      prefix[static_cast<std::size_t>(i)] = coarser;
      level = prefix[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i <= n; ++i) {
      const std::size_t rows = y_.prefix_count(i);
      const int cols = y_.stage(i).size();
      StageKernel st(rows, cols);
      const auto& num = prefix[static_cast<std::size_t>(i) + 1];
      const auto& den = prefix[static_cast<std::size_t>(i)];
      for (std::size_t r = 0; r < rows; ++r) {
        if (den[r] > 0.0) {
          for (int c = 0; c < cols; ++c) {
            st.at(r, c) = num[r * static_cast<std::size_t>(cols) +
                              static_cast<std::size_t>(c)] /
                          den[r];
          }
        } else {
          for (int c = 0; c < cols; ++c) st.at(r, c) = 1.0 / cols;
          st.flagged[r] = 1;
        }
      }
      stages_.push_back(std::move(st));
    }
  }

  SequenceIndexer y_;
  std::vector<double> pmf_;
  std::vector<StageKernel> stages_;
};

struct BaaIterate {
  int iteration;
  double objective_nats;   // I(X^n -> Y^n) - s (n+1) D, total over the horizon
  double distortion;       // per-letter expected distortion
  double marginal_delta;   // sup-norm pmf change from the previous iterate
};

struct BaaTrace {
  std::vector<BaaIterate> iterates;
  bool converged;
  double final_residual;
  CausalKernelFamily final_channel;
  MarginalState final_marginals;

  int iterations() const { return iterates.empty() ? 0 : iterates.back().iteration; }
  double final_distortion() const {
    return iterates.empty() ? 0.0 : iterates.back().distortion;
  }
  double final_objective() const {
    return iterates.empty() ? 0.0 : iterates.back().objective_nats;
  }
};

/// One point of the parametrized curve, in per-letter units.
struct RDPoint {
  double s;
  double distortion;
  double rate_nats_per_letter;
  double rate_bits_per_letter;
  int iterations;
  double residual;   // per-letter gap between the two rate formulas
  bool converged;
};

namespace detail {

inline void require_feedback_free_source(const CausalKernelFamily& source,
                                         const char* what) {
  if (source.kind() != KernelKind::SourceFeedback) {
    throw std::invalid_argument(std::string(what) +
                                ": source must be a SourceFeedback family");
  }
  if (!source.is_feedback_free()) {
    throw std::invalid_argument(
        std::string(what) + ": source must not depend on past outputs");
  }
}

/// P_X(x^n) for a feedback-free source, indexed by flat x-sequence.
inline std::vector<double> source_sequence_pmf(const CausalKernelFamily& p) {
  const std::size_t nx = p.x().count();
  std::vector<double> out(nx);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    double w = 1.0;
    for (int i = 0; i <= p.horizon() && w > 0.0; ++i) {
      w *= p.stage_prob(i, ix, /*iy=*/0);
    }
    out[ix] = w;
  }
  return out;
}

/// Directed information of a channel against a precomputed joint.
inline double directed_info_value(const CausalKernelFamily& q,
                                  const JointCausalDistribution& j) {
  const auto [mu, nu] = marginals(j);
  double acc = 0.0;
  for (std::size_t ix = 0; ix < j.size_x(); ++ix) {
    for (std::size_t iy = 0; iy < j.size_y(); ++iy) {
      const double w = j(ix, iy);
      if (w == 0.0) continue;
      acc += w * (log_channel_factor(q, ix, iy) -
                  std::log(nu[static_cast<int>(iy)]));
    }
  }
  return acc;
}

inline double per_letter_distortion(const JointCausalDistribution& j,
                                    const DistortionSpec& d) {
  double acc = 0.0;
  for (std::size_t ix = 0; ix < j.size_x(); ++ix) {
    for (std::size_t iy = 0; iy < j.size_y(); ++iy) {
      const double w = j(ix, iy);
      if (w == 0.0) continue;
      acc += w * d.sequence(j.x(), j.y(), ix, iy);
    }
  }
  return acc / (d.horizon() + 1);
}

}  // namespace detail

/// Per-letter expected distortion of a source/channel pair.
inline double expected_distortion(const CausalKernelFamily& source,
                                  const CausalKernelFamily& channel,
                                  const DistortionSpec& d) {
  detail::require_feedback_free_source(source, "expected_distortion");
  d.check_compatible(source.x(), source.y());
  const JointCausalDistribution j = causal_product(source, channel);
  return detail::per_letter_distortion(j, d);
}

/**
 * The exponentially tilted channel that minimizes the Lagrangian for a fixed
 * output-marginal state:
 *   P(y_i | y^{i-1}, x_i) = e^{s rho(x_i, y_i)} Pbar(y_i|y^{i-1}) / Z_i(x_i, y^{i-1}).
 * With single-letter distortion the tilt reads only the current source
 * symbol, so stage tables repeat across older x coordinates by construction.
 */
inline CausalKernelFamily optimal_channel_for_marginals(
    const CausalKernelFamily& source, const MarginalState& ybar,
    const DistortionSpec& d, Slope s) {
  detail::require_feedback_free_source(source, "optimal_channel_for_marginals");
  d.check_compatible(source.x(), source.y());
  if (!(source.y() == ybar.y())) {
    throw std::invalid_argument(
        "optimal_channel_for_marginals: marginal state shape mismatch");
  }
  for (int i = 0; i <= source.horizon(); ++i) {
    const auto& st = ybar.stage(i);
    for (double v : st.p) {
      if (!(v > 0.0)) {
        throw std::invalid_argument(
            "optimal_channel_for_marginals: marginal kernels must be strictly "
            "positive");
      }
    }
  }

  const auto& x = source.x();
  const auto& y = source.y();
  const int n = x.horizon();
  std::vector<StageKernel> stages;
  for (int i = 0; i <= n; ++i) {
    const std::size_t nyp = y.prefix_count(i);
    const std::size_t nxi = x.prefix_count(i + 1);
    const auto cx = static_cast<std::size_t>(x.stage(i).size());
    const int cy = y.stage(i).size();
    StageKernel st(nyp * nxi, cy);
    for (std::size_t yp = 0; yp < nyp; ++yp) {
      for (std::size_t xs = 0; xs < cx; ++xs) {
        double z = 0.0;
        std::vector<double> row(static_cast<std::size_t>(cy));
        for (int c = 0; c < cy; ++c) {
          row[static_cast<std::size_t>(c)] =
              std::exp(s.value * d.letter(static_cast<int>(xs), c)) *
              ybar.kernel(i, yp, c);
          z += row[static_cast<std::size_t>(c)];
        }
        if (!(z > 0.0)) {
          throw std::logic_error(
              "optimal_channel_for_marginals: vanishing normalizer");
        }
        for (std::size_t xp = 0; xp < nxi; ++xp) {
          if (xp % cx != xs) continue;
          for (int c = 0; c < cy; ++c) {
            st.at(yp * nxi + xp, c) = row[static_cast<std::size_t>(c)] / z;
          }
        }
      }
    }
    stages.push_back(std::move(st));
  }
  return CausalKernelFamily(KernelKind::ChannelFeedforward, x, y,
                            std::move(stages));
}

/**
 * One alternating-minimization step on the output marginal:
 *   Pbar'(y^n) = Pbar(y^n) sum_{x^n} P_X(x^n)
 *                prod_i e^{s rho(x_i,y_i)} / Z_i(x_i, y^{i-1}),
 * renormalized to unit mass (the normalizer is exactly 1 at a fixed point).
 * Stage kernels of the result are re-derived by exact conditioning.
 */
inline MarginalState baa_update(const CausalKernelFamily& source,
                                const MarginalState& state,
                                const DistortionSpec& d, Slope s) {
  detail::require_feedback_free_source(source, "baa_update");
  d.check_compatible(source.x(), source.y());
  if (!state.strictly_positive()) {
    throw std::invalid_argument("baa_update: marginal state must be positive");
  }

  const auto& x = source.x();
  const auto& y = source.y();
  const int n = x.horizon();
  const std::size_t nx = x.count();
  const std::size_t ny = y.count();

  const std::vector<double> px = detail::source_sequence_pmf(source);

  // tilt(x, y) = e^{s rho(x, y)} for single letters.
  const auto cx = static_cast<std::size_t>(d.x_size());
  const auto cy = static_cast<std::size_t>(d.y_size());
  std::vector<double> tilt(cx * cy);
  for (std::size_t a = 0; a < cx; ++a) {
    for (std::size_t b = 0; b < cy; ++b) {
      tilt[a * cy + b] = std::exp(
          s.value * d.letter(static_cast<int>(a), static_cast<int>(b)));
    }
  }

  // z[i][yp * cx + a] = sum_b tilt(a, b) Pbar(b | y^{i-1} = yp)
  std::vector<std::vector<double>> z(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    const std::size_t nyp = y.prefix_count(i);
    auto& zi = z[static_cast<std::size_t>(i)];
    zi.assign(nyp * cx, 0.0);
    for (std::size_t yp = 0; yp < nyp; ++yp) {
      for (std::size_t a = 0; a < cx; ++a) {
        double acc = 0.0;
        for (std::size_t b = 0; b < cy; ++b) {
          acc += tilt[a * cy + b] * state.kernel(i, yp, static_cast<int>(b));
        }
        zi[yp * cx + a] = acc;
      }
    }
  }

  std::vector<double> next(ny, 0.0);
  std::vector<int> ysym(static_cast<std::size_t>(n) + 1);
  std::vector<std::size_t> ypre(static_cast<std::size_t>(n) + 1);
  double total = 0.0;
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (int i = 0; i <= n; ++i) {
      ysym[static_cast<std::size_t>(i)] = y.symbol_at(iy, i);
      ypre[static_cast<std::size_t>(i)] = y.prefix_index(iy, i);
    }
    double sum_x = 0.0;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      double w = px[ix];
      if (w == 0.0) continue;
      for (int i = 0; i <= n; ++i) {
        const auto a = static_cast<std::size_t>(x.symbol_at(ix, i));
        const auto ui = static_cast<std::size_t>(i);
        w *= tilt[a * cy + static_cast<std::size_t>(ysym[ui])] /
             z[ui][ypre[ui] * cx + a];
      }
      sum_x += w;
    }
    next[iy] = state.pmf()[iy] * sum_x;
    total += next[iy];
  }
  for (double& v : next) v /= total;
  return MarginalState(y, std::move(next));
}

/**
 * Self-consistency of a (channel, marginal) pair: sup-norm distance between
 * the given marginal kernels and the kernels of the output marginal actually
 * induced by source and channel. Zero exactly at a fixed point of the
 * alternating minimization.
 */
inline double fixed_point_residual(const CausalKernelFamily& source,
                                   const CausalKernelFamily& channel,
                                   const MarginalState& ybar,
                                   const DistortionSpec& d,
                                   [[maybe_unused]] Slope s) {
  detail::require_feedback_free_source(source, "fixed_point_residual");
  d.check_compatible(source.x(), source.y());
  const JointCausalDistribution j = causal_product(source, channel);
  const auto [mu, nu] = marginals(j);
  const MarginalState induced(source.y(), nu.mass());
  return ybar.sup_distance_kernels(induced);
}

/**
 * Alternating minimization at slope s: alternately tilt the channel against
 * the current output marginal and replace the marginal by the induced one,
 * until both the marginal pmf and the kernel self-consistency settle below
 * their tolerances. Non-convergence within max_iter is reported in the
 * trace, not thrown.
 */
inline BaaTrace baa_run(const CausalKernelFamily& source,
                        const DistortionSpec& d, Slope s,
                        const BaaConfig& cfg,
                        const MarginalState* warm_start = nullptr) {
  detail::require_feedback_free_source(source, "baa_run");
  d.check_compatible(source.x(), source.y());
  cfg.validate();

  MarginalState state =
      warm_start ? *warm_start
                 : (cfg.init == BaaInit::Uniform
                        ? MarginalState::uniform(source.y())
                        : MarginalState::seeded_random_positive(source.y(),
                                                                cfg.seed));
  if (!state.strictly_positive()) {
    throw std::invalid_argument("baa_run: initial marginal must be positive");
  }

  const int letters = d.horizon() + 1;
  const auto evaluate = [&](const MarginalState& m)
      -> std::tuple<CausalKernelFamily, double, double, double> {
    CausalKernelFamily channel = optimal_channel_for_marginals(source, m, d, s);
    const JointCausalDistribution j = causal_product(source, channel);
    const double info = detail::directed_info_value(channel, j);
    const double dist = detail::per_letter_distortion(j, d);
    const auto [mu, nu] = marginals(j);
    const MarginalState induced(source.y(), nu.mass());
    const double residual = m.sup_distance_kernels(induced);
    return {std::move(channel), info - s.value * letters * dist, dist, residual};
  };

  std::vector<BaaIterate> iterates;
  auto [channel, objective, dist, residual] = evaluate(state);
  iterates.push_back(
      {0, objective, dist, std::numeric_limits<double>::infinity()});

  bool converged = false;
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    MarginalState next = baa_update(source, state, d, s);
    const double delta = state.sup_distance_pmf(next);
    state = std::move(next);
    auto [ch, obj, di, res] = evaluate(state);
    channel = std::move(ch);
    objective = obj;
    dist = di;
    residual = res;
    iterates.push_back({iter, objective, dist, delta});
    if (delta < cfg.tol_marginal && residual < cfg.tol_fixed_point) {
      converged = true;
      break;
    }
  }

  return BaaTrace{std::move(iterates), converged, residual,
                  std::move(channel), std::move(state)};
}

/**
 * Rate at the converged point via the closed-form expression
 *   R = s D (n+1) - sum_i E[ ln Z_i(X_i, Y^{i-1}) ],
 * cross-checked against the directed information of the final pair. The two
 * routes must agree once the marginal is a fixed point; a converged trace
 * whose per-letter gap exceeds 10x tol is an inconsistency error.
 */
inline RDPoint na_rdf_value(const CausalKernelFamily& source,
                            const DistortionSpec& d, Slope s,
                            const BaaTrace& trace, double tol = 1e-8) {
  detail::require_feedback_free_source(source, "na_rdf_value");
  const auto& x = source.x();
  const auto& y = source.y();
  const int n = x.horizon();
  const int letters = n + 1;
  const double dist = trace.final_distortion();

  const JointCausalDistribution j = causal_product(source, trace.final_channel);
  double log_z_total = 0.0;
  for (std::size_t ix = 0; ix < j.size_x(); ++ix) {
    for (std::size_t iy = 0; iy < j.size_y(); ++iy) {
      const double w = j(ix, iy);
      if (w == 0.0) continue;
      for (int i = 0; i <= n; ++i) {
        const int a = x.symbol_at(ix, i);
        const std::size_t yp = y.prefix_index(iy, i);
        double z = 0.0;
        for (int b = 0; b < d.y_size(); ++b) {
          z += std::exp(s.value * d.letter(a, b)) *
               trace.final_marginals.kernel(i, yp, b);
        }
        log_z_total += w * std::log(z);
      }
    }
  }
  const double rate_total = s.value * dist * letters - log_z_total;
  const double info_total = detail::directed_info_value(trace.final_channel, j);
  const double residual = std::abs(rate_total - info_total) / letters;
  if (trace.converged && residual > 10.0 * tol) {
    throw std::runtime_error(
        "na_rdf_value: rate formula and directed information disagree by " +
        std::to_string(residual) + " nats/letter");
  }
  const double rate = rate_total / letters;
  return RDPoint{s.value,          dist,
                 rate,             rate / kLn2,
                 trace.iterations(), residual,
                 trace.converged};
}

/**
 * Sweep of the parametrized curve over an ascending grid of nonpositive
 * slopes. With warm_start each point starts from the previous converged
 * marginal (sequential by contract); without it points are independent and
 * may be evaluated in parallel.
 */
inline std::vector<RDPoint> rd_curve(const CausalKernelFamily& source,
                                     const DistortionSpec& d,
                                     const std::vector<Slope>& s_grid,
                                     const BaaConfig& cfg,
                                     bool warm_start = true,
                                     bool parallel = false) {
  if (s_grid.empty()) {
    throw std::invalid_argument("rd_curve: empty slope grid");
  }
  for (std::size_t i = 1; i < s_grid.size(); ++i) {
    if (s_grid[i].value < s_grid[i - 1].value) {
      throw std::invalid_argument(
          "rd_curve: slope grid must be sorted ascending");
    }
  }

  std::vector<RDPoint> points;
  points.reserve(s_grid.size());
  if (warm_start) {
    MarginalState carry = cfg.init == BaaInit::Uniform
                              ? MarginalState::uniform(source.y())
                              : MarginalState::seeded_random_positive(
                                    source.y(), cfg.seed);
    for (const Slope s : s_grid) {
      BaaTrace trace = baa_run(source, d, s, cfg, &carry);
      carry = trace.final_marginals;
      points.push_back(na_rdf_value(source, d, s, trace));
    }
    return points;
  }

  const auto solve = [&](Slope s) {
    BaaTrace trace = baa_run(source, d, s, cfg);
    return na_rdf_value(source, d, s, trace);
  };
  if (!parallel) {
    for (const Slope s : s_grid) points.push_back(solve(s));
    return points;
  }
  std::vector<std::future<RDPoint>> futures;
  futures.reserve(s_grid.size());
  for (const Slope s : s_grid) {
    futures.push_back(std::async(std::launch::async, solve, s));
  }
  for (auto& f : futures) points.push_back(f.get());
  return points;
}

struct CurveShapeReport {
  bool distortion_monotone = true;
  bool rate_monotone = true;
  bool convex = true;
  double max_violation = 0.0;

  bool ok() const { return distortion_monotone && rate_monotone && convex; }
};

/// Monotonicity and chord-slope convexity of an emitted curve, in the order
/// given (ascending s). Pairs closer than 1e-12 in distortion are skipped in
/// the slope test.
inline CurveShapeReport check_curve_shape(std::span<const RDPoint> pts,
                                          double tol = 1e-7) {
  CurveShapeReport rep;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double dd = pts[i].distortion - pts[i - 1].distortion;
    const double dr = pts[i].rate_nats_per_letter - pts[i - 1].rate_nats_per_letter;
    if (dd < -tol) {
      rep.distortion_monotone = false;
      rep.max_violation = std::max(rep.max_violation, -dd);
    }
    if (dr > tol) {
      rep.rate_monotone = false;
      rep.max_violation = std::max(rep.max_violation, dr);
    }
  }
  double prev_slope = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double dd = pts[i].distortion - pts[i - 1].distortion;
    if (std::abs(dd) < 1e-12) continue;
    const double slope =
        (pts[i].rate_nats_per_letter - pts[i - 1].rate_nats_per_letter) / dd;
    if (slope < prev_slope - tol) {
      rep.convex = false;
      rep.max_violation = std::max(rep.max_violation, prev_slope - slope);
    }
    prev_slope = slope;
  }
  return rep;
}

}  // namespace causalinfo
