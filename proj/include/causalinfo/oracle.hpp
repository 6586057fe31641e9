#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "causalinfo/kernels.hpp"
#include "causalinfo/pmf.hpp"
#include "causalinfo/rate_distortion.hpp"

// Ground-truth generators for tiny instances. Everything here evaluates the
// Lagrangian with its own arithmetic; none of it calls into the alternating
// minimization it is used to check.

namespace causalinfo {

enum class OracleMethod { Grid, ClassicalBaa, AnalyticBinary };

/// How the grid search conditions the stage-1 channel rows. MostRecentInput
/// grids q_1(y_1 | y_0, x_1); FullHistory also grids the x_0 dependence,
/// which squares the per-group search space and needs a coarser step.
enum class GridConditioning { MostRecentInput, FullHistory };

struct OracleReport {
  OracleMethod method;
  double value_nats;   // Lagrangian objective I - s * (n+1) * D, total
  double rate_nats;    // directed information of the reported channel, total
  double distortion;   // per-letter
  double resolution;   // effective grid step (Grid only)
  bool converged = true;
  std::optional<CausalKernelFamily> argmin_channel;
};

/// Binary entropy in nats, h(0) = h(1) = 0.
inline double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("binary_entropy: p outside [0, 1]");
  }
  double acc = 0.0;
  if (p > 0.0) acc -= p * std::log(p);
  if (p < 1.0) acc -= (1.0 - p) * std::log(1.0 - p);
  return acc;
}

/// Closed-form binary-Hamming rate-distortion value in nats:
/// h(p) - h(D) for D below the source bias, 0 past it. The bias is reduced
/// by symmetry to (0, 1/2].
inline double analytic_binary_rdf(double p, double distortion) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::invalid_argument("analytic_binary_rdf: bias must be in (0, 1)");
  }
  if (distortion < 0.0) {
    throw std::invalid_argument("analytic_binary_rdf: distortion must be >= 0");
  }
  const double bias = std::min(p, 1.0 - p);
  if (distortion >= bias) return 0.0;
  return binary_entropy(bias) - binary_entropy(distortion);
}

namespace oracle_detail {

/// All pmfs over `dim` symbols with entries k/m, enumerated in lexicographic
/// order of the mass vector. Ties in the searches below resolve to the first
/// hit, so the order fixes the reported argmin.
inline std::vector<std::vector<double>> simplex_grid(int dim, int m) {
  std::vector<std::vector<double>> out;
  std::vector<int> counts(static_cast<std::size_t>(dim), 0);
  // Odometer over the first dim-1 coordinates; the last takes the remainder.
  const auto emit = [&](auto&& self, int pos, int left) -> void {
    if (pos == dim - 1) {
      counts[static_cast<std::size_t>(pos)] = left;
      std::vector<double> pmf(static_cast<std::size_t>(dim));
      for (int i = 0; i < dim; ++i) {
        pmf[static_cast<std::size_t>(i)] =
            static_cast<double>(counts[static_cast<std::size_t>(i)]) / m;
      }
      out.push_back(std::move(pmf));
      return;
    }
    for (int k = 0; k <= left; ++k) {
      counts[static_cast<std::size_t>(pos)] = k;
      self(self, pos + 1, left - k);
    }
  };
  emit(emit, 0, m);
  return out;
}

/// Per-(grid pmf, input symbol) contribution
///   A(g, x) = sum_y g(y) [ ln g(y) - s rho(x, y) ],
/// so a group objective is sum_x u(x) A(g_x, x) - sum_y nu(y) ln nu(y).
struct RowScores {
  int dim_y;
  int n_inputs;
  std::vector<double> a;  // grid index * n_inputs + x

  RowScores(const std::vector<std::vector<double>>& grid, int inputs,
            const DistortionSpec& d, double s)
      : dim_y(static_cast<int>(grid.front().size())),
        n_inputs(inputs),
        a(grid.size() * static_cast<std::size_t>(inputs), 0.0) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      for (int x = 0; x < inputs; ++x) {
        double acc = 0.0;
        for (int y = 0; y < dim_y; ++y) {
          const double w = grid[g][static_cast<std::size_t>(y)];
          if (w > 0.0) acc += w * (std::log(w) - s * d.letter(x, y));
        }
        a[g * static_cast<std::size_t>(inputs) + static_cast<std::size_t>(x)] =
            acc;
      }
    }
  }

  double operator()(std::size_t g, int x) const {
    return a[g * static_cast<std::size_t>(n_inputs) + static_cast<std::size_t>(x)];
  }
};

/// Objective of one conditional block: inputs weighted by u (need not be
/// normalized; the value scales linearly), rows chosen from the grid.
inline double block_objective(const std::vector<std::vector<double>>& grid,
                              const RowScores& scores,
                              const std::vector<double>& u,
                              const std::vector<std::size_t>& rows,
                              const std::vector<int>& row_input) {
  const int dy = scores.dim_y;
  double nu[3] = {0.0, 0.0, 0.0};
  double acc = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double w = u[r];
    if (w == 0.0) continue;
    acc += w * scores(rows[r], row_input[r]);
    const auto& g = grid[rows[r]];
    for (int y = 0; y < dy; ++y) nu[y] += w * g[static_cast<std::size_t>(y)];
  }
  double total = 0.0;
  for (int y = 0; y < dy; ++y) total += nu[y];
  if (total <= 0.0) return 0.0;
  for (int y = 0; y < dy; ++y) {
    if (nu[y] > 0.0) acc -= nu[y] * std::log(nu[y] / total);
  }
  return acc;
}

/// Exhaustive minimum of block_objective over the row grid. Returns the
/// best row indices through `rows`.
inline double minimize_block(const std::vector<std::vector<double>>& grid,
                             const RowScores& scores,
                             const std::vector<double>& u,
                             const std::vector<int>& row_input,
                             std::vector<std::size_t>& rows) {
  const std::size_t k = row_input.size();
  std::vector<std::size_t> cur(k, 0);
  std::vector<std::size_t> best(k, 0);
  double best_val = std::numeric_limits<double>::infinity();
  while (true) {
    const double v = block_objective(grid, scores, u, cur, row_input);
    if (v < best_val) {
      best_val = v;
      best = cur;
    }
    std::size_t pos = k;
    while (pos > 0) {
      --pos;
      if (++cur[pos] < grid.size()) break;
      cur[pos] = 0;
      if (pos == 0) {
        rows = best;
        return best_val;
      }
    }
  }
}

}  // namespace oracle_detail

/**
 * Brute-force Lagrangian minimum over causal channels on a simplex grid.
 * Stage-0 rows are gridded per input symbol; at horizon 1 the stage-1 rows
 * are gridded per (y_0, conditioning block) and minimized exactly within
 * each y_0 block, which is an exact decomposition of the objective. Limited
 * to alphabets of size <= 3 and horizon <= 1. A nonpositive step selects
 * the default: 0.01 at horizon 0, 0.02 at horizon 1.
 */
inline OracleReport grid_lagrangian_min(
    const CausalKernelFamily& source, const DistortionSpec& d, Slope s,
    double step = 0.0,
    GridConditioning conditioning = GridConditioning::MostRecentInput) {
  detail::require_feedback_free_source(source, "grid_lagrangian_min");
  d.check_compatible(source.x(), source.y());
  const int n = source.horizon();
  if (n > 1) {
    throw std::length_error(
        "grid_lagrangian_min: horizon " + std::to_string(n) +
        " exceeds the oracle limit of 1 (the channel grid explodes beyond it)");
  }
  if (d.x_size() > 3 || d.y_size() > 3) {
    throw std::length_error("grid_lagrangian_min: alphabets larger than 3 are "
                            "beyond the oracle limit");
  }
  if (step <= 0.0) step = n == 0 ? 0.01 : 0.02;
  if (step > 0.05) {
    throw std::invalid_argument("grid_lagrangian_min: step must be in (0, 0.05]");
  }
  const int m = static_cast<int>(std::lround(1.0 / step));
  const double resolution = 1.0 / m;
  const int kx = d.x_size();
  const int ky = d.y_size();

  const auto grid = oracle_detail::simplex_grid(ky, m);
  const oracle_detail::RowScores scores(grid, kx, d, s.value);

  // Stage-0 block: one row per x_0, weighted by the letter pmf.
  const std::vector<double> p0(source.stage(0).row(0).begin(),
                               source.stage(0).row(0).end());
  std::vector<int> inputs0(static_cast<std::size_t>(kx));
  for (int x = 0; x < kx; ++x) inputs0[static_cast<std::size_t>(x)] = x;

  // Enumeration budget guard.
  const double combos0 = std::pow(static_cast<double>(grid.size()), kx);
  double inner = 0.0;
  int block_rows = 0;
  if (n == 1) {
    block_rows = conditioning == GridConditioning::MostRecentInput ? kx : kx * kx;
    inner = std::pow(static_cast<double>(grid.size()), block_rows) * ky;
  }
  if (combos0 * (1.0 + inner) > 3.2e8) {
    throw std::length_error(
        "grid_lagrangian_min: enumeration would need about " +
        std::to_string(combos0 * (1.0 + inner)) +
        " objective evaluations; use a coarser step");
  }

  // p1(x_1 | x_0) for horizon 1 (any y row works; the source is feedback-free).
  std::vector<double> p1;
  if (n == 1) {
    p1.assign(static_cast<std::size_t>(kx * kx), 0.0);
    const std::size_t ny1 = source.y().prefix_count(1);
    for (int a = 0; a < kx; ++a) {
      const auto row = source.stage(1).row(static_cast<std::size_t>(a) * ny1);
      for (int b = 0; b < kx; ++b) {
        p1[static_cast<std::size_t>(a * kx + b)] =
            row[static_cast<std::size_t>(b)];
      }
    }
  }

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_rows0(static_cast<std::size_t>(kx), 0);
  // Per y_0: best stage-1 block rows.
  std::vector<std::vector<std::size_t>> best_rows1(
      static_cast<std::size_t>(ky));

  std::vector<std::size_t> rows0(static_cast<std::size_t>(kx), 0);
  std::vector<int> block_input(static_cast<std::size_t>(std::max(block_rows, 1)));
  if (n == 1) {
    for (int r = 0; r < block_rows; ++r) {
      // Rightmost digit of the block index is the current input symbol.
      block_input[static_cast<std::size_t>(r)] = r % kx;
    }
  }

  while (true) {
    double value =
        oracle_detail::block_objective(grid, scores, p0, rows0, inputs0);
    std::vector<std::vector<std::size_t>> rows1(static_cast<std::size_t>(ky));
    if (n == 1) {
      for (int y0 = 0; y0 < ky; ++y0) {
        // Block weights u(c) for conditioning c (x_1 or (x_0, x_1)).
        std::vector<double> u(static_cast<std::size_t>(block_rows), 0.0);
        for (int x0 = 0; x0 < kx; ++x0) {
          const double w0 =
              p0[static_cast<std::size_t>(x0)] *
              grid[rows0[static_cast<std::size_t>(x0)]]
                  [static_cast<std::size_t>(y0)];
          if (w0 == 0.0) continue;
          for (int x1 = 0; x1 < kx; ++x1) {
            const double w = w0 * p1[static_cast<std::size_t>(x0 * kx + x1)];
            const int c = conditioning == GridConditioning::MostRecentInput
                              ? x1
                              : x0 * kx + x1;
            u[static_cast<std::size_t>(c)] += w;
          }
        }
        rows1[static_cast<std::size_t>(y0)].assign(
            static_cast<std::size_t>(block_rows), 0);
        value += oracle_detail::minimize_block(
            grid, scores, u, block_input, rows1[static_cast<std::size_t>(y0)]);
      }
    }
    if (value < best_val) {
      best_val = value;
      best_rows0 = rows0;
      best_rows1 = rows1;
    }
    // Advance the stage-0 odometer.
    std::size_t pos = rows0.size();
    bool done = false;
    while (pos > 0) {
      --pos;
      if (++rows0[pos] < grid.size()) break;
      rows0[pos] = 0;
      if (pos == 0) done = true;
    }
    if (done) break;
  }

  // Assemble the argmin as a full feedforward family.
  std::vector<StageKernel> stages;
  {
    StageKernel st0(static_cast<std::size_t>(kx), ky);
    for (int x = 0; x < kx; ++x) {
      const auto& g = grid[best_rows0[static_cast<std::size_t>(x)]];
      for (int y = 0; y < ky; ++y) {
        st0.at(static_cast<std::size_t>(x), y) = g[static_cast<std::size_t>(y)];
      }
    }
    stages.push_back(std::move(st0));
  }
  if (n == 1) {
    const std::size_t nyp = static_cast<std::size_t>(ky);
    const std::size_t nxi = static_cast<std::size_t>(kx * kx);
    StageKernel st1(nyp * nxi, ky);
    for (int y0 = 0; y0 < ky; ++y0) {
      for (int x0 = 0; x0 < kx; ++x0) {
        for (int x1 = 0; x1 < kx; ++x1) {
          const int c = conditioning == GridConditioning::MostRecentInput
                            ? x1
                            : x0 * kx + x1;
          const auto& g = grid[best_rows1[static_cast<std::size_t>(y0)]
                                         [static_cast<std::size_t>(c)]];
          const std::size_t row = static_cast<std::size_t>(y0) * nxi +
                                  static_cast<std::size_t>(x0 * kx + x1);
          for (int y1 = 0; y1 < ky; ++y1) {
            st1.at(row, y1) = g[static_cast<std::size_t>(y1)];
          }
        }
      }
    }
    stages.push_back(std::move(st1));
  }
  CausalKernelFamily argmin(KernelKind::ChannelFeedforward, source.x(),
                            source.y(), std::move(stages));

  const JointCausalDistribution j = causal_product(source, argmin);
  const double rate = detail::directed_info_value(argmin, j);
  const double dist = detail::per_letter_distortion(j, d);

  return OracleReport{OracleMethod::Grid, best_val,  rate,
                      dist,               resolution, true,
                      std::move(argmin)};
}

/**
 * Classical memoryless alternating minimization at slope s, the n = 0
 * baseline. Iterates the output marginal against the tilted channel until
 * the marginal settles.
 */
inline OracleReport classical_blahut(const FinitePmf& source_letter,
                                     const std::vector<std::vector<double>>& rho,
                                     Slope s, double tol = 1e-13,
                                     int max_iter = 200000) {
  const int kx = source_letter.size();
  if (static_cast<int>(rho.size()) != kx) {
    throw std::invalid_argument("classical_blahut: rho row count mismatch");
  }
  const int ky = static_cast<int>(rho.front().size());
  const DistortionSpec d(0, rho);

  std::vector<double> q(static_cast<std::size_t>(ky), 1.0 / ky);
  std::vector<double> channel(static_cast<std::size_t>(kx * ky), 0.0);
  bool converged = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    // Tilted channel for the current marginal.
    for (int x = 0; x < kx; ++x) {
      double z = 0.0;
      for (int y = 0; y < ky; ++y) {
        const double v =
            q[static_cast<std::size_t>(y)] * std::exp(s.value * d.letter(x, y));
        channel[static_cast<std::size_t>(x * ky + y)] = v;
        z += v;
      }
      for (int y = 0; y < ky; ++y) {
        channel[static_cast<std::size_t>(x * ky + y)] /= z;
      }
    }
    // Induced marginal.
    double delta = 0.0;
    for (int y = 0; y < ky; ++y) {
      double nu = 0.0;
      for (int x = 0; x < kx; ++x) {
        nu += source_letter[x] * channel[static_cast<std::size_t>(x * ky + y)];
      }
      delta = std::max(delta, std::abs(nu - q[static_cast<std::size_t>(y)]));
      q[static_cast<std::size_t>(y)] = nu;
    }
    if (delta < tol) {
      converged = true;
      break;
    }
  }

  double rate = 0.0;
  double dist = 0.0;
  for (int x = 0; x < kx; ++x) {
    for (int y = 0; y < ky; ++y) {
      const double w =
          source_letter[x] * channel[static_cast<std::size_t>(x * ky + y)];
      if (w == 0.0) continue;
      rate += w * std::log(channel[static_cast<std::size_t>(x * ky + y)] /
                           q[static_cast<std::size_t>(y)]);
      dist += w * d.letter(x, y);
    }
  }

  std::vector<std::vector<double>> w_rows(static_cast<std::size_t>(kx));
  for (int x = 0; x < kx; ++x) {
    w_rows[static_cast<std::size_t>(x)].assign(
        channel.begin() + static_cast<std::ptrdiff_t>(x * ky),
        channel.begin() + static_cast<std::ptrdiff_t>((x + 1) * ky));
  }
  CausalKernelFamily family = make_memoryless_channel(
      0, w_rows, source_letter.alphabet(), Alphabet(ky, "reproduction"));

  return OracleReport{OracleMethod::ClassicalBaa,
                      rate - s.value * dist,
                      rate,
                      dist,
                      0.0,
                      converged,
                      std::move(family)};
}

}  // namespace causalinfo
