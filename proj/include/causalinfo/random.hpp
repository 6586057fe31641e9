#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "causalinfo/kernels.hpp"
#include "causalinfo/pmf.hpp"

namespace causalinfo {

// Seeded generators for randomized checks. Rows are sampled uniformly on the
// simplex (normalized exponentials) and mixed toward uniform so every mass
// stays >= min_mass; the variational equalities assume compatible supports.

inline std::vector<double> random_simplex_row(std::mt19937_64& rng, int dim,
                                              double min_mass = 1e-6) {
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> row(static_cast<std::size_t>(dim));
  double sum = 0.0;
  for (double& v : row) {
    v = exp1(rng);
    sum += v;
  }
  const double floor_total = min_mass * dim;
  for (double& v : row) {
    v = (v / sum) * (1.0 - floor_total) + min_mass;
  }
  return row;
}

inline FinitePmf random_pmf(std::mt19937_64& rng, const Alphabet& a,
                            double min_mass = 1e-6) {
  return FinitePmf(a, random_simplex_row(rng, a.size(), min_mass));
}

inline CausalKernelFamily random_kernel_family(std::mt19937_64& rng,
                                               KernelKind kind,
                                               const SequenceIndexer& x,
                                               const SequenceIndexer& y,
                                               double min_mass = 1e-6) {
  std::vector<StageKernel> stages;
  for (int i = 0; i <= x.horizon(); ++i) {
    const auto shape = detail::cond_shape(kind, i);
    const std::size_t rows =
        x.prefix_count(shape.x_len) * y.prefix_count(shape.y_len);
    const int cols =
        detail::emits_x(kind) ? x.stage(i).size() : y.stage(i).size();
    StageKernel st(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const auto row = random_simplex_row(rng, cols, min_mass);
      for (int c = 0; c < cols; ++c) {
        st.at(r, c) = row[static_cast<std::size_t>(c)];
      }
    }
    stages.push_back(std::move(st));
  }
  return CausalKernelFamily(kind, x, y, std::move(stages));
}

/// Random source family whose stage tables ignore the y-conditioning block.
inline CausalKernelFamily random_feedback_free_source(
    std::mt19937_64& rng, const SequenceIndexer& x, const SequenceIndexer& y,
    double min_mass = 1e-6) {
  std::vector<StageKernel> stages;
  for (int i = 0; i <= x.horizon(); ++i) {
    const std::size_t nx = x.prefix_count(i);
    const std::size_t ny = y.prefix_count(i);
    const int cols = x.stage(i).size();
    StageKernel st(nx * ny, cols);
    for (std::size_t xp = 0; xp < nx; ++xp) {
      const auto row = random_simplex_row(rng, cols, min_mass);
      for (std::size_t yp = 0; yp < ny; ++yp) {
        for (int c = 0; c < cols; ++c) {
          st.at(xp * ny + yp, c) = row[static_cast<std::size_t>(c)];
        }
      }
    }
    stages.push_back(std::move(st));
  }
  return CausalKernelFamily(KernelKind::SourceFeedback, x, y,
                            std::move(stages));
}

struct RandomInstance {
  CausalKernelFamily source;
  CausalKernelFamily channel;
};

/// One random (source, channel) pair with alphabet sizes in {2, 3} and a
/// horizon up to max_horizon. The source carries feedback unless asked not to.
inline RandomInstance random_instance(std::mt19937_64& rng,
                                      int max_horizon = 3,
                                      bool feedback_free = false,
                                      double min_mass = 1e-6) {
  std::uniform_int_distribution<int> size_dist(2, 3);
  std::uniform_int_distribution<int> horizon_dist(0, max_horizon);
  const Alphabet ax(size_dist(rng), "x");
  const Alphabet ay(size_dist(rng), "y");
  const int n = horizon_dist(rng);
  const SequenceIndexer x = SequenceIndexer::constant(n, ax);
  const SequenceIndexer y = SequenceIndexer::constant(n, ay);
  CausalKernelFamily source =
      feedback_free
          ? random_feedback_free_source(rng, x, y, min_mass)
          : random_kernel_family(rng, KernelKind::SourceFeedback, x, y, min_mass);
  CausalKernelFamily channel =
      random_kernel_family(rng, KernelKind::ChannelFeedforward, x, y, min_mass);
  return {std::move(source), std::move(channel)};
}

}  // namespace causalinfo
