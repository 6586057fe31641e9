#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "causalinfo/joint.hpp"
#include "causalinfo/pmf.hpp"

namespace causalinfo {

namespace detail {

/// sum a * ln(a/b) in nats with the 0*ln(0/.) = 0 convention. Returns +inf
/// when a puts mass where b does not (absolute-continuity failure is a
/// legitimate value here, not an error). Tiny negative round-off on a true
/// zero divergence is clamped to 0.
inline double kl_core(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("kl_divergence: shape mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 0.0) {
      if (b[i] <= 0.0) return std::numeric_limits<double>::infinity();
      acc += a[i] * std::log(a[i] / b[i]);
    }
  }
  if (acc < 0.0 && acc > -1e-12) acc = 0.0;
  return acc;
}

}  // namespace detail

inline double kl_divergence(const FinitePmf& a, const FinitePmf& b) {
  return detail::kl_core(a.mass(), b.mass());
}

inline double kl_divergence(const JointCausalDistribution& a,
                            const JointCausalDistribution& b) {
  if (!(a.x() == b.x()) || !(a.y() == b.y())) {
    throw std::invalid_argument("kl_divergence: joint shapes differ");
  }
  return detail::kl_core(a.table(), b.table());
}

}  // namespace causalinfo
