#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "causalinfo/alphabet.hpp"

namespace causalinfo {

inline constexpr double kMassTolerance = 1e-12;
// Negative round-off beyond this is an input error, not noise.
inline constexpr double kNegativeClamp = 1e-15;

namespace detail {

/// Clamps tiny negative round-off to zero in place; rejects real negatives
/// and checks unit mass. Shared by every type that stores probabilities.
/// The sum is compensated so the 1e-12 gate stays meaningful for tables
/// with millions of entries.
inline void validate_mass(std::span<double> mass, const char* what) {
  double sum = 0.0;
  double comp = 0.0;
  for (double& v : mass) {
    if (v < 0.0) {
      if (v < -kNegativeClamp) {
        throw std::invalid_argument(std::string(what) +
                                    ": negative probability entry " +
                                    std::to_string(v));
      }
      v = 0.0;
    }
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) +
                                  ": non-finite probability entry");
    }
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  sum += comp;
  if (std::abs(sum - 1.0) > kMassTolerance) {
    throw std::invalid_argument(std::string(what) + ": mass sums to " +
                                std::to_string(sum) + ", expected 1");
  }
}

}  // namespace detail

/// Probability vector over a finite alphabet. Immutable after construction.
class FinitePmf {
 public:
  FinitePmf(Alphabet alphabet, std::vector<double> mass)
      : alphabet_(std::move(alphabet)), mass_(std::move(mass)) {
    if (static_cast<int>(mass_.size()) != alphabet_.size()) {
      throw std::invalid_argument(
          "FinitePmf: mass length " + std::to_string(mass_.size()) +
          " does not match alphabet size " + std::to_string(alphabet_.size()));
    }
    detail::validate_mass(mass_, "FinitePmf");
  }

  static FinitePmf uniform(const Alphabet& a) {
    return FinitePmf(a, std::vector<double>(static_cast<std::size_t>(a.size()),
                                            1.0 / a.size()));
  }

  /// Point mass on one symbol.
  static FinitePmf delta(const Alphabet& a, int symbol) {
    if (symbol < 0 || symbol >= a.size()) {
      throw std::out_of_range("FinitePmf::delta: symbol out of range");
    }
    std::vector<double> m(static_cast<std::size_t>(a.size()), 0.0);
    m[static_cast<std::size_t>(symbol)] = 1.0;
    return FinitePmf(a, std::move(m));
  }

  /// Two-symbol pmf (1-p, p); p is the mass on symbol 1.
  static FinitePmf bernoulli(double p) {
    return FinitePmf(Alphabet(2, "binary"), {1.0 - p, p});
  }

  const Alphabet& alphabet() const { return alphabet_; }
  int size() const { return alphabet_.size(); }
  const std::vector<double>& mass() const { return mass_; }
  double operator[](int i) const { return mass_[static_cast<std::size_t>(i)]; }

 private:
  Alphabet alphabet_;
  std::vector<double> mass_;
};

}  // namespace causalinfo
