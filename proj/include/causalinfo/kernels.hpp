#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "causalinfo/alphabet.hpp"
#include "causalinfo/pmf.hpp"

namespace causalinfo {

/**
 * The four causal conditioning patterns. At stage i the kernel emits one
 * symbol conditioned on:
 *
 *   SourceFeedback      x_i  given (x^{i-1}, y^{i-1})   source with feedback
 *   ChannelFeedforward  y_i  given (y^{i-1}, x^i)       channel seeing x up to now
 *   OutputPredictor     y_i  given (y^{i-1}, x^{i-1})   output law from strict past
 *   InputPosterior      x_i  given (x^{i-1}, y^i)       input posterior after y_i
 */
enum class KernelKind {
  SourceFeedback,
  ChannelFeedforward,
  OutputPredictor,
  InputPosterior,
};

inline const char* to_string(KernelKind k) {
  switch (k) {
    case KernelKind::SourceFeedback: return "SourceFeedback";
    case KernelKind::ChannelFeedforward: return "ChannelFeedforward";
    case KernelKind::OutputPredictor: return "OutputPredictor";
    case KernelKind::InputPosterior: return "InputPosterior";
  }
  return "?";
}

/**
 * One stage of a kernel family: a row-stochastic table. Row index encodes the
 * conditioning tuple, column the emitted symbol. `flagged[r]` marks rows that
 * were uniform-filled because the conditioning event had zero probability;
 * such rows carry no information and are excluded from equality contracts.
 */
struct StageKernel {
  std::size_t rows = 0;
  int cols = 0;
  std::vector<double> p;         // rows * cols, row-major
  std::vector<std::uint8_t> flagged;

  StageKernel() = default;
  StageKernel(std::size_t rows_, int cols_)
      : rows(rows_),
        cols(cols_),
        p(rows_ * static_cast<std::size_t>(cols_), 0.0),
        flagged(rows_, 0) {}

  static StageKernel constant_rows(std::size_t rows_,
                                   std::span<const double> row) {
    StageKernel k(rows_, static_cast<int>(row.size()));
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        k.p[r * row.size() + c] = row[c];
      }
    }
    return k;
  }

  double operator()(std::size_t row, int sym) const {
    return p[row * static_cast<std::size_t>(cols) +
             static_cast<std::size_t>(sym)];
  }
  double& at(std::size_t row, int sym) {
    return p[row * static_cast<std::size_t>(cols) +
             static_cast<std::size_t>(sym)];
  }
  std::span<const double> row(std::size_t r) const {
    return {p.data() + r * static_cast<std::size_t>(cols),
            static_cast<std::size_t>(cols)};
  }
  std::span<double> row(std::size_t r) {
    return {p.data() + r * static_cast<std::size_t>(cols),
            static_cast<std::size_t>(cols)};
  }

  void validate(const char* what) {
    if (p.size() != rows * static_cast<std::size_t>(cols) ||
        flagged.size() != rows) {
      throw std::invalid_argument(std::string(what) +
                                  ": stage table shape mismatch");
    }
    for (std::size_t r = 0; r < rows; ++r) {
      detail::validate_mass(row(r), what);
    }
  }
};

namespace detail {

/// Conditioning shape of kind `k` at stage `i`: how many leading x and y
/// symbols enter the row index, and which block is the major digit.
struct CondShape {
  int x_len;
  int y_len;
  bool x_major;  // row = x_part * (#y tuples) + y_part when true
};

inline CondShape cond_shape(KernelKind k, int i) {
  switch (k) {
    case KernelKind::SourceFeedback: return {i, i, true};
    case KernelKind::ChannelFeedforward: return {i + 1, i, false};
    case KernelKind::OutputPredictor: return {i, i, false};
    case KernelKind::InputPosterior: return {i, i + 1, true};
  }
  throw std::logic_error("unreachable kernel kind");
}

inline bool emits_x(KernelKind k) {
  return k == KernelKind::SourceFeedback || k == KernelKind::InputPosterior;
}

}  // namespace detail

/**
 * A family of per-stage conditional pmfs with one of the four causal
 * conditioning patterns, over stages 0..horizon. Stage-0 kernels condition
 * on the empty past (one row), except patterns whose conditioning includes
 * the current symbol of the other stream.
 *
 * Row indices concatenate the conditioning tuple's flat prefix indices in
 * the order the pattern is written, e.g. ChannelFeedforward stage i uses
 * row = flat(y^{i-1}) * |X^i| + flat(x^i). All prefix flattening follows
 * SequenceIndexer (stage 0 most significant).
 */
class CausalKernelFamily {
 public:
  CausalKernelFamily(KernelKind kind, SequenceIndexer x, SequenceIndexer y,
                     std::vector<StageKernel> stages)
      : kind_(kind), x_(std::move(x)), y_(std::move(y)), stages_(std::move(stages)) {
    if (x_.horizon() != y_.horizon()) {
      throw std::invalid_argument("CausalKernelFamily: x/y horizon mismatch");
    }
    if (static_cast<int>(stages_.size()) != x_.num_stages()) {
      throw std::invalid_argument("CausalKernelFamily: expected " +
                                  std::to_string(x_.num_stages()) +
                                  " stage tables, got " +
                                  std::to_string(stages_.size()));
    }
    for (int i = 0; i <= horizon(); ++i) {
      auto& st = stages_[static_cast<std::size_t>(i)];
      if (st.rows != cond_count(i) || st.cols != output_alphabet(i).size()) {
        throw std::invalid_argument(
            "CausalKernelFamily: stage " + std::to_string(i) +
            " table is " + std::to_string(st.rows) + "x" +
            std::to_string(st.cols) + ", expected " +
            std::to_string(cond_count(i)) + "x" +
            std::to_string(output_alphabet(i).size()));
      }
      st.validate("CausalKernelFamily");
    }
  }

  KernelKind kind() const { return kind_; }
  int horizon() const { return x_.horizon(); }
  const SequenceIndexer& x() const { return x_; }
  const SequenceIndexer& y() const { return y_; }
  const StageKernel& stage(int i) const {
    return stages_[static_cast<std::size_t>(i)];
  }
  const Alphabet& output_alphabet(int i) const {
    return detail::emits_x(kind_) ? x_.stage(i) : y_.stage(i);
  }

  std::size_t cond_count(int i) const {
    const auto s = detail::cond_shape(kind_, i);
    return x_.prefix_count(s.x_len) * y_.prefix_count(s.y_len);
  }

  /// Row index for the conditioning tuple embedded in full sequence indices.
  std::size_t cond_row(int i, std::size_t ix, std::size_t iy) const {
    const auto s = detail::cond_shape(kind_, i);
    const std::size_t xp = x_.prefix_index(ix, s.x_len);
    const std::size_t yp = y_.prefix_index(iy, s.y_len);
    return s.x_major ? xp * y_.prefix_count(s.y_len) + yp
                     : yp * x_.prefix_count(s.x_len) + xp;
  }

  /// The stage-i factor contributed by the pair (x^n, y^n) = (ix, iy):
  /// the kernel probability of that pair's stage-i output symbol.
  double stage_prob(int i, std::size_t ix, std::size_t iy) const {
    const int sym = detail::emits_x(kind_) ? x_.symbol_at(ix, i)
                                           : y_.symbol_at(iy, i);
    return stage(i)(cond_row(i, ix, iy), sym);
  }

  /// True when every stage table ignores its y-conditioning block.
  /// Meaningful for SourceFeedback families (source without feedback).
  bool is_feedback_free(double tol = 1e-14) const {
    if (kind_ != KernelKind::SourceFeedback) return false;
    for (int i = 0; i <= horizon(); ++i) {
      const auto& st = stage(i);
      const std::size_t ny = y_.prefix_count(i);
      const std::size_t nx = x_.prefix_count(i);
      for (std::size_t xp = 0; xp < nx; ++xp) {
        const auto base = st.row(xp * ny);
        for (std::size_t yp = 1; yp < ny; ++yp) {
          const auto other = st.row(xp * ny + yp);
          for (int c = 0; c < st.cols; ++c) {
            if (std::abs(base[static_cast<std::size_t>(c)] -
                         other[static_cast<std::size_t>(c)]) > tol) {
              return false;
            }
          }
        }
      }
    }
    return true;
  }

 private:
  KernelKind kind_;
  SequenceIndexer x_;
  SequenceIndexer y_;
  std::vector<StageKernel> stages_;
};

// ---------------------------------------------------------------------------
// Factories for the standard test and problem-file families.
// ---------------------------------------------------------------------------

/// Source emitting the same letter pmf at every stage, independent of the past.
inline CausalKernelFamily make_iid_source(int horizon, const FinitePmf& letter,
                                          const Alphabet& y_alphabet) {
  SequenceIndexer x = SequenceIndexer::constant(horizon, letter.alphabet());
  SequenceIndexer y = SequenceIndexer::constant(horizon, y_alphabet);
  std::vector<StageKernel> stages;
  for (int i = 0; i <= horizon; ++i) {
    const std::size_t rows = x.prefix_count(i) * y.prefix_count(i);
    stages.push_back(StageKernel::constant_rows(rows, letter.mass()));
  }
  return CausalKernelFamily(KernelKind::SourceFeedback, std::move(x),
                            std::move(y), std::move(stages));
}

/// First-order Markov source: initial pmf at stage 0, then row-stochastic
/// transition[x_{i-1}][x_i]. Feedback-free by construction.
inline CausalKernelFamily make_markov_source(
    int horizon, const FinitePmf& initial,
    const std::vector<std::vector<double>>& transition,
    const Alphabet& y_alphabet) {
  const int k = initial.size();
  if (static_cast<int>(transition.size()) != k) {
    throw std::invalid_argument("make_markov_source: transition row count");
  }
  for (const auto& row : transition) {
    if (static_cast<int>(row.size()) != k) {
      throw std::invalid_argument("make_markov_source: transition col count");
    }
  }
  SequenceIndexer x = SequenceIndexer::constant(horizon, initial.alphabet());
  SequenceIndexer y = SequenceIndexer::constant(horizon, y_alphabet);
  std::vector<StageKernel> stages;
  stages.push_back(StageKernel::constant_rows(1, initial.mass()));
  for (int i = 1; i <= horizon; ++i) {
    const std::size_t nx = x.prefix_count(i);
    const std::size_t ny = y.prefix_count(i);
    StageKernel st(nx * ny, k);
    for (std::size_t xp = 0; xp < nx; ++xp) {
      // Last symbol of the length-i x prefix drives the transition row.
      const int prev = static_cast<int>(xp % static_cast<std::size_t>(k));
      for (std::size_t yp = 0; yp < ny; ++yp) {
        for (int c = 0; c < k; ++c) {
          st.at(xp * ny + yp, c) = transition[static_cast<std::size_t>(prev)]
                                             [static_cast<std::size_t>(c)];
        }
      }
    }
    stages.push_back(std::move(st));
  }
  return CausalKernelFamily(KernelKind::SourceFeedback, std::move(x),
                            std::move(y), std::move(stages));
}

/// Memoryless channel applying the same row-stochastic W[x][y] each stage.
inline CausalKernelFamily make_memoryless_channel(
    int horizon, const std::vector<std::vector<double>>& w,
    const Alphabet& x_alphabet, const Alphabet& y_alphabet) {
  if (static_cast<int>(w.size()) != x_alphabet.size()) {
    throw std::invalid_argument("make_memoryless_channel: row count");
  }
  for (const auto& row : w) {
    if (static_cast<int>(row.size()) != y_alphabet.size()) {
      throw std::invalid_argument("make_memoryless_channel: col count");
    }
  }
  SequenceIndexer x = SequenceIndexer::constant(horizon, x_alphabet);
  SequenceIndexer y = SequenceIndexer::constant(horizon, y_alphabet);
  std::vector<StageKernel> stages;
  for (int i = 0; i <= horizon; ++i) {
    const std::size_t nxi = x.prefix_count(i + 1);
    const std::size_t nyp = y.prefix_count(i);
    StageKernel st(nyp * nxi, y_alphabet.size());
    for (std::size_t yp = 0; yp < nyp; ++yp) {
      for (std::size_t xp = 0; xp < nxi; ++xp) {
        const int cur =
            static_cast<int>(xp % static_cast<std::size_t>(x_alphabet.size()));
        for (int c = 0; c < y_alphabet.size(); ++c) {
          st.at(yp * nxi + xp, c) = w[static_cast<std::size_t>(cur)]
                                     [static_cast<std::size_t>(c)];
        }
      }
    }
    stages.push_back(std::move(st));
  }
  return CausalKernelFamily(KernelKind::ChannelFeedforward, std::move(x),
                            std::move(y), std::move(stages));
}

/// Noiseless channel y_i = x_i.
inline CausalKernelFamily make_identity_channel(int horizon,
                                                const Alphabet& a) {
  std::vector<std::vector<double>> w(
      static_cast<std::size_t>(a.size()),
      std::vector<double>(static_cast<std::size_t>(a.size()), 0.0));
  for (int i = 0; i < a.size(); ++i) {
    w[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
  }
  return make_memoryless_channel(horizon, w, a, a);
}

/// Binary symmetric channel with crossover probability eps.
inline CausalKernelFamily make_bsc_channel(int horizon, double eps) {
  Alphabet b(2, "binary");
  return make_memoryless_channel(horizon, {{1.0 - eps, eps}, {eps, 1.0 - eps}},
                                 b, b);
}

}  // namespace causalinfo
