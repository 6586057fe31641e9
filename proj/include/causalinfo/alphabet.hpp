#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace causalinfo {

/// A finite symbol set. Symbols are the integers 0 .. size()-1.
class Alphabet {
 public:
  explicit Alphabet(int size, std::string label = {})
      : size_(size), label_(std::move(label)) {
    if (size_ < 1) {
      throw std::invalid_argument("Alphabet size must be >= 1, got " +
                                  std::to_string(size_));
    }
  }

  int size() const { return size_; }
  const std::string& label() const { return label_; }

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    return a.size_ == b.size_;
  }

 private:
  int size_;
  std::string label_;
};

/**
 * Bijection between symbol tuples (x_0,...,x_n) and flat indices for a
 * product of per-stage alphabets.
 *
 * Layout is row-major with stage 0 as the most significant digit:
 *   flat = x_0 * |A_1|*...*|A_n| + x_1 * |A_2|*...*|A_n| + ... + x_n
 * This ordering is fixed; emitted tables and files depend on it.
 */
class SequenceIndexer {
 public:
  explicit SequenceIndexer(std::vector<Alphabet> stage_alphabets)
      : stages_(std::move(stage_alphabets)) {
    if (stages_.empty()) {
      throw std::invalid_argument("SequenceIndexer needs at least one stage");
    }
    strides_.resize(stages_.size());
    std::size_t acc = 1;
    for (int i = static_cast<int>(stages_.size()) - 1; i >= 0; --i) {
      strides_[static_cast<std::size_t>(i)] = acc;
      acc *= static_cast<std::size_t>(stages_[static_cast<std::size_t>(i)].size());
    }
    count_ = acc;
  }

  /// Same alphabet at every stage 0..horizon.
  static SequenceIndexer constant(int horizon, const Alphabet& a) {
    if (horizon < 0) {
      throw std::invalid_argument("horizon must be >= 0");
    }
    return SequenceIndexer(
        std::vector<Alphabet>(static_cast<std::size_t>(horizon) + 1, a));
  }

  int horizon() const { return static_cast<int>(stages_.size()) - 1; }
  int num_stages() const { return static_cast<int>(stages_.size()); }
  std::size_t count() const { return count_; }
  const Alphabet& stage(int i) const { return stages_.at(static_cast<std::size_t>(i)); }

  std::size_t flatten(std::span<const int> symbols) const {
    if (symbols.size() != stages_.size()) {
      throw std::invalid_argument("flatten: tuple length mismatch");
    }
    std::size_t idx = 0;
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      if (symbols[i] < 0 || symbols[i] >= stages_[i].size()) {
        throw std::out_of_range("flatten: symbol out of alphabet range");
      }
      idx += static_cast<std::size_t>(symbols[i]) * strides_[i];
    }
    return idx;
  }

  void unflatten(std::size_t index, std::span<int> out) const {
    if (out.size() != stages_.size()) {
      throw std::invalid_argument("unflatten: output length mismatch");
    }
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      out[i] = static_cast<int>((index / strides_[i]) %
                                static_cast<std::size_t>(stages_[i].size()));
    }
  }

  std::vector<int> tuple(std::size_t index) const {
    std::vector<int> out(stages_.size());
    unflatten(index, out);
    return out;
  }

  /// Symbol at stage i of the tuple encoded by `index`.
  int symbol_at(std::size_t index, int i) const {
    const auto ui = static_cast<std::size_t>(i);
    return static_cast<int>((index / strides_[ui]) %
                            static_cast<std::size_t>(stages_[ui].size()));
  }

  /// Number of tuples over stages 0..len-1 (len == 0 gives 1, the empty tuple).
  std::size_t prefix_count(int len) const {
    std::size_t c = 1;
    for (int i = 0; i < len; ++i) {
      c *= static_cast<std::size_t>(stages_[static_cast<std::size_t>(i)].size());
    }
    return c;
  }

  /// Flat index of the first `len` symbols of the tuple encoded by `index`.
  std::size_t prefix_index(std::size_t index, int len) const {
    if (len <= 0) return 0;
    if (len > num_stages()) {
      throw std::invalid_argument("prefix_index: prefix longer than sequence");
    }
    // Dividing by the count of the dropped suffix keeps the leading digits.
    std::size_t suffix = (len == num_stages())
                             ? 1
                             : strides_[static_cast<std::size_t>(len - 1)];
    return index / suffix;
  }

  friend bool operator==(const SequenceIndexer& a, const SequenceIndexer& b) {
    if (a.stages_.size() != b.stages_.size()) return false;
    for (std::size_t i = 0; i < a.stages_.size(); ++i) {
      if (!(a.stages_[i] == b.stages_[i])) return false;
    }
    return true;
  }

 private:
  std::vector<Alphabet> stages_;
  std::vector<std::size_t> strides_;  // strides_[i] = prod of sizes after stage i
  std::size_t count_ = 0;
};

}  // namespace causalinfo
