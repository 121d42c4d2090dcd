#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace twolevel {

/// Weighted index supporting O(1) append/remove-last, point updates and
/// sampling proportional to weight. Below `tree_threshold` entries it keeps a
/// flat array with a running total and samples by linear scan; above it a
/// binary sum tree gives logarithmic updates and sampling.
class RateIndex {
 public:
  explicit RateIndex(std::size_t tree_threshold = 128);

  std::size_t size() const noexcept { return values_.size(); }
  bool tree_mode() const noexcept { return tree_mode_; }
  double get(std::size_t i) const noexcept { return values_[i]; }
  double total() const noexcept;

  void push_back(double w);
  void pop_back();
  void set(std::size_t i, double w);
  void clear();

  /// Replaces every weight at once; O(n).
  void assign(const std::vector<double>& weights);

  /// Returns (i, u - prefix(i)) for the entry whose cumulative interval
  /// contains u, with u in [0, total()). Rounding overshoot falls back to the
  /// last entry with positive weight.
  std::pair<std::size_t, double> find(double u) const;

  /// Recomputes the running total / tree from the stored weights.
  void rebuild();

  /// Sum of the stored weights computed from scratch.
  double exact_total() const;

 private:
  void build_tree();
  void update_tree(std::size_t i);

  std::vector<double> values_;
  std::vector<double> tree_;
  std::size_t capacity_ = 0;
  std::size_t threshold_;
  double running_ = 0.0;
  bool tree_mode_ = false;
};

}  // namespace twolevel
