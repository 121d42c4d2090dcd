#include "twolevel/rate_index.hpp"

#include <algorithm>

namespace twolevel {

RateIndex::RateIndex(std::size_t tree_threshold) : threshold_(tree_threshold) {}

double RateIndex::total() const noexcept {
  if (tree_mode_) return tree_[1];
  return running_;
}

void RateIndex::clear() {
  values_.clear();
  tree_.clear();
  capacity_ = 0;
  running_ = 0.0;
  tree_mode_ = false;
}

void RateIndex::push_back(double w) {
  values_.push_back(w);
  if (!tree_mode_) {
    running_ += w;
    if (values_.size() > threshold_) build_tree();
    return;
  }
  if (values_.size() > capacity_) {
    build_tree();
  } else {
    update_tree(values_.size() - 1);
  }
}

void RateIndex::pop_back() {
  const double w = values_.back();
  values_.pop_back();
  if (!tree_mode_) {
    running_ -= w;
    if (values_.empty()) running_ = 0.0;
    return;
  }
  tree_[capacity_ + values_.size()] = 0.0;
  update_tree(values_.size());
  if (values_.size() < threshold_ / 2) rebuild();
}

void RateIndex::set(std::size_t i, double w) {
  if (!tree_mode_) {
    running_ += w - values_[i];
    values_[i] = w;
    return;
  }
  values_[i] = w;
  tree_[capacity_ + i] = w;
  update_tree(i);
}

void RateIndex::assign(const std::vector<double>& weights) {
  values_ = weights;
  rebuild();
}

void RateIndex::rebuild() {
  if (values_.size() > threshold_) {
    build_tree();
    return;
  }
  tree_mode_ = false;
  tree_.clear();
  capacity_ = 0;
  running_ = exact_total();
}

double RateIndex::exact_total() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

void RateIndex::build_tree() {
  tree_mode_ = true;
  capacity_ = 1;
  while (capacity_ < values_.size() * 2) capacity_ *= 2;
  tree_.assign(2 * capacity_, 0.0);
  std::copy(values_.begin(), values_.end(), tree_.begin() + static_cast<std::ptrdiff_t>(capacity_));
  for (std::size_t k = capacity_ - 1; k >= 1; --k) tree_[k] = tree_[2 * k] + tree_[2 * k + 1];
}

void RateIndex::update_tree(std::size_t i) {
  std::size_t k = capacity_ + i;
  tree_[k] = i < values_.size() ? values_[i] : 0.0;
  for (k /= 2; k >= 1; k /= 2) tree_[k] = tree_[2 * k] + tree_[2 * k + 1];
}

std::pair<std::size_t, double> RateIndex::find(double u) const {
  const std::size_t n = values_.size();
  if (!tree_mode_) {
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = values_[i];
      if (w > 0.0) {
        if (u < acc + w) return {i, u - acc};
        last_positive = i;
      }
      acc += w;
    }
    return {last_positive, std::max(0.0, values_.empty() ? 0.0 : values_[last_positive] * 0.5)};
  }
  std::size_t k = 1;
  while (k < capacity_) {
    const double left = tree_[2 * k];
    if (u < left || tree_[2 * k + 1] <= 0.0) {
      k = 2 * k;
    } else {
      u -= left;
      k = 2 * k + 1;
    }
  }
  std::size_t i = k - capacity_;
  if (i >= n || values_[i] <= 0.0) {
    // rounding pushed us onto an empty leaf; step back to a live entry
    while (i > 0 && (i >= n || values_[i] <= 0.0)) --i;
    return {i, 0.5 * values_[i]};
  }
  return {i, std::min(std::max(u, 0.0), values_[i])};
}

}  // namespace twolevel
