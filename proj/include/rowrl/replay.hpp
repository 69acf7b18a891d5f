#pragma once

#include <array>
#include <unordered_set>
#include <vector>

#include "rowrl/common.hpp"

namespace rowrl {

struct TransitionTuple {
  std::array<double, 2> s{};
  double a = 0.0;
  double r = 0.0;
  std::array<double, 2> s_next{};
  bool terminal = false;
};

// Fixed-capacity ring of transitions with uniform without-replacement sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw DomainError("ReplayBuffer: zero capacity");
    data_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return data_.size() < capacity_ ? data_.size() : capacity_; }
  bool can_sample(std::size_t count) const { return size() >= count; }
  const TransitionTuple& at(std::size_t i) const { return data_[i]; }

  void store(const TransitionTuple& t) {
    if (data_.size() < capacity_) {
      data_.push_back(t);
    } else {
      data_[cursor_] = t;  // evict the oldest
      cursor_ = (cursor_ + 1) % capacity_;
    }
  }

  // Uniform sample without replacement; empty result signals "skip this step".
  std::vector<TransitionTuple> sample(std::size_t count,
                                      std::mt19937_64& rng) const {
    std::vector<TransitionTuple> out;
    const std::size_t n = size();
    if (n < count) return out;
    out.reserve(count);
    // Floyd's subset sampling, O(count) independent of population
    std::unordered_set<std::size_t> chosen;
    for (std::size_t j = n - count; j < n; ++j) {
      const std::size_t t = rng() % (j + 1);
      const std::size_t pick = chosen.insert(t).second ? t : j;
      if (pick != t) chosen.insert(pick);
      out.push_back(data_[pick]);
    }
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<TransitionTuple> data_;
};

}  // namespace rowrl
