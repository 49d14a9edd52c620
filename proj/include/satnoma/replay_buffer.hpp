#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "satnoma/rng.hpp"

namespace satnoma {

// One environment step as stored for training: flat per-entity arrays laid
// out entity-major (entity e occupies [e*dim, (e+1)*dim)). Rewards are kept
// per entity so any agent grouping can sum its own slice.
struct Transition {
  std::vector<double> obs;
  std::vector<double> actions;
  std::vector<double> rewards;
  std::vector<double> next_obs;
};

// Bounded FIFO experience store with uniform without-replacement sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
  }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }

  void push(Transition t) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(t));
    } else {
      data_[head_] = std::move(t);  // overwrite the oldest entry
      head_ = (head_ + 1) % capacity_;
    }
  }

  const Transition& at(std::size_t i) const { return data_.at(i); }

  // Uniform sample of `batch` distinct indices (Floyd's algorithm), returned
  // as references into the buffer. Sampling with batch == size() yields every
  // stored transition exactly once.
  std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const {
    if (batch > data_.size())
      throw std::invalid_argument("ReplayBuffer::sample: batch exceeds stored count");
    std::vector<std::size_t> picked;
    picked.reserve(batch);
    for (std::size_t i = data_.size() - batch; i < data_.size(); ++i) {
      const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
      bool seen = false;
      for (std::size_t p : picked)
        if (p == j) { seen = true; break; }
      picked.push_back(seen ? i : j);
    }
    std::vector<const Transition*> out;
    out.reserve(batch);
    for (std::size_t p : picked) out.push_back(&data_[p]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next eviction slot once full
  std::vector<Transition> data_;
};

}  // namespace satnoma
