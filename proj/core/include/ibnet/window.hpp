#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ibnet {

// Fixed-capacity history of per-weight values with running column sums
// and a count of gated entries. Backs the local-minimum detector (weight
// changes) and the link-deletion check (gated |w| - omega_min terms).
class SlidingWindow {
 public:
  SlidingWindow() = default;
  SlidingWindow(std::size_t capacity, std::size_t width);

  void push(std::span<const double> values, int gate);
  // Forgets column k (used when a slot's link is created or removed).
  void reset_column(std::size_t k);
  void clear();

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return size_; }
  bool full() const noexcept { return size_ == capacity_; }
  bool all_gated() const noexcept { return gated_ == size_; }
  std::span<const double> sums() const noexcept { return sums_; }

  // Oldest-first copy of the stored entries.
  std::vector<std::vector<double>> entries() const;
  std::vector<int> gates() const;

  // Raw access for checkpointing.
  struct Raw {
    std::size_t capacity = 0, width = 0, head = 0, size = 0, gated = 0;
    std::vector<double> ring, sums;
    std::vector<int> gates;
  };
  Raw raw() const;
  static SlidingWindow from_raw(Raw raw);

  friend bool operator==(const SlidingWindow&, const SlidingWindow&) = default;

 private:
  std::size_t capacity_ = 0;
  std::size_t width_ = 0;
  std::size_t head_ = 0;  // slot of the next write
  std::size_t size_ = 0;
  std::size_t gated_ = 0;
  std::vector<double> ring_;
  std::vector<int> gates_;
  std::vector<double> sums_;
};

}  // namespace ibnet
