#include "ibnet/window.hpp"

#include <algorithm>

#include "ibnet/error.hpp"

namespace ibnet {

SlidingWindow::SlidingWindow(std::size_t capacity, std::size_t width)
    : capacity_(capacity), width_(width), ring_(capacity * width, 0.0), gates_(capacity, 0), sums_(width, 0.0) {
  if (capacity == 0) throw ContractError("sliding window needs a positive capacity");
}

void SlidingWindow::push(std::span<const double> values, int gate) {
  if (values.size() != width_) throw ContractError("sliding window entry has the wrong width");
  double* slot = ring_.data() + head_ * width_;
  if (size_ == capacity_) {
    for (std::size_t k = 0; k < width_; ++k) sums_[k] -= slot[k];
    gated_ -= static_cast<std::size_t>(gates_[head_]);
  } else {
    ++size_;
  }
  std::copy(values.begin(), values.end(), slot);
  for (std::size_t k = 0; k < width_; ++k) sums_[k] += values[k];
  gates_[head_] = gate != 0 ? 1 : 0;
  gated_ += static_cast<std::size_t>(gates_[head_]);
  head_ = (head_ + 1) % capacity_;
}

void SlidingWindow::reset_column(std::size_t k) {
  for (std::size_t e = 0; e < capacity_; ++e) ring_[e * width_ + k] = 0.0;
  sums_[k] = 0.0;
}

void SlidingWindow::clear() {
  std::fill(ring_.begin(), ring_.end(), 0.0);
  std::fill(gates_.begin(), gates_.end(), 0);
  std::fill(sums_.begin(), sums_.end(), 0.0);
  head_ = size_ = gated_ = 0;
}

std::vector<std::vector<double>> SlidingWindow::entries() const {
  std::vector<std::vector<double>> out;
  out.reserve(size_);
  const std::size_t start = (head_ + capacity_ - size_) % capacity_;
  for (std::size_t i = 0; i < size_; ++i) {
    const double* e = ring_.data() + ((start + i) % capacity_) * width_;
    out.emplace_back(e, e + width_);
  }
  return out;
}

std::vector<int> SlidingWindow::gates() const {
  std::vector<int> out;
  const std::size_t start = (head_ + capacity_ - size_) % capacity_;
  for (std::size_t i = 0; i < size_; ++i) out.push_back(gates_[(start + i) % capacity_]);
  return out;
}

SlidingWindow::Raw SlidingWindow::raw() const {
  return Raw{capacity_, width_, head_, size_, gated_, ring_, sums_, gates_};
}

SlidingWindow SlidingWindow::from_raw(Raw raw) {
  if (raw.capacity == 0) {
    if (raw.width != 0 || !raw.ring.empty() || !raw.sums.empty() || !raw.gates.empty() || raw.size != 0) {
      throw ContractError("inconsistent sliding window data");
    }
    return SlidingWindow{};
  }
  if (raw.ring.size() != raw.capacity * raw.width || raw.sums.size() != raw.width ||
      raw.gates.size() != raw.capacity || raw.head >= raw.capacity || raw.size > raw.capacity ||
      raw.gated > raw.size) {
    throw ContractError("inconsistent sliding window data");
  }
  SlidingWindow w;
  w.capacity_ = raw.capacity;
  w.width_ = raw.width;
  w.head_ = raw.head;
  w.size_ = raw.size;
  w.gated_ = raw.gated;
  w.ring_ = std::move(raw.ring);
  w.sums_ = std::move(raw.sums);
  w.gates_ = std::move(raw.gates);
  return w;
}

}  // namespace ibnet
