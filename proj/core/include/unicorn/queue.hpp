#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace unicorn {

/// Blocking FIFO with a fixed capacity. Producers block while it is full;
/// consumers block while it is empty. close() wakes everyone: further
/// pushes fail and consumers drain what is left.
template <class T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("BoundedQueue: capacity must be positive");
  }

  BoundedQueue(const BoundedQueue&) = delete;
  BoundedQueue& operator=(const BoundedQueue&) = delete;

  /// Returns false (and drops nothing) if the queue was closed.
  bool push(T item) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [this] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    ++pushed_;
    not_empty_.notify_all();
    return true;
  }

  /// Non-blocking push; false when full or closed.
  bool try_push(T item) {
    std::lock_guard lock(mutex_);
    if (closed_ || items_.size() >= capacity_) return false;
    items_.push_back(std::move(item));
    ++pushed_;
    not_empty_.notify_all();
    return true;
  }

  /// Blocks for one item; nullopt once closed and empty.
  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [this] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    ++popped_;
    not_full_.notify_all();
    return item;
  }

  /// Blocks until `n` items are available and takes them all. Returns an
  /// empty vector once the queue is closed with fewer than `n` left; those
  /// stay in the queue as residue.
  std::vector<T> pop_batch(std::size_t n) {
    if (n == 0 || n > capacity_) throw std::invalid_argument("BoundedQueue: batch size must be in [1, capacity]");
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return closed_ || items_.size() >= n; });
    std::vector<T> out;
    if (items_.size() < n) return out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(std::move(items_.front()));
      items_.pop_front();
    }
    popped_ += n;
    not_full_.notify_all();
    return out;
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
  }
  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }
  std::size_t capacity() const { return capacity_; }
  std::size_t pushed() const {
    std::lock_guard lock(mutex_);
    return pushed_;
  }
  std::size_t popped() const {
    std::lock_guard lock(mutex_);
    return popped_;
  }

 private:
  const std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  std::size_t pushed_ = 0;
  std::size_t popped_ = 0;
  bool closed_ = false;
};

}  // namespace unicorn
