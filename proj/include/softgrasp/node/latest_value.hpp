#pragma once

#include <atomic>
#include <memory>

namespace softgrasp::node {

/// Single-writer, many-reader slot holding the most recent complete value.
/// Readers copy a pointer to an immutable value, so they observe either the
/// previous or the new value, never a mixture, and never wait on the writer's
/// computation.
template <typename T>
class LatestValue {
 public:
  explicit LatestValue(T initial = T{}) : value_(std::make_shared<const T>(std::move(initial))) {}

  void publish(T value) {
    std::atomic_store_explicit(&value_, std::make_shared<const T>(std::move(value)),
                               std::memory_order_release);
  }

  T load() const { return *std::atomic_load_explicit(&value_, std::memory_order_acquire); }

 private:
  std::shared_ptr<const T> value_;
};

}  // namespace softgrasp::node
