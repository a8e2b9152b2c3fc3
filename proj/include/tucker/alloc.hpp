#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <vector>

namespace tucker {

/// Process-wide high-water-mark accounting for numeric buffers.
///
/// Every tensor/matrix buffer in this library allocates through
/// TrackedAllocator, so peak_bytes() is an honest measure of the largest
/// numeric working set held at any one time. Counters are atomic; the peak is
/// maintained with a compare-exchange loop so concurrent allocations never
/// lose a high-water mark.
class AllocationTracker {
public:
  static std::size_t current_bytes() noexcept;
  static std::size_t peak_bytes() noexcept;

  /// Restart peak tracking from the currently live total.
  static void reset_peak() noexcept;

  static void record_alloc(std::size_t bytes) noexcept;
  static void record_free(std::size_t bytes) noexcept;

private:
  static std::atomic<std::size_t> current_;
  static std::atomic<std::size_t> peak_;
};

/// std::allocator shim that reports every allocation to AllocationTracker.
template <class T>
struct TrackedAllocator {
  using value_type = T;

  TrackedAllocator() noexcept = default;
  template <class U>
  TrackedAllocator(const TrackedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    AllocationTracker::record_alloc(n * sizeof(T));
    return std::allocator<T>{}.allocate(n);
  }

  void deallocate(T* p, std::size_t n) noexcept {
    AllocationTracker::record_free(n * sizeof(T));
    std::allocator<T>{}.deallocate(p, n);
  }

  template <class U>
  bool operator==(const TrackedAllocator<U>&) const noexcept {
    return true;
  }
};

/// Contiguous 64-bit float storage with tracked allocation.
using TrackedVector = std::vector<double, TrackedAllocator<double>>;

}  // namespace tucker
