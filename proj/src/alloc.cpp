#include "tucker/alloc.hpp"

namespace tucker {

std::atomic<std::size_t> AllocationTracker::current_{0};
std::atomic<std::size_t> AllocationTracker::peak_{0};

std::size_t AllocationTracker::current_bytes() noexcept {
  return current_.load(std::memory_order_relaxed);
}

std::size_t AllocationTracker::peak_bytes() noexcept {
  return peak_.load(std::memory_order_relaxed);
}

void AllocationTracker::reset_peak() noexcept {
  peak_.store(current_.load(std::memory_order_relaxed),
              std::memory_order_relaxed);
}

void AllocationTracker::record_alloc(std::size_t bytes) noexcept {
  const std::size_t now =
      current_.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  std::size_t seen = peak_.load(std::memory_order_relaxed);
  while (now > seen &&
         !peak_.compare_exchange_weak(seen, now, std::memory_order_relaxed)) {
  }
}

void AllocationTracker::record_free(std::size_t bytes) noexcept {
  current_.fetch_sub(bytes, std::memory_order_relaxed);
}

}  // namespace tucker
