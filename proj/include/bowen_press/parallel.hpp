#pragma once

#include <cstddef>
#include <functional>
#include <limits>

namespace bowen {

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index must write only its own output slot.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

/// Thread count from the BOWEN_PRESS_THREADS environment variable, or 1.
int default_thread_count();

/// Streaming log-sum-exp with Neumaier compensation. Result depends only on the order of add() calls.
class LogSum {
 public:
  void add(double log_term);
  double log() const;

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace bowen
