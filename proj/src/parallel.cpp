#include "bowen_press/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace bowen {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::scoped_lock lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

int default_thread_count() {
  if (const char* env = std::getenv("BOWEN_PRESS_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void LogSum::add(double log_term) {
  if (log_term == -std::numeric_limits<double>::infinity()) return;
  if (std::isinf(log_term) || std::isnan(log_term)) {
    max_ = std::numeric_limits<double>::infinity();
    return;
  }
  if (max_ == std::numeric_limits<double>::infinity()) return;
  if (log_term > max_) {
    const double scale = std::exp(max_ - log_term);
    sum_ *= scale;
    comp_ *= scale;
    max_ = log_term;
  }
  const double x = std::exp(log_term - max_);
  const double s = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - s) + x;
  else
    comp_ += (x - s) + sum_;
  sum_ = s;
}

double LogSum::log() const {
  if (max_ == -std::numeric_limits<double>::infinity()) return max_;
  if (max_ == std::numeric_limits<double>::infinity()) return max_;
  return max_ + std::log(sum_ + comp_);
}

}  // namespace bowen
