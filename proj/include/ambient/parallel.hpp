#pragma once

#include <exception>
#include <mutex>

namespace ambient {

// 0 leaves the OpenMP default untouched.
void set_thread_count(int threads);
int thread_count();

// Exceptions must not leave an OpenMP region; workers park the first one
// here and the caller rethrows after the loop.
class ErrorSlot {
 public:
  void capture() noexcept {
    std::lock_guard lock(mu_);
    if (!err_) err_ = std::current_exception();
  }
  void rethrow_if_set() const {
    if (err_) std::rethrow_exception(err_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr err_;
};

}  // namespace ambient
