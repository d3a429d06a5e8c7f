#pragma once

#include <exception>

namespace wdmturbo::detail {

// Exceptions must not escape an OpenMP region; the first one is kept and
// rethrown after the region ends.
class FirstError {
 public:
  template <typename F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
#pragma omp critical(wdmturbo_first_error)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

}  // namespace wdmturbo::detail
