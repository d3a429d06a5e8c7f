#include "wdmturbo/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace wdmturbo {
namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    // planning is not thread safe in FFTW; the mutex covers it
    auto* buf = fftw_alloc_complex(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (plan == nullptr) throw std::runtime_error("fftw plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(std::span<Complex> data, int sign) {
  if (data.empty()) return;
  fftw_plan plan = cache().get(data.size(), sign);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

}  // namespace

void fft(std::span<Complex> data) { execute(data, FFTW_FORWARD); }

void ifft(std::span<Complex> data) {
  execute(data, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

RVec fft_frequencies(std::size_t n, double sample_rate) {
  RVec f(n);
  const double df = sample_rate / static_cast<double>(n);
  const auto half = static_cast<std::ptrdiff_t>((n - 1) / 2);
  for (std::size_t k = 0; k < n; ++k) {
    auto idx = static_cast<std::ptrdiff_t>(k);
    if (idx > half) idx -= static_cast<std::ptrdiff_t>(n);
    f[k] = static_cast<double>(idx) * df;
  }
  return f;
}

}  // namespace wdmturbo
