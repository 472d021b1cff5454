#include "cycdet/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "cycdet/error.hpp"

namespace cycdet::fft {
namespace {

// FFTW planning is not thread-safe, execution with new-array functions is.
// Plans are built once per (size, direction) with FFTW_ESTIMATE so the chosen
// algorithm, and therefore the rounding, never varies between runs.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, bool forward) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, forward);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* real = fftw_alloc_real(static_cast<std::size_t>(n));
    auto* cplx = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = forward ? fftw_plan_dft_r2c_1d(n, real, cplx, flags)
                             : fftw_plan_dft_c2r_1d(n, cplx, real, flags);
    fftw_free(real);
    fftw_free(cplx);
    if (plan == nullptr) throw NumericError("fftw: failed to create plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, bool>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

std::vector<std::complex<double>> forward_real(std::span<const double> x) {
  const auto n = x.size();
  if (n == 0) throw ConfigError("fft: empty input");
  std::vector<double> in(x.begin(), x.end());
  std::vector<std::complex<double>> out(n);
  fftw_execute_dft_r2c(cache().get(static_cast<int>(n), true), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  for (std::size_t k = n / 2 + 1; k < n; ++k) out[k] = std::conj(out[n - k]);
  return out;
}

std::vector<double> inverse_real(std::span<const std::complex<double>> spectrum) {
  const auto n = spectrum.size();
  if (n == 0) throw ConfigError("fft: empty input");
  // c2r overwrites its input.
  std::vector<std::complex<double>> in(spectrum.begin(), spectrum.begin() + (n / 2 + 1));
  std::vector<double> out(n);
  fftw_execute_dft_c2r(cache().get(static_cast<int>(n), false),
                       reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace cycdet::fft
