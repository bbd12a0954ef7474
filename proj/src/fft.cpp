#include "lopashka/fft.hpp"

#include <mutex>

#include <fftw3.h>

#include "lopashka/error.hpp"

namespace lopashka {

namespace {
std::mutex g_plan_mutex;  // FFTW planning is not thread-safe
}

void fft_many(std::vector<Complex>& data, const std::vector<int>& dims, std::size_t inner, bool inverse) {
  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d);
  if (total * inner != data.size()) throw Error(ErrorKind::Dimension, "fft_many: array size mismatch");
  if (total == 0 || inner == 0) return;
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    plan = fftw_plan_many_dft(static_cast<int>(dims.size()), dims.data(), static_cast<int>(inner), ptr,
                              dims.data(), static_cast<int>(inner), 1, ptr, dims.data(),
                              static_cast<int>(inner), 1, inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                              FFTW_ESTIMATE);
  }
  if (!plan) throw Error(ErrorKind::Numerical, "FFTW planning failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    fftw_destroy_plan(plan);
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(total);
    for (auto& v : data) v *= scale;
  }
}

}  // namespace lopashka
