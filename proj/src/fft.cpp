#include "fft.hpp"

#include <cstring>
#include <mutex>

#include <fftw3.h>

namespace mmfmd::detail {
namespace {
// FFTW planning is not thread-safe; execution is.
std::mutex g_plan_mutex;
}

void fft2d(std::vector<std::complex<double>>& data, std::size_t side, bool inverse) {
  const auto n = static_cast<int>(side);
  auto* buf = reinterpret_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * data.size()));
  fftw_plan plan;
  {
    std::lock_guard lock(g_plan_mutex);
    plan = fftw_plan_dft_2d(n, n, buf, buf, inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                            FFTW_ESTIMATE);
  }
  std::memcpy(buf, data.data(), sizeof(fftw_complex) * data.size());
  fftw_execute(plan);
  std::memcpy(static_cast<void*>(data.data()), buf, sizeof(fftw_complex) * data.size());
  {
    std::lock_guard lock(g_plan_mutex);
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}

}  // namespace mmfmd::detail
