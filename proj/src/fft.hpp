#pragma once

// Thin RAII layer over FFTW's real 2D transforms. Internal to the library.

#include <fftw3.h>

#include <complex>
#include <functional>
#include <mutex>
#include <vector>

namespace sparsedp::detail {

/// Forward real-to-complex transform of a row-major height x width grid,
/// a caller-supplied multiplier on the half spectrum, then the inverse
/// transform normalized by the pixel count.
///
/// `gain(fx, fy)` receives signed frequencies in cycles/pixel.
inline std::vector<double> filter_real_2d(
    const std::vector<double>& input, int width, int height,
    const std::function<double(double, double)>& gain) {
  // Planner calls are not thread-safe in FFTW.
  static std::mutex planner_mutex;

  const int half = width / 2 + 1;
  const std::size_t n = static_cast<std::size_t>(width) * height;
  double* real = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(static_cast<std::size_t>(height) * half);

  fftw_plan fwd, inv;
  {
    std::lock_guard lock(planner_mutex);
    fwd = fftw_plan_dft_r2c_2d(height, width, real, spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_2d(height, width, spec, real, FFTW_ESTIMATE);
  }

  std::copy(input.begin(), input.end(), real);
  fftw_execute(fwd);
  for (int ky = 0; ky < height; ++ky) {
    const int sy = ky <= height / 2 ? ky : ky - height;
    const double fy = static_cast<double>(sy) / height;
    for (int kx = 0; kx < half; ++kx) {
      const double fx = static_cast<double>(kx) / width;
      const double g = gain(fx, fy);
      auto& c = spec[static_cast<std::size_t>(ky) * half + kx];
      c[0] *= g;
      c[1] *= g;
    }
  }
  fftw_execute(inv);

  std::vector<double> out(real, real + n);
  for (double& v : out) v /= static_cast<double>(n);

  {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  fftw_free(real);
  fftw_free(spec);
  return out;
}

}  // namespace sparsedp::detail
