#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>

namespace sparsedp {

/// Sample Pearson correlation. Empty when either input has zero variance or
/// fewer than two samples.
inline std::optional<double> pearson(std::span<const double> a,
                                     std::span<const double> b) {
  const std::size_t n = a.size();
  if (n < 2 || b.size() != n) return std::nullopt;
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  const double r = sab / std::sqrt(saa * sbb);
  return r > 1.0 ? 1.0 : (r < -1.0 ? -1.0 : r);
}

}  // namespace sparsedp
