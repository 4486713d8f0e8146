#include <cmath>

#include "nskrr/simd.hpp"

namespace nskrr::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gaussian_row(double x, const double* centers, double inv_width, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double z = (x - centers[i]) * inv_width;
    out[i] = std::exp(-(z * z));
  }
}

double gaussian_weighted_sum(double x, const double* centers, const double* weights,
                             double inv_width, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = (x - centers[i]) * inv_width;
    s += weights[i] * std::exp(-(z * z));
  }
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace nskrr::simd::scalar
