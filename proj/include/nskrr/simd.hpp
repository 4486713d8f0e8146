#pragma once

// Data-parallel inner loops shared by the solver, the quadrature code and the
// kernel evaluators. Every primitive has a scalar reference implementation and
// an AVX2+FMA variant; the variant is picked once at startup from CPUID and may
// be forced with NONSTAT_KRR_SIMD=scalar|avx2 or set_backend().
//
// The variants agree to a few ulps, not bitwise: the vector reductions sum in
// a different order and the vector exp is a polynomial rather than libm.

#include <cstddef>
#include <span>
#include <string_view>

namespace nskrr::simd {

enum class Backend { scalar, avx2 };

struct KernelTable {
  Backend backend;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // out[i] = exp(-((x - centers[i]) * inv_width)^2)
  void (*gaussian_row)(double x, const double* centers, double inv_width, double* out,
                       std::size_t n);
  // sum_i weights[i] * exp(-((x - centers[i]) * inv_width)^2)
  double (*gaussian_weighted_sum)(double x, const double* centers, const double* weights,
                                  double inv_width, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

bool backend_supported(Backend b) noexcept;
std::string_view backend_name(Backend b) noexcept;

// Table for a specific backend; throws ArgumentError when the CPU lacks it.
const KernelTable& table(Backend b);

// Table currently used by the span wrappers below.
const KernelTable& active() noexcept;
Backend active_backend() noexcept;
void set_backend(Backend b);

double dot(std::span<const double> a, std::span<const double> b);
void gaussian_row(double x, std::span<const double> centers, double inv_width,
                  std::span<double> out);
double gaussian_weighted_sum(double x, std::span<const double> centers,
                             std::span<const double> weights, double inv_width);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void gaussian_row(double x, const double* centers, double inv_width, double* out, std::size_t n);
double gaussian_weighted_sum(double x, const double* centers, const double* weights,
                             double inv_width, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void gaussian_row(double x, const double* centers, double inv_width, double* out, std::size_t n);
double gaussian_weighted_sum(double x, const double* centers, const double* weights,
                             double inv_width, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
// exp over a buffer; exposed for the equivalence tests.
void exp_inplace(double* v, std::size_t n);
}  // namespace avx2

}  // namespace nskrr::simd
