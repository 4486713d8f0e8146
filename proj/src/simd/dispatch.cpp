#include <atomic>
#include <cstdlib>
#include <string>

#include "nskrr/errors.hpp"
#include "nskrr/simd.hpp"

namespace nskrr::simd {
namespace {

constexpr KernelTable kScalarTable{Backend::scalar, &scalar::dot, &scalar::gaussian_row,
                                   &scalar::gaussian_weighted_sum, &scalar::axpy};

#if defined(NSKRR_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Backend::avx2, &avx2::dot, &avx2::gaussian_row,
                                 &avx2::gaussian_weighted_sum, &avx2::axpy};
#endif

bool cpu_has_avx2() noexcept {
#if defined(NSKRR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() noexcept {
  const char* env = std::getenv("NONSTAT_KRR_SIMD");
  if (env != nullptr && std::string(env) == "scalar") return &kScalarTable;
#if defined(NSKRR_HAVE_AVX2)
  if (cpu_has_avx2()) return &kAvx2Table;
#endif
  return &kScalarTable;
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> t{initial_table()};
  return t;
}

void check_len(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ArgumentError(std::string(what) + ": length mismatch");
}

}  // namespace

bool backend_supported(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
      return cpu_has_avx2();
  }
  return false;
}

std::string_view backend_name(Backend b) noexcept {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

const KernelTable& table(Backend b) {
  if (!backend_supported(b)) {
    throw ArgumentError("SIMD backend not supported on this CPU: " + std::string(backend_name(b)));
  }
#if defined(NSKRR_HAVE_AVX2)
  if (b == Backend::avx2) return kAvx2Table;
#endif
  return kScalarTable;
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

Backend active_backend() noexcept { return active().backend; }

void set_backend(Backend b) { current().store(&table(b), std::memory_order_release); }

double dot(std::span<const double> a, std::span<const double> b) {
  check_len(a.size(), b.size(), "dot");
  return active().dot(a.data(), b.data(), a.size());
}

void gaussian_row(double x, std::span<const double> centers, double inv_width,
                  std::span<double> out) {
  check_len(centers.size(), out.size(), "gaussian_row");
  active().gaussian_row(x, centers.data(), inv_width, out.data(), centers.size());
}

double gaussian_weighted_sum(double x, std::span<const double> centers,
                             std::span<const double> weights, double inv_width) {
  check_len(centers.size(), weights.size(), "gaussian_weighted_sum");
  return active().gaussian_weighted_sum(x, centers.data(), weights.data(), inv_width,
                                        centers.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_len(x.size(), y.size(), "axpy");
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace nskrr::simd
