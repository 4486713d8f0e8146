#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "nskrr/errors.hpp"
#include "nskrr/simd.hpp"

using namespace nskrr;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(simd::backend_supported(simd::Backend::scalar));
  CHECK(simd::table(simd::Backend::scalar).backend == simd::Backend::scalar);
  CHECK(simd::backend_name(simd::Backend::scalar) == "scalar");
}

TEST_CASE("avx2 exp matches libm") {
  if (!simd::backend_supported(simd::Backend::avx2)) return;
  std::vector<double> xs;
  for (double x = -745.0; x <= 0.0; x += 0.0137) xs.push_back(x);
  xs.push_back(-708.0);
  xs.push_back(-1e-300);
  xs.push_back(0.0);
  std::vector<double> ys = xs;
  simd::avx2::exp_inplace(ys.data(), ys.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double ref = std::exp(xs[i]);
    if (xs[i] < -708.0) {
      CHECK(ys[i] <= ref + 1e-300);
      continue;
    }
    worst = std::max(worst, rel_diff(ys[i], ref));
  }
  CHECK(worst < 4e-16);
}

TEST_CASE("avx2 and scalar primitives agree on every tail length") {
  if (!simd::backend_supported(simd::Backend::avx2)) return;
  const auto& s = simd::table(simd::Backend::scalar);
  const auto& v = simd::table(simd::Backend::avx2);
  std::mt19937_64 rng(11);
  for (std::size_t n = 0; n <= 41; ++n) {
    const auto a = random_vec(n, rng, -1.0, 1.0);
    const auto b = random_vec(n, rng, -1.0, 1.0);
    const auto centers = random_vec(n, rng, 0.0, 10.0);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i]);
    CHECK(std::abs(s.dot(a.data(), b.data(), n) - v.dot(a.data(), b.data(), n)) <= 1e-15 * (1.0 + scale));

    std::vector<double> r1(n), r2(n);
    const double x = 4.3;
    s.gaussian_row(x, centers.data(), 1.0, r1.data(), n);
    v.gaussian_row(x, centers.data(), 1.0, r2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(r1[i] - r2[i]) <= 4e-16 * r1[i] + 1e-300);

    const double w1 = s.gaussian_weighted_sum(x, centers.data(), a.data(), 0.7, n);
    const double w2 = v.gaussian_weighted_sum(x, centers.data(), a.data(), 0.7, n);
    CHECK(std::abs(w1 - w2) <= 1e-14);

    std::vector<double> y1 = b, y2 = b;
    s.axpy(0.37, a.data(), y1.data(), n);
    v.axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 2.3e-16 * (std::abs(b[i]) + std::abs(a[i])));
  }
}

TEST_CASE("set_backend switches the span wrappers") {
  const auto before = simd::active_backend();
  simd::set_backend(simd::Backend::scalar);
  CHECK(simd::active_backend() == simd::Backend::scalar);
  std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  CHECK(simd::dot(a, b) == 32.0);
  if (simd::backend_supported(simd::Backend::avx2)) {
    simd::set_backend(simd::Backend::avx2);
    CHECK(simd::dot(a, b) == 32.0);
  }
  simd::set_backend(before);
}

TEST_CASE("span wrappers reject length mismatches") {
  std::vector<double> a{1, 2, 3}, b{4, 5};
  CHECK_THROWS_AS(simd::dot(a, b), ArgumentError);
  std::vector<double> out(2);
  CHECK_THROWS_AS(simd::gaussian_row(0.0, a, 1.0, out), ArgumentError);
  CHECK_THROWS_AS(simd::axpy(1.0, a, out), ArgumentError);
}
