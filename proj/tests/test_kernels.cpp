#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nskrr/errors.hpp"
#include "nskrr/kernels.hpp"

using namespace nskrr;

namespace {

const Interval kDomain{0.0, 10.0};

std::vector<Kernel> shipped_kernels() {
  return {Kernel::gaussian(1.0, kDomain), Kernel::gaussian(0.3, kDomain), Kernel::spline(1, kDomain),
          Kernel::spline(2, kDomain), Kernel::periodic(10.0, 3, kDomain)};
}

Eigen::MatrixXd to_eigen(const GramMatrix& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = g(i, j);
  return m;
}

}  // namespace

TEST_CASE("gaussian kernel values") {
  const auto k = Kernel::gaussian(1.0, kDomain);
  CHECK(eval(k, 0.0, 0.0) == 1.0);
  CHECK(eval(k, 0.0, 1.0) == doctest::Approx(0.36787944).epsilon(1e-8));
  CHECK(eval(k, 3.0, 7.0) == eval(k, 7.0, 3.0));
  CHECK(eval(Kernel::gaussian(2.0, kDomain), 0.0, 2.0) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("eval rejects out-of-domain arguments") {
  const auto k = Kernel::gaussian(1.0, kDomain);
  CHECK_THROWS_AS(eval(k, -0.1, 1.0), DomainError);
  CHECK_THROWS_AS(eval(k, 1.0, 10.5), DomainError);
}

TEST_CASE("invalid kernel parameters are rejected") {
  CHECK_THROWS_AS(Kernel::gaussian(0.0, kDomain), ArgumentError);
  CHECK_THROWS_AS(Kernel::spline(3, kDomain), ArgumentError);
  CHECK_THROWS_AS(Kernel::periodic(10.0, 0, kDomain), ArgumentError);
  CHECK_THROWS_AS(Kernel::gaussian(1.0, Interval{1.0, 1.0}), ArgumentError);
}

TEST_CASE("spline and periodic closed forms") {
  const auto s1 = Kernel::spline(1, kDomain);
  CHECK(eval(s1, 2.0, 5.0) == doctest::Approx(1.2));
  const auto s2 = Kernel::spline(2, kDomain);
  // s = 0.2, t = 0.5: 1 + 0.1 + 0.04 * (1.5 - 0.2) / 6
  CHECK(eval(s2, 2.0, 5.0) == doctest::Approx(1.1 + 0.04 * 1.3 / 6.0));
  const auto p = Kernel::periodic(10.0, 2, kDomain);
  const double d = 2.0 * std::acos(-1.0) * 3.0 / 10.0;
  CHECK(eval(p, 1.0, 4.0) == doctest::Approx(1.0 + std::cos(d) + std::cos(2.0 * d) / 4.0));
}

TEST_CASE("gram examples") {
  const auto k = Kernel::gaussian(1.0, kDomain);
  const std::vector<double> one{0.0};
  const auto g1 = gram(k, one);
  CHECK(g1.size() == 1);
  CHECK(g1(0, 0) == 1.0);
  const std::vector<double> dup{0.0, 0.0};
  const auto g2 = gram(k, dup);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(g2(i, j) == 1.0);
  const std::vector<double> three{0.0, 1.0, 2.0};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(gram(k, three)));
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  CHECK_THROWS_AS(gram(k, std::vector<double>{}), ArgumentError);
  CHECK_THROWS_AS(gram(k, std::vector<double>{11.0}), DomainError);
}

TEST_CASE("random gram matrices are symmetric and PSD for every family") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (const auto& k : shipped_kernels()) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> pts(1 + rng() % 30);
      for (auto& x : pts) x = u(rng);
      const auto g = gram(k, pts);
      const auto m = to_eigen(g);
      CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
      CHECK(es.eigenvalues().minCoeff() >= -1e-10 * g.trace());
    }
  }
}

TEST_CASE("rkhs_norm_sq examples and invariants") {
  const auto k = Kernel::gaussian(1.0, kDomain);
  const std::vector<double> pts{0.5, 3.0, 7.5};
  const auto g = gram(k, pts);
  CHECK(rkhs_norm_sq(g, std::vector<double>{0, 0, 0}) == 0.0);
  CHECK(rkhs_norm_sq(gram(k, std::vector<double>{4.0}), std::vector<double>{2.0}) == doctest::Approx(4.0));
  CHECK(rkhs_norm_sq(gram(k, std::vector<double>{0.0, 0.0}), std::vector<double>{1.0, -1.0}) == 0.0);
  CHECK_THROWS_AS(rkhs_norm_sq(g, std::vector<double>{1.0}), ArgumentError);

  // Oracle c^T G c by Eigen, plus permutation invariance.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0), c(-1.0, 1.0);
  std::vector<double> p(20), w(20);
  for (auto& x : p) x = u(rng);
  for (auto& x : w) x = c(rng);
  const auto g20 = gram(k, p);
  const Eigen::Map<const Eigen::VectorXd> wv(w.data(), 20);
  const double oracle = wv.dot(to_eigen(g20) * wv);
  CHECK(rkhs_norm_sq(g20, w) == doctest::Approx(oracle).epsilon(1e-12));
  std::vector<std::size_t> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> pp(20), ww(20);
  for (std::size_t i = 0; i < 20; ++i) {
    pp[i] = p[perm[i]];
    ww[i] = w[perm[i]];
  }
  CHECK(rkhs_norm_sq(gram(k, pp), ww) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("reproducing property at grid level") {
  const auto k = Kernel::gaussian(1.0, kDomain);
  const std::vector<double> pts{1.0, 2.5, 4.0, 8.0};
  const std::vector<double> c{0.3, -1.0, 2.0, 0.5};
  const auto g = gram(k, pts);
  for (std::size_t j = 0; j < pts.size(); ++j) {
    double gc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) gc += g(j, i) * c[i];
    CHECK(weighted_sum(k, pts[j], pts, c) == doctest::Approx(gc).epsilon(1e-14));
  }
}

TEST_CASE("eval_row matches pointwise evaluation") {
  for (const auto& k : shipped_kernels()) {
    std::vector<double> pts{0.0, 0.1, 2.0, 5.5, 9.9, 10.0, 3.3};
    std::vector<double> out(pts.size());
    eval_row(k, 4.2, pts, out);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(out[i] == doctest::Approx(k(4.2, pts[i])).epsilon(1e-14));
  }
}

TEST_CASE("with_jitter adds to the diagonal only through the factor") {
  const auto k = Kernel::gaussian(1.0, kDomain);
  const auto g = gram(k, std::vector<double>{1.0, 2.0}).with_jitter(1e-3);
  CHECK(g.jitter() == 1e-3);
  CHECK(g(0, 0) == 1.0);
  CHECK(g.max_diagonal() == 1.0);
  CHECK(g.trace() == 2.0);
}
