#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "nskrr/errors.hpp"
#include "nskrr/krr.hpp"
#include "nskrr/operator.hpp"

using namespace nskrr;

namespace {

const Interval kDomain{0.0, 10.0};
const Kernel kGauss = Kernel::gaussian(1.0, kDomain);

StepFunction paper_h() { return StepFunction({{{0.0, 2.0}, 1.0}, {{8.0, 10.0}, 0.3}}, kDomain); }

Dataset make_data(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 10.0), y(-1.0, 1.0);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    d.inputs.push_back(u(rng));
    d.outputs.push_back(y(rng));
  }
  return d;
}

// Dense oracle: (G + t gamma I) c = y by Eigen.
Eigen::VectorXd dense_solve(const Dataset& d, const Kernel& k, double gamma) {
  const auto n = static_cast<Eigen::Index>(d.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = k(d.inputs[i], d.inputs[j]);
  a.diagonal().array() += static_cast<double>(n) * gamma;
  return a.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(d.outputs.data(), n));
}

double coeff_diff(const KrrModel& a, const KrrModel& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.coeffs()[i] - b.coeffs()[i]));
  return d;
}

double norm(std::span<const double> v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

}  // namespace

TEST_CASE("gamma schedule") {
  const GammaSchedule s(0.01, 0.25);
  CHECK(gamma_at(s, 1) == 0.01);
  CHECK(std::abs(gamma_at(s, 3000) - 1.3513e-3) < 1e-7);
  CHECK(gamma_at(s, 3000) == doctest::Approx(0.01 / std::pow(3000.0, 0.25)).epsilon(1e-15));
  CHECK_THROWS_AS(GammaSchedule(0.01, 0.5), ArgumentError);
  CHECK_THROWS_AS(GammaSchedule(0.01, 0.0), ArgumentError);
  CHECK_THROWS_AS(GammaSchedule(0.01, 0.6), ArgumentError);
  CHECK_THROWS_AS(GammaSchedule(0.0, 0.25), ArgumentError);
  CHECK_THROWS_AS(gamma_at(s, 0), ArgumentError);
  try {
    GammaSchedule(0.01, 0.6);
  } catch (const ArgumentError& e) {
    CHECK(std::string(e.what()).find("0 < alpha < 1/2") != std::string::npos);
  }
}

TEST_CASE("scalar fits") {
  const auto m = fit({0.0}, {1.0}, kGauss, 1.0);
  CHECK(m.coeffs()[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(predict(m, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  const auto interp = fit({0.0}, {1.0}, kGauss, 1e-12);
  CHECK(predict(interp, 0.0) == doctest::Approx(1.0).epsilon(1e-11));
  CHECK_THROWS_AS(fit(std::vector<double>{}, std::vector<double>{}, kGauss, 1.0), ArgumentError);
  CHECK_THROWS_AS(fit({0.0, 1.0}, {1.0}, kGauss, 1.0), ArgumentError);
  CHECK_THROWS_AS(fit({0.0}, {1.0}, kGauss, 0.0), ArgumentError);
  CHECK_THROWS_AS(fit({11.0}, {1.0}, kGauss, 1.0), DomainError);
}

TEST_CASE("noiseless fit of the regression function") {
  const QuadratureGrid g(kDomain, 2001);
  const auto expansion = regression_expansion(kGauss, paper_h(), g);
  const auto mu = build_regression_function(kGauss, paper_h(), g);
  Dataset d;
  for (int i = 0; i < 20; ++i) {
    const double x = 10.0 * i / 19.0;
    d.inputs.push_back(x);
    d.outputs.push_back(expansion(x));
  }
  const auto m = fit(d, kGauss, 1e-6);
  const auto oracle = dense_solve(d, kGauss, 1e-6);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(m.coeffs()[i] == doctest::Approx(oracle(i)).epsilon(1e-6));
  CHECK(sup_error(m, mu) < 0.05);
}

TEST_CASE("predict") {
  const auto zero = fit({1.0, 4.0}, {0.0, 0.0}, kGauss, 0.1);
  for (double x : {0.0, 2.5, 10.0}) CHECK(predict(zero, x) == 0.0);
  const auto one = fit({2.0}, {3.0}, kGauss, 0.1);
  CHECK(std::abs(predict(one, 8.0)) <= std::abs(one.coeffs()[0]) * std::exp(-36.0));
  std::mt19937_64 rng(1);
  const auto d = make_data(15, rng);
  const auto m = fit(d, kGauss, 0.01);
  const auto gm = gram(kGauss, d.inputs);
  for (std::size_t j = 0; j < d.size(); ++j) {
    double gc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) gc += gm(j, i) * m.coeffs()[i];
    CHECK(predict(m, d.inputs[j]) == doctest::Approx(gc).epsilon(1e-13));
  }
  CHECK_THROWS_AS(predict(m, -1.0), DomainError);
  CHECK(predict(KrrModel::empty(kGauss, 0.1), 3.0) == 0.0);
}

TEST_CASE("normal-equation residual at fit time") {
  std::mt19937_64 rng(2);
  for (std::size_t n : {1u, 5u, 50u, 300u}) {
    for (double gamma : {1e-1, 1e-4, 1e-7}) {
      const auto d = make_data(n, rng);
      const auto m = fit(d, kGauss, gamma);
      CHECK(m.jitter() == 0.0);
      CHECK(normal_equation_residual(m) <= 1e-10 * norm(d.outputs));
    }
  }
}

TEST_CASE("extend: base case, batch equivalence and stale shift") {
  std::mt19937_64 rng(3);
  SUBCASE("empty model") {
    const auto m = extend(KrrModel::empty(kGauss, 0.3), 2.0, 1.5, 0.3);
    const auto b = fit({2.0}, {1.5}, kGauss, 0.3);
    CHECK(m.size() == 1);
    CHECK(m.coeffs()[0] == b.coeffs()[0]);
  }
  SUBCASE("schedule-driven extends match batch fits") {
    const GammaSchedule s(0.01, 0.25);
    for (int trial = 0; trial < 5; ++trial) {
      const auto d = make_data(200, rng);
      auto m = KrrModel::empty(kGauss, gamma_at(s, 1));
      for (std::size_t i = 0; i < d.size(); ++i) {
        m = extend(std::move(m), d.inputs[i], d.outputs[i], gamma_at(s, i + 1));
        if ((i + 1) % 40 != 0) continue;
        const Dataset prefix{{d.inputs.begin(), d.inputs.begin() + i + 1}, {d.outputs.begin(), d.outputs.begin() + i + 1}};
        CHECK(coeff_diff(m, fit(prefix, kGauss, m.gamma())) < 1e-8);
      }
    }
  }
  SUBCASE("fixed shift takes the bordered path") {
    const auto d = make_data(60, rng);
    const double shift = 0.05;
    auto m = fit({d.inputs[0]}, {d.outputs[0]}, kGauss, shift);
    for (std::size_t i = 1; i < d.size(); ++i) {
      m = extend(m, d.inputs[i], d.outputs[i], shift / static_cast<double>(i + 1));
      CHECK(m.shift() == shift);
      CHECK_FALSE(m.stale_shift());
    }
    CHECK(coeff_diff(m, fit(d, kGauss, shift / 60.0)) < 1e-8);
  }
  SUBCASE("a shift within tolerance is kept and recorded") {
    const auto d = make_data(30, rng);
    const Dataset head{{d.inputs.begin(), d.inputs.end() - 1}, {d.outputs.begin(), d.outputs.end() - 1}};
    const auto m0 = fit(head, kGauss, 0.01);
    const double requested = 0.01 * 29.0 / 30.0 * (1.0 + 5e-4);
    const auto m = extend(m0, d.inputs.back(), d.outputs.back(), requested);
    CHECK(m.stale_shift());
    CHECK(m.requested_gamma() == requested);
    CHECK(m.shift() == m0.shift());
    CHECK(m.gamma() == doctest::Approx(m0.shift() / 30.0).epsilon(1e-15));
    CHECK(coeff_diff(m, fit(d, kGauss, m.gamma())) < 1e-8);
  }
  SUBCASE("a large change refactors at the requested gamma") {
    const auto d = make_data(30, rng);
    const Dataset head{{d.inputs.begin(), d.inputs.end() - 1}, {d.outputs.begin(), d.outputs.end() - 1}};
    const auto m = extend(fit(head, kGauss, 0.01), d.inputs.back(), d.outputs.back(), 0.002);
    CHECK(m.gamma() == 0.002);
    CHECK_FALSE(m.stale_shift());
    CHECK(coeff_diff(m, fit(d, kGauss, 0.002)) < 1e-8);
  }
  SUBCASE("duplicate input with the same output") {
    const auto d = make_data(20, rng);
    const double shift = 0.2;
    const auto m = fit(d, kGauss, shift / 20.0);
    const auto m2 = extend(m, d.inputs[7], d.outputs[7], shift / 21.0);
    Dataset dd = d;
    dd.inputs.push_back(d.inputs[7]);
    dd.outputs.push_back(d.outputs[7]);
    const auto oracle = fit(dd, kGauss, shift / 21.0);
    CHECK(coeff_diff(m2, oracle) < 1e-8);
    CHECK(std::abs(predict(m2, d.inputs[7]) - predict(oracle, d.inputs[7])) < 1e-8);
  }
}

TEST_CASE("extend matches batch on 50 random datasets") {
  std::mt19937_64 rng(4);
  const GammaSchedule s(0.01, 0.25);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = make_data(1 + rng() % 50, rng);
    auto m = KrrModel::empty(kGauss, gamma_at(s, 1));
    for (std::size_t i = 0; i < d.size(); ++i) m = extend(std::move(m), d.inputs[i], d.outputs[i], gamma_at(s, i + 1));
    CHECK(coeff_diff(m, fit(d, kGauss, m.gamma())) < 1e-8);
  }
}

TEST_CASE("stream snapshots match batch fits after retuning") {
  std::mt19937_64 rng(5);
  const auto d = make_data(400, rng);
  KrrStream stream(kGauss, 0.01);
  for (std::size_t i = 0; i < d.size(); ++i) {
    stream.push(d.inputs[i], d.outputs[i]);
    if ((i + 1) % 100 != 0) continue;
    const double gamma = 0.01 / std::pow(static_cast<double>(i + 1), 0.25);
    stream.retune(gamma);
    const auto m = stream.snapshot();
    CHECK(m.gamma() == gamma);
    const Dataset prefix{{d.inputs.begin(), d.inputs.begin() + i + 1}, {d.outputs.begin(), d.outputs.begin() + i + 1}};
    CHECK(coeff_diff(m, fit(prefix, kGauss, gamma)) < 1e-8);
  }
}

TEST_CASE("objective") {
  std::mt19937_64 rng(6);
  const auto d = make_data(25, rng);
  std::vector<double> zero(d.size(), 0.0);
  double ms = 0.0;
  for (double y : d.outputs) ms += y * y;
  CHECK(objective(d, kGauss, 0.1, zero) == doctest::Approx(ms / 25.0).epsilon(1e-14));
  CHECK_THROWS_AS(objective(d, kGauss, 0.1, std::vector<double>(3)), ArgumentError);

  const auto m = fit(d, kGauss, 0.01);
  const std::vector<double> c(m.coeffs().begin(), m.coeffs().end());
  const double best = objective(d, kGauss, 0.01, c);
  std::normal_distribution<double> z;
  for (int k = 0; k < 100; ++k) {
    std::vector<double> dir(c.size());
    for (auto& v : dir) v = z(rng);
    const double nd = norm(dir);
    std::vector<double> moved = c;
    for (std::size_t i = 0; i < c.size(); ++i) moved[i] += 1e-3 * dir[i] / nd;
    CHECK(best <= objective(d, kGauss, 0.01, moved));
  }

  // Interpolation on well-separated points: G c = y leaves no residual.
  Dataset sep;
  for (double x : {0.5, 3.0, 5.5, 8.0}) {
    sep.inputs.push_back(x);
    sep.outputs.push_back(std::sin(x));
  }
  const auto gm = gram(kGauss, sep.inputs);
  Eigen::MatrixXd a(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = gm(i, j);
  const Eigen::VectorXd ci = a.lu().solve(Eigen::Map<const Eigen::VectorXd>(sep.outputs.data(), 4));
  CHECK(objective(sep, kGauss, 0.0, std::vector<double>(ci.data(), ci.data() + 4)) < 1e-28);
}

TEST_CASE("shrinkage and permutation invariance") {
  std::mt19937_64 rng(7);
  const auto d = make_data(40, rng);
  const auto gm = gram(kGauss, d.inputs);
  double prev = std::numeric_limits<double>::infinity();
  for (double gamma : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
    const double v = rkhs_norm_sq(gm, fit(d, kGauss, gamma).coeffs());
    CHECK(v <= prev + 1e-12);
    prev = v;
  }

  std::vector<std::size_t> perm(d.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Dataset p;
  for (auto i : perm) {
    p.inputs.push_back(d.inputs[i]);
    p.outputs.push_back(d.outputs[i]);
  }
  const auto a = fit(d, kGauss, 0.001);
  const auto b = fit(p, kGauss, 0.001);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int k = 0; k < 100; ++k) {
    const double x = u(rng);
    CHECK(std::abs(predict(a, x) - predict(b, x)) < 1e-10);
  }
}

TEST_CASE("sup_error") {
  const QuadratureGrid g(kDomain, 2001);
  const auto mu = build_regression_function(kGauss, paper_h(), g);
  const auto zero = fit({5.0}, {0.0}, kGauss, 1.0);
  CHECK(sup_error(zero, mu) == doctest::Approx(mu.sup_norm()).epsilon(1e-15));
  // Peak of int_0^2 exp(-(x - a)^2) da sits at x = 1.
  CHECK(mu.sup_norm() == doctest::Approx(std::sqrt(std::acos(-1.0)) * std::erf(1.0)).epsilon(1e-9));
  double right = 0.0;
  for (std::size_t i = 0; i < g.count(); ++i) {
    if (g.nodes()[i] >= 6.0) right = std::max(right, std::abs(mu[i]));
  }
  CHECK(sup_error(zero, mu, Interval{6.0, 10.0}) == right);

  std::mt19937_64 rng(8);
  const auto e = regression_expansion(kGauss, paper_h(), g);
  Dataset d;
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    d.inputs.push_back(u(rng));
    d.outputs.push_back(e(d.inputs.back()));
  }
  const auto m = fit(d, kGauss, 1e-4);
  const QuadratureGrid fine(kDomain, 4001);
  const auto mu_fine = build_regression_function(kGauss, paper_h(), fine);
  CHECK(std::abs(sup_error(m, mu) - sup_error(m, mu_fine)) < 1e-3);
}
