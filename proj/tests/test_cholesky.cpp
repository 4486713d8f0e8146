#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "nskrr/cholesky.hpp"
#include "nskrr/errors.hpp"

using namespace nskrr;

namespace {

Eigen::MatrixXd random_spd(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = z(rng);
  return b * b.transpose() + static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);
}

PackedCholesky::RowFn rows_of(const Eigen::MatrixXd& a) {
  return [&a](std::size_t i, std::span<double> row) {
    for (std::size_t j = 0; j <= i; ++j) row[j] = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
}

double max_factor_diff(const PackedCholesky& f, const Eigen::MatrixXd& l) {
  double d = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j)
      d = std::max(d, std::abs(f.row(i)[j] - l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
  return d;
}

}  // namespace

TEST_CASE("blocked factor matches Eigen LLT across block boundaries") {
  std::mt19937_64 rng(1);
  for (Eigen::Index n : {1, 2, 5, 23, 24, 25, 48, 61, 130}) {
    const auto a = random_spd(n, rng);
    const double shift = 0.5;
    auto f = PackedCholesky::factor(static_cast<std::size_t>(n), rows_of(a), shift);
    REQUIRE(f.has_value());
    const Eigen::MatrixXd shifted = a + shift * Eigen::MatrixXd::Identity(n, n);
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    const Eigen::MatrixXd l = llt.matrixL();
    CHECK(max_factor_diff(*f, l) <= 1e-10 * l.cwiseAbs().maxCoeff());

    Eigen::VectorXd b = Eigen::VectorXd::Random(n);
    std::vector<double> x(b.data(), b.data() + n);
    f->solve(x);
    const Eigen::VectorXd oracle = llt.solve(b);
    for (Eigen::Index i = 0; i < n; ++i) CHECK(x[static_cast<std::size_t>(i)] == doctest::Approx(oracle(i)).epsilon(1e-10));
  }
}

TEST_CASE("bordered appends reproduce the full factor") {
  std::mt19937_64 rng(2);
  const Eigen::Index n = 40;
  const auto a = random_spd(n, rng);
  auto f = PackedCholesky::factor(1, rows_of(a), 0.0);
  REQUIRE(f.has_value());
  for (Eigen::Index k = 1; k < n; ++k) {
    std::vector<double> row(static_cast<std::size_t>(k) + 1);
    for (Eigen::Index j = 0; j <= k; ++j) row[static_cast<std::size_t>(j)] = a(k, j);
    REQUIRE(f->append(row));
  }
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(a).matrixL();
  CHECK(max_factor_diff(*f, l) <= 1e-10 * l.cwiseAbs().maxCoeff());
}

TEST_CASE("append refuses a non-positive pivot and leaves the factor intact") {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 1.0, 1.0, 1.0;
  auto f = PackedCholesky::factor(1, rows_of(a), 0.0);
  REQUIRE(f.has_value());
  const std::vector<double> row{1.0, 1.0};
  CHECK_FALSE(f->append(row));
  CHECK(f->size() == 1);
  CHECK(f->diag(0) == 1.0);
}

TEST_CASE("triangular solves") {
  std::mt19937_64 rng(4);
  const auto a = random_spd(30, rng);
  auto f = PackedCholesky::factor(30, rows_of(a), 0.0);
  REQUIRE(f.has_value());
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(a).matrixL();
  Eigen::VectorXd b = Eigen::VectorXd::Random(30);
  std::vector<double> y(b.data(), b.data() + 30);
  f->solve_lower(y);
  const Eigen::VectorXd ly = l.triangularView<Eigen::Lower>().solve(b);
  for (int i = 0; i < 30; ++i) CHECK(y[static_cast<std::size_t>(i)] == doctest::Approx(ly(i)).epsilon(1e-12));
  f->solve_upper(y);
  const Eigen::VectorXd ux = l.transpose().triangularView<Eigen::Upper>().solve(ly);
  for (int i = 0; i < 30; ++i) CHECK(y[static_cast<std::size_t>(i)] == doctest::Approx(ux(i)).epsilon(1e-10));
}

TEST_CASE("jitter ladder") {
  const auto k = Kernel::gaussian(1.0, Interval{0.0, 10.0});
  const auto ok = cholesky(gram(k, std::vector<double>{0.0, 3.0}));
  CHECK(ok.jitter == 0.0);
  // Duplicate points make the Gram matrix exactly singular.
  const auto dup = cholesky(gram(k, std::vector<double>{1.0, 1.0, 1.0}));
  CHECK(dup.jitter > 0.0);
  CHECK(dup.jitter <= 1e-6);

  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(factor_with_jitter(2, rows_of(indefinite), 0.0, 1.0), NumericError);
}
