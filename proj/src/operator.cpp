#include "nskrr/operator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "nskrr/errors.hpp"

namespace nskrr {
namespace {

void require_same_support(const Interval& a, const Interval& b, const char* what) {
  if (!(a == b)) throw ArgumentError(std::string(what) + ": supports differ");
}

Eigen::MatrixXd kernel_matrix(const Kernel& k, std::span<const double> nodes) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd m(n, n);
  std::vector<double> row(nodes.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    eval_row(k, nodes[static_cast<std::size_t>(i)], nodes, row);
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return m;
}

}  // namespace

double KernelExpansion::operator()(double x) const {
  if (!kernel.domain().contains(x)) throw DomainError("kernel expansion evaluated outside its domain");
  if (nodes.empty()) return 0.0;
  return weighted_sum(kernel, x, nodes, weights);
}

KernelExpansion regression_expansion(const Kernel& k, const StepFunction& h,
                                     const QuadratureGrid& grid) {
  require_same_support(k.domain(), grid.support(), "regression_expansion");
  require_same_support(h.support(), grid.support(), "regression_expansion");
  KernelExpansion e{k, {}, {}};
  for (const auto& piece : h.pieces()) {
    if (piece.value == 0.0) continue;
    const auto rule = simpson_rule(piece.interval.lo, piece.interval.hi, grid.spacing());
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      e.nodes.push_back(rule.nodes[j]);
      e.weights.push_back(piece.value * rule.weights[j]);
    }
  }
  return e;
}

GridFunction build_regression_function(const Kernel& k, const StepFunction& h,
                                       const QuadratureGrid& grid) {
  const auto e = regression_expansion(k, h, grid);
  const auto nodes = grid.nodes();
  std::vector<double> v(grid.count(), 0.0);
  if (!e.nodes.empty()) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = weighted_sum(k, nodes[i], e.nodes, e.weights);
  }
  return GridFunction(grid, std::move(v));
}

GridFunction density_on_grid(const Density& p, const QuadratureGrid& grid) {
  require_same_support(p.support(), grid.support(), "density_on_grid");
  const auto nodes = grid.nodes();
  const std::size_t n = nodes.size();
  std::vector<double> v(n);
  std::vector<Jump> jumps;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      v[i] = p.pdf_right(nodes[i]);
    } else if (i + 1 == n) {
      v[i] = p.pdf_left(nodes[i]);
    } else {
      v[i] = p.pdf(nodes[i]);
      if (QuadratureGrid::is_panel_boundary(i)) {
        const double l = p.pdf_left(nodes[i]);
        const double r = p.pdf_right(nodes[i]);
        if (l != r) jumps.push_back({i, l, r});
      }
    }
  }
  return GridFunction(grid, std::move(v), std::move(jumps));
}

GridFunction divide_by_density(const GridFunction& f, const Density& p) {
  const auto pg = density_on_grid(p, f.grid());
  return combine(f, pg, [](double a, double b) {
    if (b > 0.0) return a / b;
    if (a == 0.0) return 0.0;
    throw SingularityError("density vanishes where the numerator does not");
  });
}

std::vector<double> effective_weights(const GridFunction& g) {
  const auto w = g.grid().weights();
  const auto v = g.values();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = w[i] * v[i];
  const double end_weight = g.grid().spacing() / 3.0;
  const std::size_t last = v.size() - 1;
  for (const auto& j : g.jumps()) {
    if (j.index > 0) out[j.index] += end_weight * (j.left - v[j.index]);
    if (j.index < last) out[j.index] += end_weight * (j.right - v[j.index]);
  }
  return out;
}

GridFunction apply_operator(const Kernel& k, const Density& p, const GridFunction& f) {
  require_same_support(k.domain(), f.grid().support(), "apply_operator");
  const auto integrand = f * density_on_grid(p, f.grid());
  const auto weights = effective_weights(integrand);
  const auto nodes = f.grid().nodes();
  std::vector<double> v(nodes.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = weighted_sum(k, nodes[i], nodes, weights);
  return GridFunction(f.grid(), std::move(v));
}

double weighted_norm(const GridFunction& f, const Density& p) {
  const double s = integrate(f * f * density_on_grid(p, f.grid()));
  return std::sqrt(std::max(s, 0.0));
}

double smoothness_norm_r1(const StepFunction& h, const Density& p, const QuadratureGrid& grid) {
  require_same_support(h.support(), p.support(), "smoothness_norm_r1");
  double total = 0.0;
  for (const auto& piece : h.pieces()) {
    if (piece.value == 0.0) continue;
    const auto rule = simpson_rule(piece.interval.lo, piece.interval.hi, grid.spacing());
    double s = 0.0;
    const std::size_t m = rule.nodes.size();
    for (std::size_t j = 0; j < m; ++j) {
      const double x = rule.nodes[j];
      const double d = j == 0 ? p.pdf_right(x) : (j + 1 == m ? p.pdf_left(x) : p.pdf(x));
      if (!(d > 0.0)) {
        throw SingularityError("density vanishes on the support of the step function");
      }
      s += rule.weights[j] / d;
    }
    total += piece.value * piece.value * s;
  }
  if (!std::isfinite(total)) {
    throw NumericError("smoothness norm overflows: density is too close to zero on the step support");
  }
  return std::sqrt(total);
}

SpectralNorm smoothness_norm_general(const GridFunction& mu, const Density& p, const Kernel& k,
                                     double r) {
  if (!(r > 0.5 && r <= 1.0)) throw ArgumentError("smoothness index r must lie in (1/2, 1]");
  require_same_support(k.domain(), mu.grid().support(), "smoothness_norm_general");
  const auto w = effective_weights(density_on_grid(p, mu.grid()));
  if (*std::min_element(w.begin(), w.end()) <= 0.0) {
    throw SingularityError("smoothness_norm_general needs a strictly positive density");
  }
  const auto n = static_cast<Eigen::Index>(w.size());
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = std::sqrt(w[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd a = d.asDiagonal() * kernel_matrix(k, mu.grid().nodes()) * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");

  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = d(i) * mu[static_cast<std::size_t>(i)];
  const Eigen::VectorXd c = es.eigenvectors().transpose() * u;
  const Eigen::VectorXd& lambda = es.eigenvalues();

  SpectralNorm out;
  out.lambda_max = lambda.maxCoeff();
  out.floor = 1e-10 * out.lambda_max;
  double kept = 0.0;
  double mass = 0.0;
  double excluded = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double cj2 = c(j) * c(j);
    mass += cj2;
    if (lambda(j) >= out.floor) {
      kept += std::pow(lambda(j), -2.0 * r) * cj2;
      ++out.resolved_modes;
    } else {
      excluded += cj2;
      ++out.excluded_modes;
    }
  }
  out.value = std::sqrt(kept);
  out.excluded_mass_fraction = mass > 0.0 ? excluded / mass : 0.0;
  out.ill_posed = out.excluded_mass_fraction > 0.01;
  return out;
}

GridFunction data_free_limit(const GridFunction& mu, const Density& p, double gamma,
                             const Kernel& k) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ArgumentError("gamma must be > 0");
  require_same_support(k.domain(), mu.grid().support(), "data_free_limit");
  const auto w = effective_weights(density_on_grid(p, mu.grid()));
  const auto n = static_cast<Eigen::Index>(w.size());
  const Eigen::MatrixXd kmat = kernel_matrix(k, mu.grid().nodes());
  Eigen::VectorXd m(n);
  for (Eigen::Index i = 0; i < n; ++i) m(i) = mu[static_cast<std::size_t>(i)];

  Eigen::VectorXd v(n);
  if (*std::min_element(w.begin(), w.end()) > 0.0) {
    // Similarity with diag(sqrt(W)) makes the system symmetric positive definite.
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = std::sqrt(w[static_cast<std::size_t>(i)]);
    Eigen::MatrixXd a = d.asDiagonal() * kmat * d.asDiagonal();
    const Eigen::VectorXd rhs = a * d.cwiseProduct(m);
    a.diagonal().array() += gamma;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) throw NumericError("data_free_limit: factorization failed");
    v = llt.solve(rhs).cwiseQuotient(d);
  } else {
    Eigen::MatrixXd lmat = kmat;
    for (Eigen::Index j = 0; j < n; ++j) lmat.col(j) *= w[static_cast<std::size_t>(j)];
    const Eigen::VectorXd rhs = lmat * m;
    lmat.diagonal().array() += gamma;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(lmat);
    v = lu.solve(rhs);
  }
  if (!v.allFinite()) throw NumericError("data_free_limit: non-finite solution");
  return GridFunction(mu.grid(), std::vector<double>(v.data(), v.data() + n));
}

GridFunction data_free_limit(const GridFunction& mu, const SamplingSchedule& schedule,
                             std::size_t t, double gamma, const Kernel& k) {
  return data_free_limit(mu, average_density(schedule, t), gamma, k);
}

DensityBounds density_bounds(const Density& p, const QuadratureGrid& grid) {
  const auto g = density_on_grid(p, grid);
  DensityBounds b{g[0], g[0]};
  for (double v : g.values()) {
    b.lower = std::min(b.lower, v);
    b.upper = std::max(b.upper, v);
  }
  return b;
}

}  // namespace nskrr
