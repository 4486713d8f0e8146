#pragma once

#include <cstddef>
#include <vector>

#include "nskrr/densities.hpp"
#include "nskrr/kernels.hpp"
#include "nskrr/quadrature.hpp"

namespace nskrr {

// f(x) = sum_j weights[j] K(nodes[j], x); evaluable anywhere in the kernel domain.
struct KernelExpansion {
  Kernel kernel;
  std::vector<double> nodes;
  std::vector<double> weights;

  double operator()(double x) const;
};

// Quadrature form of mu(x) = int K(x, a) h(a) da: one Simpson rule per step
// piece, spacing no larger than the grid's.
KernelExpansion regression_expansion(const Kernel& k, const StepFunction& h,
                                     const QuadratureGrid& grid);

// mu(x) = int K(x, a) h(a) da at every grid node. Each step piece gets its own
// Simpson rule, so the discontinuities of h never sit inside a panel.
GridFunction build_regression_function(const Kernel& k, const StepFunction& h,
                                       const QuadratureGrid& grid);

// pdf on the grid, with one-sided limits wherever the density jumps at a
// panel boundary.
GridFunction density_on_grid(const Density& p, const QuadratureGrid& grid);

// f / p. Throws SingularityError where p vanishes and f does not.
GridFunction divide_by_density(const GridFunction& f, const Density& p);

// Weights W such that sum_j W_j phi(x_j) reproduces integrate(g * phi) for
// continuous phi; this is how the jump limits of g enter a matrix-vector product.
std::vector<double> effective_weights(const GridFunction& g);

// (L_p f)(x) = int K(x, a) f(a) p(a) da at every node.
GridFunction apply_operator(const Kernel& k, const Density& p, const GridFunction& f);

// sqrt(int f^2 p).
double weighted_norm(const GridFunction& f, const Density& p);

// sqrt(int h^2 / p), which equals ||L_p^{-1} mu||_p when mu = int K(., a) h(a) da.
double smoothness_norm_r1(const StepFunction& h, const Density& p, const QuadratureGrid& grid);

struct SpectralNorm {
  double value = 0.0;                   // ||L_p^{-r} mu||_p over the resolved modes
  double lambda_max = 0.0;
  double floor = 0.0;                   // 1e-10 * lambda_max
  std::size_t resolved_modes = 0;
  std::size_t excluded_modes = 0;
  double excluded_mass_fraction = 0.0;  // share of ||mu||_p^2 on excluded modes
  bool ill_posed = false;               // excluded_mass_fraction > 1%
};

// ||L_p^{-r} mu||_p, r in (1/2, 1], from the eigendecomposition of the
// symmetrised Nystrom matrix diag(sqrt(W)) K diag(sqrt(W)).
SpectralNorm smoothness_norm_general(const GridFunction& mu, const Density& p, const Kernel& k,
                                     double r);

// mu_bar = (L + gamma I)^{-1} L mu with L discretised on mu's grid under p.
GridFunction data_free_limit(const GridFunction& mu, const Density& p, double gamma,
                             const Kernel& k);
GridFunction data_free_limit(const GridFunction& mu, const SamplingSchedule& schedule,
                             std::size_t t, double gamma, const Kernel& k);

struct DensityBounds {
  double lower = 0.0;
  double upper = 0.0;
};
// Min and max of p over the grid nodes.
DensityBounds density_bounds(const Density& p, const QuadratureGrid& grid);

}  // namespace nskrr
