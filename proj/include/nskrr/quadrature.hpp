#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nskrr/kernels.hpp"

namespace nskrr {

// Equally spaced composite-Simpson grid. `count` is odd and >= 3; panel k
// spans nodes 2k .. 2k+2, so even-indexed nodes are panel boundaries.
class QuadratureGrid {
 public:
  QuadratureGrid(Interval support, std::size_t count);

  const Interval& support() const noexcept { return support_; }
  std::size_t count() const noexcept { return nodes_.size(); }
  double spacing() const noexcept { return spacing_; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }

  // Index of the node equal to x (to 1e-9 spacing), if any.
  std::optional<std::size_t> node_index(double x) const noexcept;
  static bool is_panel_boundary(std::size_t i) noexcept { return i % 2 == 0; }

  friend bool operator==(const QuadratureGrid& a, const QuadratureGrid& b) noexcept {
    return a.support_ == b.support_ && a.nodes_.size() == b.nodes_.size();
  }

 private:
  Interval support_;
  double spacing_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

// One-sided limits of a grid function at a panel-boundary node.
struct Jump {
  std::size_t index;
  double left;
  double right;
};

// Samples of a function on a quadrature grid. Discontinuities are allowed at
// panel boundaries and carried as explicit one-sided limits so Simpson's rule
// keeps its order on each side.
class GridFunction {
 public:
  GridFunction(QuadratureGrid grid, std::vector<double> values, std::vector<Jump> jumps = {});

  static GridFunction sample(const QuadratureGrid& grid, const std::function<double(double)>& f);
  static GridFunction zero(const QuadratureGrid& grid);

  const QuadratureGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<Jump>& jumps() const noexcept { return jumps_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  double left(std::size_t i) const noexcept;
  double right(std::size_t i) const noexcept;

  double sup_norm() const noexcept;

 private:
  QuadratureGrid grid_;
  std::vector<double> values_;
  std::vector<Jump> jumps_;  // sorted by index
};

// Pointwise combination; jumps of either operand propagate through op.
GridFunction combine(const GridFunction& a, const GridFunction& b,
                     const std::function<double(double, double)>& op);
GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator-(const GridFunction& a, const GridFunction& b);
GridFunction operator*(const GridFunction& a, const GridFunction& b);
GridFunction operator*(double s, const GridFunction& a);

struct StepPiece {
  Interval interval;
  double value;
};

// Piecewise-constant function: `value` on each closed piece, 0 elsewhere.
// Pieces may touch but not overlap.
class StepFunction {
 public:
  StepFunction(std::vector<StepPiece> pieces, Interval support);

  const std::vector<StepPiece>& pieces() const noexcept { return pieces_; }
  const Interval& support() const noexcept { return support_; }

  double operator()(double x) const noexcept;
  double left_limit(double x) const noexcept;
  double right_limit(double x) const noexcept;
  // Interior discontinuity locations, sorted.
  std::vector<double> breakpoints() const;

  // Grid samples with one-sided limits at the breakpoints. Every breakpoint
  // must coincide with a panel-boundary node.
  GridFunction on_grid(const QuadratureGrid& grid) const;

 private:
  std::vector<StepPiece> pieces_;
  Interval support_;
};

// Composite-Simpson nodes and weights on [a, b] with an even number of
// intervals whose spacing does not exceed max_spacing.
struct SimpsonRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
SimpsonRule simpson_rule(double a, double b, double max_spacing);

// Composite-Simpson estimate of the integral of f over the grid support.
double integrate(const GridFunction& f);

}  // namespace nskrr
