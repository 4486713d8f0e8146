#include "nskrr/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "nskrr/errors.hpp"

namespace nskrr {

QuadratureGrid::QuadratureGrid(Interval support, std::size_t count) : support_(support) {
  if (count < 3 || count % 2 == 0) throw ArgumentError("quadrature grid needs an odd count >= 3");
  if (!(support.lo < support.hi) || !std::isfinite(support.lo) || !std::isfinite(support.hi)) {
    throw ArgumentError("quadrature grid needs a finite interval with lo < hi");
  }
  const std::size_t intervals = count - 1;
  spacing_ = support.length() / static_cast<double>(intervals);
  nodes_.resize(count);
  weights_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    nodes_[i] = support.lo + support.length() * (static_cast<double>(i) / static_cast<double>(intervals));
    weights_[i] = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    weights_[i] *= spacing_ / 3.0;
  }
  nodes_.back() = support.hi;
}

std::optional<std::size_t> QuadratureGrid::node_index(double x) const noexcept {
  const double pos = (x - support_.lo) / spacing_;
  const double r = std::round(pos);
  if (r < 0.0 || r > static_cast<double>(nodes_.size() - 1)) return std::nullopt;
  if (std::abs(pos - r) > 1e-9) return std::nullopt;
  return static_cast<std::size_t>(r);
}

GridFunction::GridFunction(QuadratureGrid grid, std::vector<double> values, std::vector<Jump> jumps)
    : grid_(std::move(grid)), values_(std::move(values)), jumps_(std::move(jumps)) {
  if (values_.size() != grid_.count()) throw ArgumentError("GridFunction: |values| != grid count");
  std::sort(jumps_.begin(), jumps_.end(),
            [](const Jump& a, const Jump& b) { return a.index < b.index; });
  for (std::size_t k = 0; k < jumps_.size(); ++k) {
    if (jumps_[k].index >= values_.size() || !QuadratureGrid::is_panel_boundary(jumps_[k].index)) {
      throw ArgumentError("GridFunction: jumps must sit on panel-boundary nodes");
    }
    if (k > 0 && jumps_[k].index == jumps_[k - 1].index) {
      throw ArgumentError("GridFunction: duplicate jump index");
    }
  }
}

GridFunction GridFunction::sample(const QuadratureGrid& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.count());
  const auto nodes = grid.nodes();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(nodes[i]);
  return GridFunction(grid, std::move(v));
}

GridFunction GridFunction::zero(const QuadratureGrid& grid) {
  return GridFunction(grid, std::vector<double>(grid.count(), 0.0));
}

double GridFunction::left(std::size_t i) const noexcept {
  const auto it = std::lower_bound(jumps_.begin(), jumps_.end(), i,
                                   [](const Jump& j, std::size_t idx) { return j.index < idx; });
  return (it != jumps_.end() && it->index == i) ? it->left : values_[i];
}

double GridFunction::right(std::size_t i) const noexcept {
  const auto it = std::lower_bound(jumps_.begin(), jumps_.end(), i,
                                   [](const Jump& j, std::size_t idx) { return j.index < idx; });
  return (it != jumps_.end() && it->index == i) ? it->right : values_[i];
}

double GridFunction::sup_norm() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  for (const auto& j : jumps_) m = std::max({m, std::abs(j.left), std::abs(j.right)});
  return m;
}

GridFunction combine(const GridFunction& a, const GridFunction& b,
                     const std::function<double(double, double)>& op) {
  if (!(a.grid() == b.grid())) throw ArgumentError("grid functions live on different grids");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(a[i], b[i]);
  std::vector<std::size_t> idx;
  for (const auto& j : a.jumps()) idx.push_back(j.index);
  for (const auto& j : b.jumps()) idx.push_back(j.index);
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  std::vector<Jump> jumps;
  for (std::size_t i : idx) {
    jumps.push_back({i, op(a.left(i), b.left(i)), op(a.right(i), b.right(i))});
  }
  return GridFunction(a.grid(), std::move(v), std::move(jumps));
}

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  return combine(a, b, [](double x, double y) { return x + y; });
}
GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  return combine(a, b, [](double x, double y) { return x - y; });
}
GridFunction operator*(const GridFunction& a, const GridFunction& b) {
  return combine(a, b, [](double x, double y) { return x * y; });
}
GridFunction operator*(double s, const GridFunction& a) {
  std::vector<double> v(a.values().begin(), a.values().end());
  for (double& x : v) x *= s;
  std::vector<Jump> jumps = a.jumps();
  for (auto& j : jumps) {
    j.left *= s;
    j.right *= s;
  }
  return GridFunction(a.grid(), std::move(v), std::move(jumps));
}

StepFunction::StepFunction(std::vector<StepPiece> pieces, Interval support)
    : pieces_(std::move(pieces)), support_(support) {
  std::sort(pieces_.begin(), pieces_.end(),
            [](const StepPiece& a, const StepPiece& b) { return a.interval.lo < b.interval.lo; });
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const auto& iv = pieces_[k].interval;
    if (!(iv.lo < iv.hi)) throw ArgumentError("step piece must have lo < hi");
    if (iv.lo < support.lo || iv.hi > support.hi) throw ArgumentError("step piece outside support");
    if (!std::isfinite(pieces_[k].value)) throw ArgumentError("step piece value must be finite");
    if (k > 0 && iv.lo < pieces_[k - 1].interval.hi) throw ArgumentError("step pieces overlap");
  }
}

double StepFunction::operator()(double x) const noexcept {
  for (const auto& p : pieces_) {
    if (p.interval.contains(x)) return p.value;
  }
  return 0.0;
}

double StepFunction::left_limit(double x) const noexcept {
  for (const auto& p : pieces_) {
    if (p.interval.lo < x && x <= p.interval.hi) return p.value;
  }
  return 0.0;
}

double StepFunction::right_limit(double x) const noexcept {
  for (const auto& p : pieces_) {
    if (p.interval.lo <= x && x < p.interval.hi) return p.value;
  }
  return 0.0;
}

std::vector<double> StepFunction::breakpoints() const {
  std::vector<double> b;
  for (const auto& p : pieces_) {
    for (double x : {p.interval.lo, p.interval.hi}) {
      if (x > support_.lo && x < support_.hi && left_limit(x) != right_limit(x)) b.push_back(x);
    }
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

GridFunction StepFunction::on_grid(const QuadratureGrid& grid) const {
  if (!(grid.support() == support_)) throw ArgumentError("step function and grid supports differ");
  std::vector<double> v(grid.count());
  const auto nodes = grid.nodes();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (*this)(nodes[i]);
  std::vector<Jump> jumps;
  for (double b : breakpoints()) {
    const auto idx = grid.node_index(b);
    if (!idx || !QuadratureGrid::is_panel_boundary(*idx)) {
      throw ArgumentError("step breakpoint does not fall on a Simpson panel boundary of the grid");
    }
    jumps.push_back({*idx, left_limit(b), right_limit(b)});
  }
  return GridFunction(grid, std::move(v), std::move(jumps));
}

SimpsonRule simpson_rule(double a, double b, double max_spacing) {
  if (!(a < b) || !(max_spacing > 0.0)) throw ArgumentError("simpson_rule: need a < b, spacing > 0");
  auto m = static_cast<std::size_t>(std::ceil((b - a) / max_spacing - 1e-9));
  m = std::max<std::size_t>(2, m + (m % 2));
  SimpsonRule r;
  r.nodes.resize(m + 1);
  r.weights.resize(m + 1);
  const double h = (b - a) / static_cast<double>(m);
  for (std::size_t i = 0; i <= m; ++i) {
    r.nodes[i] = a + (b - a) * (static_cast<double>(i) / static_cast<double>(m));
    r.weights[i] = ((i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0)) * h / 3.0;
  }
  r.nodes.back() = b;
  return r;
}

double integrate(const GridFunction& f) {
  const auto w = f.grid().weights();
  const auto v = f.values();
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i];
  // Each panel touching a jump node uses that side's limit, weight h/3.
  const double end_weight = f.grid().spacing() / 3.0;
  const std::size_t last = v.size() - 1;
  for (const auto& j : f.jumps()) {
    if (j.index > 0) s += end_weight * (j.left - v[j.index]);
    if (j.index < last) s += end_weight * (j.right - v[j.index]);
  }
  return s;
}

}  // namespace nskrr
