#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nskrr/cholesky.hpp"
#include "nskrr/kernels.hpp"
#include "nskrr/quadrature.hpp"

namespace nskrr {

struct Dataset {
  std::vector<double> inputs;
  std::vector<double> outputs;

  std::size_t size() const noexcept { return inputs.size(); }
};

// gamma(t) = gamma0 * t^{-alpha}, 0 < alpha < 1/2.
class GammaSchedule {
 public:
  GammaSchedule(double gamma0, double alpha);
  double gamma0() const noexcept { return gamma0_; }
  double alpha() const noexcept { return alpha_; }

 private:
  double gamma0_;
  double alpha_;
};

double gamma_at(const GammaSchedule& s, std::size_t t);

// Regularised least-squares estimate f = sum_i c_i K(x_i, .) minimising
// (1/t) sum (y_i - f(x_i))^2 + gamma ||f||_H^2, i.e. (G + t gamma I) c = y.
class KrrModel {
 public:
  // Model with no data; extend() on it is fit() on one sample.
  static KrrModel empty(const Kernel& k, double gamma);

  const Kernel& kernel() const noexcept { return kernel_; }
  std::size_t size() const noexcept { return support_.size(); }
  std::span<const double> support() const noexcept { return support_; }
  std::span<const double> outputs() const noexcept { return outputs_; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  // gamma the coefficients solve for exactly: shift() == size() * gamma().
  double gamma() const noexcept { return gamma_; }
  double shift() const noexcept { return shift_; }
  // Extra diagonal added by the jitter ladder (normally 0).
  double jitter() const noexcept { return jitter_; }
  // gamma passed to the last extend(); differs from gamma() when the bordered
  // update kept the previous diagonal shift.
  double requested_gamma() const noexcept { return requested_gamma_; }
  bool stale_shift() const noexcept { return requested_gamma_ != gamma_; }
  const PackedCholesky& factor() const noexcept { return chol_; }

 private:
  friend KrrModel fit(const std::vector<double>&, const std::vector<double>&, const Kernel&, double);
  friend KrrModel extend(KrrModel&&, double, double, double);
  friend class KrrStream;

  KrrModel(const Kernel& k, double gamma) : kernel_(k), gamma_(gamma), requested_gamma_(gamma) {}
  void refactor(double shift);
  bool append(double x, double y);
  void refresh_coeffs();

  Kernel kernel_;
  std::vector<double> support_;
  std::vector<double> outputs_;
  std::vector<double> coeffs_;
  std::vector<double> forward_;  // L^{-1} y
  PackedCholesky chol_;
  double gamma_;
  double shift_ = 0.0;
  double jitter_ = 0.0;
  double requested_gamma_;
};

KrrModel fit(const std::vector<double>& inputs, const std::vector<double>& outputs,
             const Kernel& k, double gamma);
KrrModel fit(const Dataset& data, const Kernel& k, double gamma);

// Model for the data plus (x_new, y_new). When (t+1) gamma_new is within 1e-3
// (relative) of the current shift, the factor is bordered in O(t^2) and the old
// shift is kept (gamma() becomes shift / (t+1)); otherwise it is refactored at
// the requested gamma.
KrrModel extend(const KrrModel& model, double x_new, double y_new, double gamma_new);
KrrModel extend(KrrModel&& model, double x_new, double y_new, double gamma_new);

// sum_i c_i K(x_i, x)
double predict(const KrrModel& model, double x);

// max over grid nodes of |predict - mu|; the windowed form only looks at nodes in `window`.
double sup_error(const KrrModel& model, const GridFunction& mu);
double sup_error(const KrrModel& model, const GridFunction& mu, const Interval& window);

// (1/t) sum (y_i - (G c)_i)^2 + gamma c^T G c over the dataset's inputs.
double objective(const Dataset& data, const Kernel& k, double gamma, std::span<const double> coeffs);

// ||(G + (shift + jitter) I) c - y|| for the model's own data.
double normal_equation_residual(const KrrModel& model);

// Streaming accumulator used by the experiment driver: samples are bordered in
// at a fixed diagonal shift and coefficients are only formed on snapshot().
class KrrStream {
 public:
  KrrStream(const Kernel& k, double gamma);

  std::size_t size() const noexcept { return model_.size(); }
  void push(double x, double y);
  // Refactor at shift size() * gamma if it differs from the current shift.
  void retune(double gamma);
  KrrModel snapshot() const;

 private:
  KrrModel model_;
};

}  // namespace nskrr
