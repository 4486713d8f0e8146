#include "nskrr/krr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nskrr/errors.hpp"
#include "nskrr/simd.hpp"

namespace nskrr {
namespace {

constexpr double kShiftTolerance = 1e-3;

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ArgumentError("gamma must be a positive finite number");
}

void check_input(const Kernel& k, double x) {
  if (!k.domain().contains(x)) {
    std::ostringstream os;
    os << "input " << x << " outside kernel domain";
    throw DomainError(os.str());
  }
}

double norm2(std::span<const double> v) { return std::sqrt(simd::dot(v, v)); }

// r = y - (G + diag I) c, with G rows evaluated on the fly.
std::vector<double> residual(const Kernel& k, std::span<const double> x, std::span<const double> y,
                             std::span<const double> c, double diag) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    r[i] = y[i] - weighted_sum(k, x[i], x, c) - diag * c[i];
  }
  return r;
}

}  // namespace

GammaSchedule::GammaSchedule(double gamma0, double alpha) : gamma0_(gamma0), alpha_(alpha) {
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) throw ArgumentError("gamma0 must be > 0");
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw ArgumentError("alpha must satisfy 0 < alpha < 1/2 (got " + std::to_string(alpha) + ")");
  }
}

double gamma_at(const GammaSchedule& s, std::size_t t) {
  if (t < 1) throw ArgumentError("gamma_at: t must be >= 1");
  return s.gamma0() * std::pow(static_cast<double>(t), -s.alpha());
}

KrrModel KrrModel::empty(const Kernel& k, double gamma) {
  check_gamma(gamma);
  return KrrModel(k, gamma);
}

void KrrModel::refactor(double shift) {
  const std::size_t n = support_.size();
  double max_diag = 0.0;
  for (double x : support_) max_diag = std::max(max_diag, kernel_(x, x));
  const auto row = [this](std::size_t i, std::span<double> out) {
    eval_row(kernel_, support_[i], std::span<const double>(support_).first(i + 1), out);
  };
  auto jf = factor_with_jitter(n, row, shift, max_diag);
  chol_ = std::move(jf.factor);
  jitter_ = jf.jitter;
  shift_ = shift;
  forward_ = outputs_;
  chol_.solve_lower(forward_);
}

bool KrrModel::append(double x, double y) {
  const std::size_t t = support_.size();
  std::vector<double> a(t + 1);
  eval_row(kernel_, x, support_, std::span(a).first(t));
  a[t] = kernel_(x, x) + shift_ + jitter_;
  if (!chol_.append(a)) return false;
  const auto l = chol_.row(t);
  forward_.push_back((y - simd::dot(l.first(t), forward_)) / l[t]);
  support_.push_back(x);
  outputs_.push_back(y);
  return true;
}

void KrrModel::refresh_coeffs() {
  coeffs_ = forward_;
  chol_.solve_upper(coeffs_);
}

KrrModel fit(const std::vector<double>& inputs, const std::vector<double>& outputs,
             const Kernel& k, double gamma) {
  if (inputs.empty()) throw ArgumentError("fit: dataset is empty");
  if (inputs.size() != outputs.size()) throw ArgumentError("fit: |inputs| != |outputs|");
  check_gamma(gamma);
  for (double x : inputs) check_input(k, x);
  KrrModel m(k, gamma);
  m.support_ = inputs;
  m.outputs_ = outputs;
  const double shift = static_cast<double>(inputs.size()) * gamma;
  m.refactor(shift);
  m.refresh_coeffs();
  // One step of iterative refinement against the unfactored system.
  auto r = residual(k, m.support_, m.outputs_, m.coeffs_, shift + m.jitter_);
  m.chol_.solve(r);
  for (std::size_t i = 0; i < r.size(); ++i) m.coeffs_[i] += r[i];
  return m;
}

KrrModel fit(const Dataset& data, const Kernel& k, double gamma) {
  return fit(data.inputs, data.outputs, k, gamma);
}

KrrModel extend(KrrModel&& model, double x_new, double y_new, double gamma_new) {
  check_gamma(gamma_new);
  check_input(model.kernel_, x_new);
  if (model.size() == 0) return fit({x_new}, {y_new}, model.kernel_, gamma_new);
  const double t1 = static_cast<double>(model.size() + 1);
  const double wanted = t1 * gamma_new;
  if (std::abs(wanted - model.shift_) <= kShiftTolerance * model.shift_ && model.append(x_new, y_new)) {
    model.gamma_ = wanted == model.shift_ ? gamma_new : model.shift_ / t1;
    model.requested_gamma_ = gamma_new;
    model.refresh_coeffs();
    return std::move(model);
  }
  model.support_.push_back(x_new);
  model.outputs_.push_back(y_new);
  model.refactor(wanted);
  model.gamma_ = gamma_new;
  model.requested_gamma_ = gamma_new;
  model.refresh_coeffs();
  return std::move(model);
}

KrrModel extend(const KrrModel& model, double x_new, double y_new, double gamma_new) {
  return extend(KrrModel(model), x_new, y_new, gamma_new);
}

double predict(const KrrModel& model, double x) {
  check_input(model.kernel(), x);
  if (model.size() == 0) return 0.0;
  return weighted_sum(model.kernel(), x, model.support(), model.coeffs());
}

double sup_error(const KrrModel& model, const GridFunction& mu) {
  return sup_error(model, mu, mu.grid().support());
}

double sup_error(const KrrModel& model, const GridFunction& mu, const Interval& window) {
  if (!(model.kernel().domain() == mu.grid().support())) {
    throw ArgumentError("sup_error: model domain and grid support differ");
  }
  const auto nodes = mu.grid().nodes();
  double worst = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!window.contains(nodes[i])) continue;
    const double f = model.size() == 0
                         ? 0.0
                         : weighted_sum(model.kernel(), nodes[i], model.support(), model.coeffs());
    worst = std::max(worst, std::abs(f - mu[i]));
  }
  return worst;
}

double objective(const Dataset& data, const Kernel& k, double gamma, std::span<const double> coeffs) {
  if (coeffs.size() != data.size()) throw ArgumentError("objective: dimension mismatch");
  if (data.outputs.size() != data.size()) throw ArgumentError("objective: |inputs| != |outputs|");
  if (data.size() == 0) throw ArgumentError("objective: dataset is empty");
  double misfit = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = weighted_sum(k, data.inputs[i], data.inputs, coeffs);
    const double r = data.outputs[i] - f;
    misfit += r * r;
    norm += coeffs[i] * f;
  }
  return misfit / static_cast<double>(data.size()) + gamma * std::max(norm, 0.0);
}

double normal_equation_residual(const KrrModel& model) {
  const auto r = residual(model.kernel(), model.support(), model.outputs(), model.coeffs(),
                          model.shift() + model.jitter());
  return norm2(r);
}

KrrStream::KrrStream(const Kernel& k, double gamma) : model_(KrrModel::empty(k, gamma)) {}

void KrrStream::push(double x, double y) {
  check_input(model_.kernel_, x);
  if (model_.size() == 0) {
    model_ = fit({x}, {y}, model_.kernel_, model_.gamma_);
    return;
  }
  if (!model_.append(x, y)) {
    model_.support_.push_back(x);
    model_.outputs_.push_back(y);
    model_.refactor(model_.shift_);
  }
  model_.gamma_ = model_.shift_ / static_cast<double>(model_.size());
  model_.requested_gamma_ = model_.gamma_;
}

void KrrStream::retune(double gamma) {
  check_gamma(gamma);
  if (model_.size() == 0) {
    model_.gamma_ = model_.requested_gamma_ = gamma;
    return;
  }
  const double shift = static_cast<double>(model_.size()) * gamma;
  if (shift != model_.shift_) model_.refactor(shift);
  model_.gamma_ = model_.requested_gamma_ = gamma;
}

KrrModel KrrStream::snapshot() const {
  KrrModel m = model_;
  if (m.size() > 0) m.refresh_coeffs();
  return m;
}

}  // namespace nskrr
