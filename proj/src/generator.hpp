#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "common.hpp"
#include "sym_packed.hpp"

namespace expfam {

/// A strictly convex candidate on an open parameter domain with value and
/// gradient evaluation. Gradients fall back to central finite differences
/// when no closed form is supplied.
class Generator {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  using DomainFn = std::function<bool(const Vec&)>;

  Generator() = default;

  Generator(std::string name, int param_len, ValueFn value, DomainFn domain,
            GradFn gradient = nullptr, ParamLayout layout = ParamLayout::Vector,
            int matrix_dim = 0)
      : name_(std::move(name)),
        param_len_(param_len),
        layout_(layout),
        matrix_dim_(matrix_dim),
        value_(std::move(value)),
        domain_(std::move(domain)),
        gradient_(std::move(gradient)) {}

  const std::string& name() const { return name_; }
  int param_len() const { return param_len_; }
  ParamLayout layout() const { return layout_; }
  int matrix_dim() const { return matrix_dim_; }

  bool in_domain(const Vec& theta) const {
    if (static_cast<int>(theta.size()) != param_len_) return false;
    if (!all_finite(theta)) return false;
    return domain_ ? domain_(theta) : true;
  }

  void require_domain(const Vec& theta) const {
    if (!in_domain(theta))
      throw DomainError("generator '" + name_ + "': parameter outside domain");
  }

  double value(const Vec& theta) const {
    require_domain(theta);
    double v = value_(theta);
    if (!std::isfinite(v))
      throw DomainError("generator '" + name_ + "': value not finite");
    return v;
  }

  Vec gradient(const Vec& theta) const {
    require_domain(theta);
    Vec g = gradient_ ? gradient_(theta) : fd_gradient(theta);
    require_finite(g, "generator gradient");
    return g;
  }

  bool has_closed_gradient() const { return static_cast<bool>(gradient_); }

  // Inner product matching the parameter layout (trace form for packed
  // symmetric matrices).
  double inner(const Vec& a, const Vec& b) const {
    if (layout_ == ParamLayout::SymMatrix) return packed_inner(matrix_dim_, a, b);
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }

  // Central differences with step h = max(1e-5, 1e-7 |theta_i|); the step is
  // shrunk near the domain boundary. Packed off-diagonal coordinates pick up
  // a factor two from the trace inner product which is divided back out.
  Vec fd_gradient(const Vec& theta) const {
    Vec g(param_len_);
    for (int i = 0; i < param_len_; ++i) {
      double h = std::max(1e-5, 1e-7 * std::abs(theta[i]));
      Vec tp = theta, tm = theta;
      tp[i] = theta[i] + h;
      tm[i] = theta[i] - h;
      int shrink = 0;
      while ((!in_domain(tp) || !in_domain(tm)) && shrink < 40) {
        h *= 0.5;
        tp[i] = theta[i] + h;
        tm[i] = theta[i] - h;
        ++shrink;
      }
      if (!in_domain(tp) || !in_domain(tm))
        throw DomainError("generator '" + name_ + "': cannot difference at boundary");
      double w = 1.0;
      if (layout_ == ParamLayout::SymMatrix) w = packed_weight(matrix_dim_, i);
      g[i] = (value_(tp) - value_(tm)) / (2.0 * h * w);
    }
    return g;
  }

  // Sample points used for solver initialization and ordering checks.
  const std::vector<Vec>& probe_grid() const { return probe_grid_; }
  void set_probe_grid(std::vector<Vec> grid) { probe_grid_ = std::move(grid); }

 private:
  std::string name_;
  int param_len_ = 0;
  ParamLayout layout_ = ParamLayout::Vector;
  int matrix_dim_ = 0;
  ValueFn value_;
  DomainFn domain_;
  GradFn gradient_;
  std::vector<Vec> probe_grid_;
};

}  // namespace expfam
