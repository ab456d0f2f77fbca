#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"
#include "generator.hpp"

namespace expfam {

enum class FamilyKind {
  Exponential,
  Poisson,
  Bernoulli,
  CenteredNormal1D,
  Normal1D,
  CenteredNormalND,
};

// Sample space plus reference measure. Discrete supports may carry per-atom
// log weights so that densities can be taken with carrier term zero.
struct Support {
  enum class Kind { HalfLine, RealLine, Naturals, Binary, RealVector };
  Kind kind = Kind::RealLine;
  int dim = 1;
  std::function<double(long)> log_weight;  // null: counting measure

  bool contains(std::span<const double> x) const;
};

/// An exponential family in natural coordinates: domain predicate, sufficient
/// statistic, and closed-form cumulant/partition functions with gradients.
/// Instances are immutable and cheap to copy; every operation is pure.
class Family {
 public:
  static Family make(FamilyKind kind, int dim);
  static Family make(const std::string& kind_name, int dim);

  static const std::vector<std::string>& kind_names();
  static std::optional<FamilyKind> kind_from_name(const std::string& name);

  FamilyKind kind() const { return kind_; }
  const std::string& name() const;
  int dim() const { return dim_; }          // sample-space dimension
  int param_len() const;                    // natural-parameter coordinates
  int sample_len() const;                   // observation coordinates
  ParamLayout layout() const;
  Support support() const;

  bool in_domain(const Vec& theta) const;   // strict, margin 1e-12
  void require_domain(const Vec& theta) const;

  double cumulant(const Vec& theta) const;        // F(theta) = log Z(theta)
  double partition(const Vec& theta) const;       // Z(theta)
  Vec grad_cumulant(const Vec& theta) const;      // E_p[t(x)]
  Vec grad_partition(const Vec& theta) const;

  Vec sufficient_stat(std::span<const double> x) const;
  double log_unnormalized(const Vec& theta, std::span<const double> x) const;
  double unnormalized_density(const Vec& theta, std::span<const double> x) const;
  double density(const Vec& theta, std::span<const double> x) const;

  double inner(const Vec& a, const Vec& b) const;

  // Natural parameters from the source parameterization (rate, success
  // probability, variance, (mean, variance), covariance matrix).
  Vec theta_from_source(const Vec& source) const;

  const std::vector<Vec>& param_grid() const { return grid_; }

  Generator cumulant_generator() const;
  Generator partition_generator() const;
  Generator partition_minus_one_generator() const;

  // JSON descriptor {kind, dim, theta?}.
  std::string to_json(const Vec* theta = nullptr) const;
  static std::pair<Family, std::optional<Vec>> from_json(const std::string& text);

 private:
  Family(FamilyKind kind, int dim);
  void build_grid();

  FamilyKind kind_;
  int dim_;
  std::vector<Vec> grid_;
};

}  // namespace expfam
