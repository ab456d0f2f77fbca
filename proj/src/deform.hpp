#pragma once

#include <functional>
#include <string>
#include <vector>

#include "divergences.hpp"
#include "generator.hpp"

namespace expfam {

/// Generator of a weighted quasi-arithmetic mean: a strictly increasing
/// continuous map h together with its inverse. Tagged instances cover the
/// arithmetic (identity), geometric (log) and power-mean families; the power
/// generator h_p(u) = (u^p - 1)/p switches to the exact log branch for
/// |p| < 1e-8.
class MeanGenerator {
 public:
  enum class Tag { Identity, Log, Power, Custom };

  MeanGenerator() = default;  // identity

  static MeanGenerator identity();
  static MeanGenerator log();
  static MeanGenerator power(double p);
  static MeanGenerator custom(std::string name, std::function<double(double)> h,
                              std::function<double(double)> h_inv);

  double h(double u) const;
  double h_inv(double u) const;
  // Derivative h'(u) for tagged generators; Custom has none.
  bool has_derivative() const { return tag_ != Tag::Custom; }
  double h_prime(double u) const;

  MeanGenerator inverse() const;
  static MeanGenerator compose(const MeanGenerator& outer, const MeanGenerator& inner);

  Tag tag() const { return tag_; }
  double power_exponent() const { return p_; }
  const std::string& name() const { return name_; }

  std::string to_json() const;
  static MeanGenerator from_json(const std::string& text);

 private:
  Tag tag_ = Tag::Identity;
  double p_ = 0.0;
  std::string name_ = "identity";
  std::function<double(double)> h_ = [](double u) { return u; };
  std::function<double(double)> h_inv_ = [](double u) { return u; };
};

// M_h(x, y; alpha, 1-alpha) = h^{-1}(alpha h(x) + (1-alpha) h(y))
double qa_mean(const MeanGenerator& h, double x, double y, double alpha);

struct DeformationSpec {
  MeanGenerator rho;
  MeanGenerator tau;

  std::string to_json() const;
  static DeformationSpec from_json(const std::string& text);
};

// The (rho, tau)-deformation tau^{-1} o gen o rho with rho applied
// coordinatewise. Gradients are finite differences; range violations raise
// DomainError at evaluation time.
Generator deform(const Generator& gen, const DeformationSpec& spec);

// tau o gen o rho^{-1}: the function whose ordinary convexity is equivalent
// to (M_rho, M_tau)-convexity of gen. With rho = identity and a tagged tau
// the gradient is the closed-form chain rule; the power case gives the
// deformed partition generator of the power sweep.
Generator comparative_deform(const Generator& gen, const MeanGenerator& rho,
                             const MeanGenerator& tau);

enum class ConvexVerdict { Convex, NotConvex, Inconclusive };

const char* verdict_name(ConvexVerdict v);

// Sampling-based certificate, never a proof; the report carries the grid and
// slack it used. Convex requires every central second difference above
// -pass_slack and every midpoint Jensen gap below pass_slack; a violation
// beyond fail_threshold certifies non-convexity.
struct ConvexityReport {
  ConvexVerdict verdict = ConvexVerdict::Inconclusive;
  double worst_violation = 0.0;
  double step = 0.0;
  double pass_slack = 1e-9;
  double fail_threshold = 1e-6;
  std::vector<Vec> grid;
};

ConvexityReport convexity_certificate(const Generator& gen, const std::vector<Vec>& grid,
                                      double step);

// Two-route comparative-convexity check for 1-d generators: (a) definitional
// sampling of g(M_rho) <= M_tau(g, g) over grid pairs and skews, (b) ordinary
// convexity of tau o g o rho^{-1}. Conflicting certain verdicts raise
// InconsistencyError.
struct InconsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ConvexityReport mn_convexity_check(const Generator& gen, const MeanGenerator& rho,
                                   const MeanGenerator& tau, const std::vector<double>& grid,
                                   const std::vector<double>& alphas);

struct DeformedDivergences {
  double bregman = 0.0;
  double jensen_scaled = 0.0;
  ConvexityReport certificate;
};

// Divergences induced by the deformed generator; refuses with NotConvexError
// when the certificate on the segment [t1, t2] fails.
DeformedDivergences deformed_divergences(const Generator& gen, const DeformationSpec& spec,
                                         const Vec& t1, const Vec& t2, Skew skew);

// Same contract for a generator that is already deformed.
DeformedDivergences certified_divergences(const Generator& deformed, const Vec& t1,
                                          const Vec& t2, Skew skew);

}  // namespace expfam
