#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string_view>

#include "common.hpp"
#include "family.hpp"

namespace expfam {

struct Scheme {
  enum class Kind { Auto, AdaptiveQuadrature, TensorQuadrature, MonteCarlo, SeriesSum };

  Kind kind = Kind::Auto;
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  long max_evals = 1000000;
  std::uint64_t seed = 0x5eedULL;
  double tail_cut = 1e-12;

  static Scheme from_json(const std::string& text);
  std::string to_json() const;

  Kind resolve(const Support& support) const;
};

struct IntegralResult {
  double value = 0.0;
  double err_estimate = 0.0;
  long evals = 0;
};

// Importance-sampling proposal for Monte-Carlo integration over R^d.
struct McProposal {
  std::function<void(std::mt19937_64&, std::span<double>)> sample;
  std::function<double(std::span<const double>)> log_pdf;
  double spread = 0.0;  // log-volume score; larger means broader
};

using Integrand = std::function<double(std::span<const double>)>;

// Integrates f over the support with the requested scheme. Infinite 1D
// intervals are mapped onto finite ones, (0,inf) by x = t/(1-t) and R by
// x = t/(1-t^2), before adaptive Gauss-Kronrod quadrature. Discrete supports
// are summed with a geometric tail bound. Non-convergence within max_evals
// raises ConvergenceError; it is never silent.
IntegralResult integrate(const Integrand& f, const Support& support, const Scheme& scheme,
                         std::string_view tag = {},
                         const McProposal* proposal = nullptr);

// Plain importance-sampling Monte-Carlo estimate of an integral over R^d.
// The RNG stream is derived from (seed, tag) so results are reproducible.
IntegralResult integrate_mc(const Integrand& f, int dim, const McProposal& proposal,
                            const Scheme& scheme, std::string_view tag);

}  // namespace expfam
