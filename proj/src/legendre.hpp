#pragma once

#include <array>

#include "divergences.hpp"
#include "generator.hpp"
#include "integrate.hpp"

namespace expfam {

struct NewtonOptions {
  int max_iter = 200;
  int max_halvings = 60;
  double residual_tol = 1e-10;
};

struct SolveResult {
  Vec theta;
  double residual = std::numeric_limits<double>::infinity();
  int iters = 0;
  bool converged = false;
};

// Damped Newton solve of grad G(theta) = eta, started from the probe-grid
// member with the smallest residual. The Jacobian comes from central
// differences of the gradient.
SolveResult try_solve_gradient_equation(const Generator& gen, const Vec& eta,
                                        const NewtonOptions& opts = {});
// Throwing variant; reports the last iterate on failure.
Vec solve_gradient_equation(const Generator& gen, const Vec& eta,
                            const NewtonOptions& opts = {});

/// Legendre conjugation of a generator: dual coordinates eta = grad G(theta),
/// the inverse map by Newton solve, and the conjugate value
/// G*(eta) = <theta*, eta> - G(theta*).
class ConjugatePair {
 public:
  explicit ConjugatePair(Generator primal, NewtonOptions opts = {});

  const Generator& primal() const { return primal_; }
  const Generator& dual() const { return dual_; }

  Vec to_dual(const Vec& theta) const { return primal_.gradient(theta); }
  Vec to_primal(const Vec& eta) const;
  SolveResult try_to_primal(const Vec& eta) const;
  double conjugate(const Vec& eta) const;

 private:
  Generator primal_;
  Generator dual_;
  NewtonOptions opts_;
};

double conjugate(const Generator& gen, const Vec& eta);

// |G**(theta) - G(theta)| with the double conjugate taken by a second solver
// pass over the dual generator.
double double_conjugate_gap(const Generator& gen, const Vec& theta);

// The same contrast computed four ways across the primal/dual charts.
struct CanonicalRoutes {
  double bregman_primal = 0.0;   // B_G(tp : tq)
  double fenchel_young = 0.0;    // Y_{G,G*}(tp : eta_q)
  double bregman_dual = 0.0;     // B_{G*}(eta_q : eta_p)
  double fenchel_young_dual = 0.0;  // Y_{G*,G**}(eta_q : tp)
  double value() const { return bregman_primal; }
  double max_spread() const;
};
CanonicalRoutes canonical_divergence(const ConjugatePair& pair, const Vec& tp,
                                     const Vec& tq);

// |F*(grad F(theta)) + H(p_theta)| where the entropy comes from the oracle.
double negentropy_gap(const Family& family, const Vec& theta, const Scheme& scheme);

// |B_G(t1:t2) - B_Gbar(u1:u2)| for Gbar(u) = G(A u + b) + <c, u> + d with
// u_i the A-preimages of the t_i. A is row-major square.
double affine_reparam_gap(const Generator& gen, const Vec& a_rowmajor, const Vec& b,
                          const Vec& c, double d, const Vec& t1, const Vec& t2);

// Samples the directional derivative at distances {1e-2, 1e-4, 1e-6} from a
// boundary point; a Legendre-type generator shows monotone divergence toward
// -infinity. Diagnostic only.
struct BoundaryDiagnostic {
  std::array<double, 3> derivative{};
  bool monotone_divergence = false;
};
BoundaryDiagnostic boundary_derivative_diagnostic(const Generator& gen,
                                                  const Vec& interior,
                                                  const Vec& boundary);

}  // namespace expfam
